#pragma once

#include "feast/codec.hpp"
#include "feast/dataset.hpp"
#include "feast/embedding.hpp"
#include "feast/error.hpp"
#include "feast/facet_classifier.hpp"
#include "feast/metrics.hpp"
#include "feast/negative_mining.hpp"
#include "feast/pipeline.hpp"
#include "feast/prompts.hpp"
#include "feast/random.hpp"
#include "feast/remote.hpp"
#include "feast/reranking.hpp"
#include "feast/retrieval.hpp"
#include "feast/taxonomy.hpp"
#include "feast/text.hpp"

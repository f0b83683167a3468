#pragma once

// Description -> FoodEx2 code in three stages:
//   I   base term:   retrieve top-k base terms, rerank, keep the top survivor
//   II  categories:  decide which facet categories apply
//   III descriptors: per selected category, retrieve + rerank its descriptors
//                    and keep every survivor

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "feast/codec.hpp"
#include "feast/embedding.hpp"
#include "feast/error.hpp"
#include "feast/facet_classifier.hpp"
#include "feast/metrics.hpp"
#include "feast/prompts.hpp"
#include "feast/reranking.hpp"
#include "feast/retrieval.hpp"
#include "feast/taxonomy.hpp"

namespace feast {

enum class CategoryBackend { ThresholdRemote, BiEncoder, Linear, Llm };
enum class SelectionBackend { RetrieveRerank, Llm };

NLOHMANN_JSON_SERIALIZE_ENUM(CategoryBackend, {
                                                  {CategoryBackend::ThresholdRemote, "threshold_remote"},
                                                  {CategoryBackend::BiEncoder, "biencoder"},
                                                  {CategoryBackend::Linear, "linear"},
                                                  {CategoryBackend::Llm, "llm"},
                                              })
NLOHMANN_JSON_SERIALIZE_ENUM(SelectionBackend, {
                                                   {SelectionBackend::RetrieveRerank, "retrieve_rerank"},
                                                   {SelectionBackend::Llm, "llm"},
                                               })

struct PipelineConfig {
  std::size_t k_base = 10;
  std::size_t k_descriptor = 10;
  double tau_base = 0.5;
  double tau_descriptor = 0.5;
  double tau_category = 0.35;
  CategoryBackend category_backend = CategoryBackend::Linear;
  SelectionBackend selection_backend = SelectionBackend::RetrieveRerank;
  // Feed "text [BASETERM] name" instead of the bare text to the
  // threshold-based category backends.
  bool category_input_with_base_term = false;

  // Backend wiring, used by the CLI.
  std::string embedder = "deterministic";  // deterministic | toy | remote
  std::string embedder_model;              // toy embedder weights
  std::string scorer = "lexical";          // lexical | remote
  std::string linear_model;
  std::string mlp_model;  // empty: identity
  std::string embed_url;
  std::string score_url;
  std::string categories_url;
  std::string generate_url;
  std::string index_cache_dir;
  std::uint64_t seed = 42;
};

inline void validate(const PipelineConfig& cfg) {
  if (cfg.k_base < 1 || cfg.k_descriptor < 1) {
    fail(ErrorCode::InvalidArgument, "k must be at least 1");
  }
  if (cfg.tau_base < 0.0 || cfg.tau_descriptor < 0.0) {
    fail(ErrorCode::InvalidArgument, "rerank thresholds must be non-negative");
  }
  if (!(cfg.tau_category > 0.0 && cfg.tau_category < 1.0)) {
    fail(ErrorCode::InvalidArgument, "tau_category must lie in (0,1)");
  }
}

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = nlohmann::json{{"k_base", c.k_base},
                     {"k_descriptor", c.k_descriptor},
                     {"tau_base", c.tau_base},
                     {"tau_descriptor", c.tau_descriptor},
                     {"tau_category", c.tau_category},
                     {"category_backend", c.category_backend},
                     {"selection_backend", c.selection_backend},
                     {"category_input_with_base_term", c.category_input_with_base_term},
                     {"embedder", c.embedder},
                     {"embedder_model", c.embedder_model},
                     {"scorer", c.scorer},
                     {"linear_model", c.linear_model},
                     {"mlp_model", c.mlp_model},
                     {"embed_url", c.embed_url},
                     {"score_url", c.score_url},
                     {"categories_url", c.categories_url},
                     {"generate_url", c.generate_url},
                     {"index_cache_dir", c.index_cache_dir},
                     {"seed", c.seed}};
}

// Missing keys keep their defaults.
inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  opt("k_base", c.k_base);
  opt("k_descriptor", c.k_descriptor);
  opt("tau_base", c.tau_base);
  opt("tau_descriptor", c.tau_descriptor);
  opt("tau_category", c.tau_category);
  opt("category_backend", c.category_backend);
  opt("selection_backend", c.selection_backend);
  opt("category_input_with_base_term", c.category_input_with_base_term);
  opt("embedder", c.embedder);
  opt("embedder_model", c.embedder_model);
  opt("scorer", c.scorer);
  opt("linear_model", c.linear_model);
  opt("mlp_model", c.mlp_model);
  opt("embed_url", c.embed_url);
  opt("score_url", c.score_url);
  opt("categories_url", c.categories_url);
  opt("generate_url", c.generate_url);
  opt("index_cache_dir", c.index_cache_dir);
  opt("seed", c.seed);
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path);
  try {
    auto cfg = nlohmann::json::parse(in).get<PipelineConfig>();
    validate(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, "config " + path + ": " + e.what());
  }
}

// --- indexes ----------------------------------------------------------------------

// Base-term and per-category indexes, built on first use. With a cache
// directory, built indexes are also stored on disk keyed by catalog content
// and provider id.
class IndexStore {
 public:
  IndexStore(const Taxonomy& tx, const EmbeddingProvider& provider, std::string cache_dir = {})
      : tx_(tx), provider_(provider), cache_dir_(std::move(cache_dir)) {
    if (!cache_dir_.empty()) {
      catalog_hash_ = std::to_string(fnv1a64(catalog_to_string(tx_)));
    }
  }

  void put(VectorIndex index) {
    std::lock_guard lock(mu_);
    const auto tag = index.tag();
    indexes_.insert_or_assign(tag, std::make_shared<const VectorIndex>(std::move(index)));
  }

  const VectorIndex& get(std::string_view hierarchy) {
    std::lock_guard lock(mu_);
    const auto it = indexes_.find(std::string(hierarchy));
    if (it != indexes_.end()) return *it->second;
    if (!tx_.has_hierarchy(hierarchy)) {
      fail(ErrorCode::MissingCategoryIndex, "no index for " + std::string(hierarchy));
    }
    auto built = std::make_shared<const VectorIndex>(load_or_build(hierarchy));
    return *indexes_.emplace(std::string(hierarchy), std::move(built)).first->second;
  }

  std::string cache_path(std::string_view hierarchy) const {
    std::string prov = provider_.id();
    for (char& c : prov) {
      if (!text::is_token_byte(static_cast<unsigned char>(c)) && c != '-') c = '_';
    }
    return (std::filesystem::path(cache_dir_) /
            (catalog_hash_ + "_" + prov + "_" + std::string(hierarchy) + ".idx"))
        .string();
  }

 private:
  VectorIndex load_or_build(std::string_view hierarchy) {
    if (cache_dir_.empty()) return build_index(tx_, hierarchy, provider_);
    const auto path = cache_path(hierarchy);
    if (std::filesystem::exists(path)) return load_index(path);
    auto index = build_index(tx_, hierarchy, provider_);
    std::filesystem::create_directories(cache_dir_);
    save_index(index, path);
    return index;
  }

  const Taxonomy& tx_;
  const EmbeddingProvider& provider_;
  std::string cache_dir_;
  std::string catalog_hash_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const VectorIndex>, std::less<>> indexes_;
};

// Non-owning handles to everything a pipeline run needs. Only the backends
// selected by the config have to be set.
struct PipelineDeps {
  const Taxonomy* taxonomy = nullptr;
  const EmbeddingProvider* provider = nullptr;
  const PairScorer* scorer = nullptr;
  IndexStore* indexes = nullptr;
  const CategoryScorer* category_scorer = nullptr;  // ThresholdRemote
  const LinearMultiLabel* linear = nullptr;         // Linear
  const Mlp* mlp = nullptr;                         // BiEncoder
  const TextGenerator* generator = nullptr;         // Llm
};

// --- stage results ------------------------------------------------------------------

struct BaseTermResult {
  TermCode base_term;
  RankedCandidates retrieved;
  RankedCandidates reranked;
  bool fallback = false;  // no survivor; retrieval top-1 used
  std::vector<std::string> rejected;
};

struct CategoryResult {
  std::vector<FacetCategoryId> categories;
  std::optional<CategoryScores> scores;
  std::vector<std::string> rejected;
};

struct DescriptorTrace {
  FacetCategoryId category;
  RankedCandidates retrieved;
  RankedCandidates reranked;
  std::vector<std::string> rejected;
};

struct DescriptorResult {
  std::vector<FacetGroup> groups;
  std::vector<DescriptorTrace> traces;
};

struct Prediction {
  std::string input;
  FoodCode predicted;
  std::string code;
  BaseTermResult base;
  CategoryResult categories;
  DescriptorResult descriptors;
};

namespace detail {

template <class F>
auto with_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.message(), e.offset());
  }
}

inline void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string("pipeline dependency missing: ") + what);
}

// "CODE: context | CODE: context"
inline std::string candidate_context(const VectorIndex& index, const RankedCandidates& rc) {
  std::vector<std::string> parts;
  for (const auto& it : rc.items) {
    parts.push_back(it.code.str() + ": " + index.entry(it.code).context);
  }
  return text::join(parts, " | ");
}

inline std::vector<std::string> candidate_codes(const RankedCandidates& rc) {
  std::vector<std::string> out;
  for (const auto& it : rc.items) out.push_back(it.code.str());
  return out;
}

}  // namespace detail

inline BaseTermResult run_task1(const std::string& input, const PipelineConfig& cfg,
                                const PipelineDeps& deps) {
  return detail::with_stage("task I (base term)", [&] {
    detail::require(deps.indexes, "indexes");
    detail::require(deps.provider, "embedding provider");
    const auto& index = deps.indexes->get(kBaseHierarchy);
    auto retrieved = top_k(index, input, cfg.k_base, *deps.provider);
    BaseTermResult out{retrieved.items.front().code, retrieved, {}, false, {}};
    out.reranked.query_id = input;
    out.reranked.stage = Stage::Reranked;

    if (cfg.selection_backend == SelectionBackend::Llm) {
      detail::require(deps.generator, "text generator");
      const auto codes = detail::candidate_codes(retrieved);
      const auto prompt = render_prompt(
          PromptTask::BaseTerm,
          {detail::candidate_context(index, retrieved), codes, input, std::nullopt});
      const auto sel = parse_selection(deps.generator->generate(prompt), codes);
      out.rejected = sel.rejected;
      for (const auto& c : sel.accepted) out.reranked.items.push_back({TermCode::parse(c), 1.0});
    } else {
      detail::require(deps.scorer, "pair scorer");
      out.reranked = rerank_and_filter(*deps.scorer, input, retrieved, index, cfg.tau_base);
    }
    if (out.reranked.items.empty()) {
      out.fallback = true;
    } else {
      out.base_term = out.reranked.items.front().code;
    }
    return out;
  });
}

inline CategoryResult run_task2(const std::string& input, const TermCode& base_term,
                                const PipelineConfig& cfg, const PipelineDeps& deps) {
  return detail::with_stage("task II (facet categories)", [&] {
    detail::require(deps.taxonomy, "taxonomy");
    const auto& tx = *deps.taxonomy;
    const auto& registry = tx.category_registry();
    CategoryResult out;
    std::string text = input;
    if (cfg.category_input_with_base_term) {
      text += std::string(kBaseTermJoin) + tx.node(kBaseHierarchy, base_term).name;
    }
    switch (cfg.category_backend) {
      case CategoryBackend::ThresholdRemote:
        detail::require(deps.category_scorer, "category scorer");
        out.scores = deps.category_scorer->score(text);
        break;
      case CategoryBackend::Linear: {
        detail::require(deps.linear, "linear classifier");
        if (deps.linear->labels().size() != registry.size() ||
            !std::equal(registry.begin(), registry.end(), deps.linear->labels().begin(),
                        [](const FacetCategory& c, const FacetCategoryId& id) { return c.id == id; })) {
          fail(ErrorCode::DimensionMismatch, "linear model labels differ from catalog categories");
        }
        out.scores = deps.linear->score(text);
        break;
      }
      case CategoryBackend::BiEncoder:
        detail::require(deps.provider, "embedding provider");
        detail::require(deps.mlp, "mlp");
        out.scores = biencoder_scores(input, base_term, tx, *deps.provider, *deps.mlp);
        break;
      case CategoryBackend::Llm: {
        detail::require(deps.generator, "text generator");
        std::vector<std::string> ids, context;
        for (const auto& c : registry) {
          ids.push_back(c.id.str());
          context.push_back(c.id.str() + ": " + category_text(c));
        }
        const auto prompt = render_prompt(
            PromptTask::FacetCategory, {text::join(context, " | "), ids, input, std::nullopt});
        const auto sel = parse_selection(deps.generator->generate(prompt), ids);
        out.rejected = sel.rejected;
        for (const auto& c : registry) {
          if (std::find(sel.accepted.begin(), sel.accepted.end(), c.id.str()) !=
              sel.accepted.end()) {
            out.categories.push_back(c.id);
          }
        }
        return out;
      }
    }
    out.categories = threshold_classify(*out.scores, cfg.tau_category, registry);
    return out;
  });
}

inline DescriptorResult run_task3(const std::string& input,
                                  const std::vector<FacetCategoryId>& categories,
                                  const PipelineConfig& cfg, const PipelineDeps& deps) {
  return detail::with_stage("task III (facet descriptors)", [&] {
    DescriptorResult out;
    if (categories.empty()) return out;
    detail::require(deps.indexes, "indexes");
    detail::require(deps.provider, "embedding provider");
    for (const auto& category : categories) {
      const auto& index = deps.indexes->get(category.str());
      DescriptorTrace trace{category, top_k(index, input, cfg.k_descriptor, *deps.provider), {}, {}};
      if (cfg.selection_backend == SelectionBackend::Llm) {
        detail::require(deps.generator, "text generator");
        const auto codes = detail::candidate_codes(trace.retrieved);
        const auto& tx = *deps.taxonomy;
        const auto& root = tx.node_at(tx.hierarchy(category.str()).root);
        const auto prompt =
            render_prompt(PromptTask::FacetDescriptor,
                          {detail::candidate_context(index, trace.retrieved), codes, input, root.name});
        const auto sel = parse_selection(deps.generator->generate(prompt), codes);
        trace.rejected = sel.rejected;
        trace.reranked = {input, Stage::Reranked, {}};
        for (const auto& c : sel.accepted) trace.reranked.items.push_back({TermCode::parse(c), 1.0});
      } else {
        detail::require(deps.scorer, "pair scorer");
        trace.reranked =
            rerank_and_filter(*deps.scorer, input, trace.retrieved, index, cfg.tau_descriptor);
      }
      for (const auto& item : trace.reranked.items) out.groups.push_back({category, item.code});
      out.traces.push_back(std::move(trace));
    }
    return out;
  });
}

inline Prediction classify(const std::string& input, const PipelineConfig& cfg,
                           const PipelineDeps& deps) {
  auto base = run_task1(input, cfg, deps);
  auto categories = run_task2(input, base.base_term, cfg, deps);
  auto descriptors = run_task3(input, categories.categories, cfg, deps);
  FoodCode code{base.base_term, descriptors.groups};
  canonicalize(code);
  auto serialized = serialize_code(code);
  return Prediction{input,
                    std::move(code),
                    std::move(serialized),
                    std::move(base),
                    std::move(categories),
                    std::move(descriptors)};
}

// Results come back in input order whatever the worker count. The first
// error raised by any worker is rethrown after all workers stop.
inline std::vector<Prediction> classify_batch(const std::vector<std::string>& inputs,
                                              const PipelineConfig& cfg,
                                              const PipelineDeps& deps, std::size_t jobs = 1) {
  std::vector<std::optional<Prediction>> slots(inputs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next++;
      if (i >= inputs.size()) return;
      try {
        slots[i] = classify(inputs[i], cfg, deps);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(inputs.size(), 1));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  std::vector<Prediction> out;
  out.reserve(inputs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// --- code-level evaluation ------------------------------------------------------------

struct CodeEvaluation {
  std::size_t instances = 0;
  double exact_match = 0.0;    // whole canonical code
  double base_accuracy = 0.0;  // base term only
  EvalReport categories;       // facet categories as label sets
  EvalReport descriptors;      // (category, descriptor) groups as label sets
};

inline CodeEvaluation evaluate_codes(const std::vector<FoodCode>& preds,
                                     const std::vector<FoodCode>& golds) {
  if (preds.size() != golds.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                        std::to_string(golds.size()) + " gold codes");
  }
  if (preds.empty()) fail(ErrorCode::InvalidArgument, "no instances to evaluate");
  CodeEvaluation out;
  out.instances = preds.size();
  std::vector<std::set<FacetCategoryId>> pc, gc;
  std::vector<std::set<FacetGroup>> pd, gd;
  std::set<FacetCategoryId> cat_universe;
  std::set<FacetGroup> group_universe;
  std::size_t exact = 0, base = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto p = preds[i];
    auto g = golds[i];
    canonicalize(p);
    canonicalize(g);
    exact += p == g;
    base += p.base_term == g.base_term;
    auto& pcs = pc.emplace_back();
    auto& gcs = gc.emplace_back();
    auto& pds = pd.emplace_back(p.facets.begin(), p.facets.end());
    auto& gds = gd.emplace_back(g.facets.begin(), g.facets.end());
    for (const auto& f : pds) pcs.insert(f.category);
    for (const auto& f : gds) gcs.insert(f.category);
    cat_universe.insert(pcs.begin(), pcs.end());
    cat_universe.insert(gcs.begin(), gcs.end());
    group_universe.insert(pds.begin(), pds.end());
    group_universe.insert(gds.begin(), gds.end());
  }
  const double n = static_cast<double>(preds.size());
  out.exact_match = static_cast<double>(exact) / n;
  out.base_accuracy = static_cast<double>(base) / n;
  out.categories = classification_metrics(
      pc, gc, std::vector<FacetCategoryId>(cat_universe.begin(), cat_universe.end()));
  out.descriptors = classification_metrics(
      pd, gd, std::vector<FacetGroup>(group_universe.begin(), group_universe.end()));
  return out;
}

}  // namespace feast

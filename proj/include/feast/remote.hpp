#pragma once

// HTTP/JSON clients for externally served models:
//
//   POST /embed       {"texts": [...]}              -> {"dimension": d, "vectors": [[...]]}
//   POST /score       {"query": q, "candidates": [...]} -> {"scores": [...]}
//   POST /categories  {"text": t}                   -> {"logits": [...]}
//   POST /generate    {"system": s, "user": u}      -> {"text": ...}
//
// Any transport failure, non-200 status or malformed body raises
// RemoteUnavailable with the response body in the message.

#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "feast/embedding.hpp"
#include "feast/error.hpp"
#include "feast/facet_classifier.hpp"
#include "feast/prompts.hpp"
#include "feast/reranking.hpp"

namespace feast::remote {

using nlohmann::json;

struct Endpoint {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  int timeout_seconds = 30;
};

inline json post_json(const Endpoint& ep, const std::string& path, const json& body) {
  httplib::Client client(ep.base_url);
  client.set_connection_timeout(ep.timeout_seconds, 0);
  client.set_read_timeout(ep.timeout_seconds, 0);
  client.set_write_timeout(ep.timeout_seconds, 0);
  const auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    fail(ErrorCode::RemoteUnavailable,
         ep.base_url + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail(ErrorCode::RemoteUnavailable,
         ep.base_url + path + ": HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception&) {
    fail(ErrorCode::RemoteUnavailable, ep.base_url + path + ": malformed JSON: " + res->body);
  }
}

namespace detail {

template <class T>
T field(const json& j, const char* name, const std::string& where) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::RemoteUnavailable, where + ": missing or malformed '" + name + "'");
  }
}

}  // namespace detail

// Vectors are returned as served; pooling is the server's concern.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  // dimension 0 asks the server once, with a probe text.
  explicit RemoteEmbeddingProvider(Endpoint ep, std::size_t dimension = 0)
      : ep_(std::move(ep)), dimension_(dimension) {
    if (dimension_ == 0) dimension_ = request({"dimension probe"}).first;
  }

  ProviderKind kind() const override { return ProviderKind::Remote; }
  std::size_t dimension() const override { return dimension_; }
  std::string id() const override {
    return "remote-" + std::to_string(fnv1a64(ep_.base_url)) + "-" + std::to_string(dimension_);
  }

  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override {
    auto [dim, vectors] = request(texts);
    if (dim != dimension_) {
      fail(ErrorCode::DimensionMismatch, "server dimension " + std::to_string(dim) +
                                             ", expected " + std::to_string(dimension_));
    }
    return vectors;
  }

 private:
  std::pair<std::size_t, std::vector<EmbeddingVector>> request(
      const std::vector<std::string>& texts) const {
    const auto res = post_json(ep_, "/embed", json{{"texts", texts}});
    const auto dim = detail::field<std::size_t>(res, "dimension", "/embed");
    auto vectors = detail::field<std::vector<EmbeddingVector>>(res, "vectors", "/embed");
    if (vectors.size() != texts.size()) {
      fail(ErrorCode::RemoteUnavailable, "/embed returned " + std::to_string(vectors.size()) +
                                             " vectors for " + std::to_string(texts.size()));
    }
    for (const auto& v : vectors) {
      if (v.size() != dim) fail(ErrorCode::DimensionMismatch, "/embed vector length");
    }
    return {dim, std::move(vectors)};
  }

  Endpoint ep_;
  std::size_t dimension_;
};

class RemotePairScorer final : public PairScorer {
 public:
  explicit RemotePairScorer(Endpoint ep) : ep_(std::move(ep)) {}

  ScorerKind kind() const override { return ScorerKind::RemoteCrossEncoder; }
  std::vector<double> score_batch(const std::string& query,
                                  const std::vector<std::string>& contexts) const override {
    const auto res = post_json(ep_, "/score", json{{"query", query}, {"candidates", contexts}});
    return detail::field<std::vector<double>>(res, "scores", "/score");
  }

 private:
  Endpoint ep_;
};

class RemoteCategoryScorer final : public CategoryScorer {
 public:
  explicit RemoteCategoryScorer(Endpoint ep) : ep_(std::move(ep)) {}

  CategoryScores score(const std::string& text) const override {
    const auto res = post_json(ep_, "/categories", json{{"text", text}});
    return {detail::field<std::vector<double>>(res, "logits", "/categories"),
            ScoreProvenance::Remote};
  }

 private:
  Endpoint ep_;
};

class RemoteGenerator final : public TextGenerator {
 public:
  explicit RemoteGenerator(Endpoint ep) : ep_(std::move(ep)) {}

  std::string generate(const Prompt& prompt) const override {
    const auto res =
        post_json(ep_, "/generate", json{{"system", prompt.system}, {"user", prompt.user}});
    return detail::field<std::string>(res, "text", "/generate");
  }

 private:
  Endpoint ep_;
};

}  // namespace feast::remote

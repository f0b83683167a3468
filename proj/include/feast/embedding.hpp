#pragma once

// Embedding providers, cosine similarity, the multiple-negatives ranking (MNR)
// objective with its analytic gradient, and a small trainable linear embedder
// over hashed token features.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "feast/error.hpp"
#include "feast/random.hpp"
#include "feast/text.hpp"

namespace feast {

using EmbeddingVector = std::vector<double>;

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline void write_matrix_rows(const Matrix& m, std::ostream& out) {
  const auto precision = out.precision(17);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out << ' ';
      out << m(r, c);
    }
    out << '\n';
  }
  out.precision(precision);
}

inline Matrix read_matrix_rows(std::istream& in, std::size_t rows,
                               std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data) {
    if (!(in >> v)) fail(ErrorCode::Io, "truncated matrix data");
  }
  return m;
}

// --- vector math ---------------------------------------------------------------

inline double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(const EmbeddingVector& a) { return std::sqrt(dot(a, a)); }

inline double cosine_similarity(const EmbeddingVector& a,
                                const EmbeddingVector& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimensionMismatch,
         std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::ZeroVector, "cosine of zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

inline EmbeddingVector normalized(EmbeddingVector v) {
  const double n = l2_norm(v);
  if (n == 0.0) fail(ErrorCode::ZeroVector, "cannot normalize zero vector");
  for (double& x : v) x /= n;
  return v;
}

// --- providers -------------------------------------------------------------------

enum class ProviderKind { DeterministicTest, Remote, ToyTrained };

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual ProviderKind kind() const = 0;
  virtual std::size_t dimension() const = 0;
  // Stable identifier; keys on-disk index caches.
  virtual std::string id() const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(
      const std::vector<std::string>& texts) const = 0;
};

// Order-preserving batch embedding with output checks.
inline std::vector<EmbeddingVector> embed(const EmbeddingProvider& provider,
                                          const std::vector<std::string>& texts) {
  if (texts.empty()) fail(ErrorCode::InvalidArgument, "embed: no texts");
  auto vectors = provider.embed_batch(texts);
  if (vectors.size() != texts.size()) {
    fail(ErrorCode::DimensionMismatch,
         "provider returned " + std::to_string(vectors.size()) +
             " vectors for " + std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : vectors) {
    if (v.size() != provider.dimension()) {
      fail(ErrorCode::DimensionMismatch,
           "vector of dimension " + std::to_string(v.size()) + ", expected " +
               std::to_string(provider.dimension()));
    }
    for (double x : v) {
      if (!std::isfinite(x)) {
        fail(ErrorCode::InvalidArgument, "provider returned non-finite value");
      }
    }
  }
  return vectors;
}

inline EmbeddingVector embed_one(const EmbeddingProvider& provider,
                                 const std::string& text) {
  return embed(provider, {text}).front();
}

struct HashFeaturizer {
  std::size_t dim = text::kDefaultFeatureDim;
  std::uint64_t seed = text::kDefaultFeatureSeed;

  text::SparseFeatures operator()(std::string_view s) const {
    return text::hashed_features(s, dim, seed);
  }
};

// Raw hashed unigram+bigram counts (a linear embedder with identity weights).
class DeterministicTestProvider final : public EmbeddingProvider {
 public:
  explicit DeterministicTestProvider(HashFeaturizer featurizer = {})
      : featurizer_(featurizer) {}

  ProviderKind kind() const override { return ProviderKind::DeterministicTest; }
  std::size_t dimension() const override { return featurizer_.dim; }
  std::string id() const override {
    return "hash-" + std::to_string(featurizer_.dim) + "-" +
           std::to_string(featurizer_.seed);
  }
  std::vector<EmbeddingVector> embed_batch(
      const std::vector<std::string>& texts) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      out.push_back(text::densify(featurizer_(t), featurizer_.dim));
    }
    return out;
  }

 private:
  HashFeaturizer featurizer_;
};

// embedding(x) = W * features(x), W is d x f.
class ToyEmbedder final : public EmbeddingProvider {
 public:
  ToyEmbedder(Matrix weights, HashFeaturizer featurizer)
      : weights_(std::move(weights)), featurizer_(featurizer) {
    if (weights_.cols != featurizer_.dim) {
      fail(ErrorCode::DimensionMismatch, "weight columns != feature dim");
    }
  }

  // Gaussian init with standard deviation 1/sqrt(f).
  static ToyEmbedder random(std::size_t dimension, HashFeaturizer featurizer,
                            std::uint64_t seed) {
    Matrix w(dimension, featurizer.dim);
    Rng rng(seed);
    const double sd = 1.0 / std::sqrt(static_cast<double>(featurizer.dim));
    for (double& v : w.data) v = rng.normal() * sd;
    return ToyEmbedder(std::move(w), featurizer);
  }

  const Matrix& weights() const noexcept { return weights_; }
  Matrix& mutable_weights() noexcept { return weights_; }
  const HashFeaturizer& featurizer() const noexcept { return featurizer_; }

  EmbeddingVector embed_features(const text::SparseFeatures& x) const {
    EmbeddingVector e(weights_.rows, 0.0);
    for (std::size_t r = 0; r < weights_.rows; ++r) {
      const double* row = &weights_.data[r * weights_.cols];
      double s = 0.0;
      for (const auto& [c, v] : x) s += row[c] * v;
      e[r] = s;
    }
    return e;
  }

  ProviderKind kind() const override { return ProviderKind::ToyTrained; }
  std::size_t dimension() const override { return weights_.rows; }
  std::string id() const override {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : weights_.data) {
      h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
    }
    return "toy-" + std::to_string(weights_.rows) + "x" +
           std::to_string(weights_.cols) + "-" + std::to_string(h);
  }
  std::vector<EmbeddingVector> embed_batch(
      const std::vector<std::string>& texts) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_features(featurizer_(t)));
    return out;
  }

  void save(std::ostream& out) const {
    out << "toy_embedder " << weights_.rows << ' ' << weights_.cols << ' '
        << featurizer_.seed << '\n';
    write_matrix_rows(weights_, out);
  }

  static ToyEmbedder load(std::istream& in) {
    std::string tag;
    std::size_t rows = 0, cols = 0;
    std::uint64_t seed = 0;
    if (!(in >> tag >> rows >> cols >> seed) || tag != "toy_embedder") {
      fail(ErrorCode::Io, "not a toy_embedder model file");
    }
    auto w = read_matrix_rows(in, rows, cols);
    return ToyEmbedder(std::move(w), HashFeaturizer{cols, seed});
  }

 private:
  Matrix weights_;
  HashFeaturizer featurizer_;
};

// --- MNR objective ---------------------------------------------------------------

struct MnrOptions {
  // sim = scale * cosine
  double scale = 1.0;
  // Also treat the other positives of the batch as negatives.
  bool in_batch_negatives = false;
};

inline double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

namespace detail {

inline void check_batch_shape(std::size_t queries, std::size_t positives,
                              std::size_t negatives) {
  if (queries == 0) fail(ErrorCode::InvalidArgument, "empty MNR batch");
  if (queries != positives) {
    fail(ErrorCode::InvalidArgument, "queries and positives differ in count");
  }
  if (negatives != queries && negatives != 0) {
    fail(ErrorCode::InvalidArgument, "one negative list per query required");
  }
}

}  // namespace detail

// -(1/B) sum_i [ s(q_i,d_i) - log( e^{s(q_i,d_i)} + sum_{j in H(q_i)} e^{s(q_i,d_j)} ) ]
inline double mnr_loss(const std::vector<EmbeddingVector>& queries,
                       const std::vector<EmbeddingVector>& positives,
                       const std::vector<std::vector<EmbeddingVector>>& hard_negatives,
                       const MnrOptions& opts = {}) {
  detail::check_batch_shape(queries.size(), positives.size(), hard_negatives.size());
  const std::size_t batch = queries.size();
  double total = 0.0;
  std::vector<double> logits;
  for (std::size_t i = 0; i < batch; ++i) {
    logits.clear();
    const double pos = opts.scale * cosine_similarity(queries[i], positives[i]);
    logits.push_back(pos);
    if (!hard_negatives.empty()) {
      for (const auto& n : hard_negatives[i]) {
        logits.push_back(opts.scale * cosine_similarity(queries[i], n));
      }
    }
    if (opts.in_batch_negatives) {
      for (std::size_t k = 0; k < batch; ++k) {
        if (k != i) logits.push_back(opts.scale * cosine_similarity(queries[i], positives[k]));
      }
    }
    total += log_sum_exp(logits) - pos;
  }
  return total / static_cast<double>(batch);
}

struct MnrTriplet {
  std::string query;
  std::string positive;
  std::vector<std::string> negatives;
};

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;  // same shape as the embedder weights
};

namespace detail {

// d cos(a, b) / d a
inline void add_cosine_grad(const EmbeddingVector& a, const EmbeddingVector& b,
                            double weight, EmbeddingVector& grad_a) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::ZeroVector, "cosine of zero vector");
  const double cos = dot(a, b) / (na * nb);
  for (std::size_t k = 0; k < a.size(); ++k) {
    grad_a[k] += weight * (b[k] / (na * nb) - cos * a[k] / (na * na));
  }
}

}  // namespace detail

// Loss and dL/dW for a ToyEmbedder, by the chain rule through
// e = W x and the cosine.
inline LossAndGradient mnr_loss_and_gradient(const ToyEmbedder& model,
                                             const std::vector<MnrTriplet>& batch,
                                             const MnrOptions& opts = {}) {
  if (batch.empty()) fail(ErrorCode::InvalidArgument, "empty MNR batch");
  const auto& feat = model.featurizer();
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  struct Item {
    text::SparseFeatures x;
    EmbeddingVector e;
    EmbeddingVector g;
  };
  auto make = [&](const std::string& s) {
    Item it{feat(s), {}, {}};
    it.e = model.embed_features(it.x);
    it.g.assign(it.e.size(), 0.0);
    return it;
  };

  std::vector<Item> queries, positives;
  std::vector<std::vector<Item>> negatives(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    queries.push_back(make(batch[i].query));
    positives.push_back(make(batch[i].positive));
    for (const auto& n : batch[i].negatives) negatives[i].push_back(make(n));
  }

  LossAndGradient out{0.0, Matrix(model.weights().rows, model.weights().cols)};
  std::vector<double> logits;
  std::vector<Item*> others;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    others.clear();
    for (auto& n : negatives[i]) others.push_back(&n);
    if (opts.in_batch_negatives) {
      for (std::size_t k = 0; k < batch.size(); ++k) {
        if (k != i) others.push_back(&positives[k]);
      }
    }
    Item& q = queries[i];
    Item& p = positives[i];
    logits.assign(1, opts.scale * cosine_similarity(q.e, p.e));
    for (const Item* n : others) {
      logits.push_back(opts.scale * cosine_similarity(q.e, n->e));
    }
    const double lse = log_sum_exp(logits);
    out.loss += (lse - logits[0]) * inv_b;

    // dL/ds_0 = (softmax_0 - 1)/B, dL/ds_j = softmax_j/B
    const double w0 = (std::exp(logits[0] - lse) - 1.0) * inv_b * opts.scale;
    detail::add_cosine_grad(q.e, p.e, w0, q.g);
    detail::add_cosine_grad(p.e, q.e, w0, p.g);
    for (std::size_t j = 0; j < others.size(); ++j) {
      const double wj = std::exp(logits[j + 1] - lse) * inv_b * opts.scale;
      detail::add_cosine_grad(q.e, others[j]->e, wj, q.g);
      detail::add_cosine_grad(others[j]->e, q.e, wj, others[j]->g);
    }
  }

  auto scatter = [&](const Item& it) {
    for (std::size_t r = 0; r < it.g.size(); ++r) {
      if (it.g[r] == 0.0) continue;
      double* row = &out.gradient.data[r * out.gradient.cols];
      for (const auto& [c, v] : it.x) row[c] += it.g[r] * v;
    }
  };
  for (std::size_t i = 0; i < batch.size(); ++i) {
    scatter(queries[i]);
    scatter(positives[i]);
    for (const auto& n : negatives[i]) scatter(n);
  }
  return out;
}

inline Matrix mnr_gradient(const ToyEmbedder& model,
                           const std::vector<MnrTriplet>& batch,
                           const MnrOptions& opts = {}) {
  return mnr_loss_and_gradient(model, batch, opts).gradient;
}

inline double mnr_loss(const ToyEmbedder& model,
                       const std::vector<MnrTriplet>& batch,
                       const MnrOptions& opts = {}) {
  std::vector<EmbeddingVector> q, p;
  std::vector<std::vector<EmbeddingVector>> n;
  for (const auto& t : batch) {
    q.push_back(model.embed_features(model.featurizer()(t.query)));
    p.push_back(model.embed_features(model.featurizer()(t.positive)));
    n.emplace_back();
    for (const auto& s : t.negatives) {
      n.back().push_back(model.embed_features(model.featurizer()(s)));
    }
  }
  return mnr_loss(q, p, n, opts);
}

// --- training ---------------------------------------------------------------------

struct AdamWConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  AdamW(std::size_t n, AdamWConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      params[i] -= cfg_.learning_rate *
                   (mhat / (std::sqrt(vhat) + cfg_.epsilon) +
                    cfg_.weight_decay * params[i]);
    }
  }

 private:
  AdamWConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

struct ToyTrainConfig {
  std::size_t dimension = 64;
  HashFeaturizer featurizer{};
  std::size_t steps = 500;
  std::size_t batch_size = 16;
  std::uint64_t seed = 42;
  AdamWConfig optimizer{};
  MnrOptions mnr{};
};

struct ToyTrainResult {
  ToyEmbedder embedder;
  std::vector<double> step_losses;  // batch loss before each update
  double initial_loss = 0.0;        // full training set, before training
  double final_loss = 0.0;          // full training set, after training
};

// Trains from a given starting point; batches are drawn from a seeded
// reshuffle of the triplets each epoch.
inline ToyTrainResult train_toy_embedder(const std::vector<MnrTriplet>& triplets,
                                         ToyEmbedder init,
                                         const ToyTrainConfig& cfg) {
  if (triplets.empty()) fail(ErrorCode::InvalidArgument, "no training triplets");
  if (cfg.batch_size == 0) fail(ErrorCode::InvalidArgument, "batch_size must be positive");
  ToyTrainResult result{std::move(init), {}, 0.0, 0.0};
  result.initial_loss = mnr_loss(result.embedder, triplets, cfg.mnr);
  if (!std::isfinite(result.initial_loss)) {
    fail(ErrorCode::NonFiniteLoss, "initial loss is not finite");
  }

  Rng rng(cfg.seed ^ 0xa5a5a5a5ULL);
  std::vector<std::size_t> order(triplets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();
  AdamW optimizer(result.embedder.weights().data.size(), cfg.optimizer);
  std::vector<MnrTriplet> batch;

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    batch.clear();
    while (batch.size() < std::min(cfg.batch_size, triplets.size())) {
      if (cursor == order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      batch.push_back(triplets[order[cursor++]]);
    }
    auto lg = mnr_loss_and_gradient(result.embedder, batch, cfg.mnr);
    if (!std::isfinite(lg.loss)) {
      fail(ErrorCode::NonFiniteLoss, "loss diverged at step " + std::to_string(step));
    }
    result.step_losses.push_back(lg.loss);
    optimizer.step(result.embedder.mutable_weights().data, lg.gradient.data);
  }
  result.final_loss = mnr_loss(result.embedder, triplets, cfg.mnr);
  return result;
}

inline ToyTrainResult train_toy_embedder(const std::vector<MnrTriplet>& triplets,
                                         const ToyTrainConfig& cfg) {
  return train_toy_embedder(
      triplets, ToyEmbedder::random(cfg.dimension, cfg.featurizer, cfg.seed), cfg);
}

}  // namespace feast

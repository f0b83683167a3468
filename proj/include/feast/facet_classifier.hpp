#pragma once

// Facet-category selection (which categories apply to a description).
// Three routes produce per-category logits z; a category is kept when
// sigmoid(z) >= tau.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "feast/embedding.hpp"
#include "feast/error.hpp"
#include "feast/taxonomy.hpp"
#include "feast/text.hpp"

namespace feast {

enum class ScoreProvenance { Remote, BiEncoder, Linear };

// One logit per registered category, in registry order.
struct CategoryScores {
  std::vector<double> logits;
  ScoreProvenance provenance = ScoreProvenance::Remote;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline std::vector<FacetCategoryId> threshold_classify(
    const CategoryScores& scores, double tau,
    const std::vector<FacetCategory>& registry) {
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::InvalidArgument, "tau must lie in (0,1)");
  }
  if (scores.logits.size() != registry.size()) {
    fail(ErrorCode::DimensionMismatch,
         std::to_string(scores.logits.size()) + " logits for " +
             std::to_string(registry.size()) + " categories");
  }
  std::vector<FacetCategoryId> out;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (sigmoid(scores.logits[i]) >= tau) out.push_back(registry[i].id);
  }
  return out;
}

// Backend producing category logits for a text (e.g. a remote classifier).
class CategoryScorer {
 public:
  virtual ~CategoryScorer() = default;
  virtual CategoryScores score(const std::string& text) const = 0;
};

// --- bi-encoder + MLP ----------------------------------------------------------------

// n -> hidden (ReLU) -> n.
class Mlp {
 public:
  Mlp(Matrix w1, std::vector<double> b1, Matrix w2, std::vector<double> b2)
      : w1_(std::move(w1)), b1_(std::move(b1)), w2_(std::move(w2)), b2_(std::move(b2)) {
    if (w1_.rows != b1_.size() || w2_.cols != w1_.rows || w2_.rows != b2_.size() ||
        w2_.rows != w1_.cols) {
      fail(ErrorCode::DimensionMismatch, "inconsistent MLP shapes");
    }
  }

  // relu(x) - relu(-x) = x, with hidden width 2n.
  static Mlp identity(std::size_t n) {
    Matrix w1(2 * n, n), w2(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      w1(i, i) = 1.0;
      w1(n + i, i) = -1.0;
      w2(i, i) = 1.0;
      w2(i, n + i) = -1.0;
    }
    return Mlp(std::move(w1), std::vector<double>(2 * n, 0.0), std::move(w2),
               std::vector<double>(n, 0.0));
  }

  static Mlp zeros(std::size_t n) {
    return Mlp(Matrix(2 * n, n), std::vector<double>(2 * n, 0.0), Matrix(n, 2 * n),
               std::vector<double>(n, 0.0));
  }

  std::size_t inputs() const noexcept { return w1_.cols; }
  std::size_t hidden() const noexcept { return w1_.rows; }

  std::vector<double> forward(const std::vector<double>& x) const {
    if (x.size() != w1_.cols) fail(ErrorCode::DimensionMismatch, "MLP input size");
    std::vector<double> h(w1_.rows);
    for (std::size_t r = 0; r < w1_.rows; ++r) {
      double s = b1_[r];
      for (std::size_t c = 0; c < w1_.cols; ++c) s += w1_(r, c) * x[c];
      h[r] = std::max(0.0, s);
    }
    std::vector<double> y(w2_.rows);
    for (std::size_t r = 0; r < w2_.rows; ++r) {
      double s = b2_[r];
      for (std::size_t c = 0; c < w2_.cols; ++c) s += w2_(r, c) * h[c];
      y[r] = s;
    }
    return y;
  }

  void save(std::ostream& out) const {
    out << "mlp " << w1_.cols << ' ' << w1_.rows << '\n';
    Matrix b1(1, b1_.size()), b2(1, b2_.size());
    b1.data = b1_;
    b2.data = b2_;
    write_matrix_rows(w1_, out);
    write_matrix_rows(b1, out);
    write_matrix_rows(w2_, out);
    write_matrix_rows(b2, out);
  }

  static Mlp load(std::istream& in) {
    std::string tag;
    std::size_t n = 0, h = 0;
    if (!(in >> tag >> n >> h) || tag != "mlp") fail(ErrorCode::Io, "not an mlp model file");
    auto w1 = read_matrix_rows(in, h, n);
    auto b1 = read_matrix_rows(in, 1, h).data;
    auto w2 = read_matrix_rows(in, n, h);
    auto b2 = read_matrix_rows(in, 1, n).data;
    return Mlp(std::move(w1), std::move(b1), std::move(w2), std::move(b2));
  }

 private:
  Matrix w1_;
  std::vector<double> b1_;
  Matrix w2_;
  std::vector<double> b2_;
};

inline constexpr std::string_view kBaseTermJoin = " [BASETERM] ";

inline std::string category_text(const FacetCategory& c) {
  return c.description.empty() ? c.name : c.name + " / " + c.description;
}

// Embeds `input ⊕ base term name` and every category text, turns the cosine
// vector into logits through the MLP, then thresholds.
inline CategoryScores biencoder_scores(const std::string& input_text,
                                       const TermCode& base_term, const Taxonomy& tx,
                                       const EmbeddingProvider& provider, const Mlp& mlp) {
  const auto& registry = tx.category_registry();
  const auto& base = tx.node(kBaseHierarchy, base_term);
  std::vector<std::string> texts{input_text + std::string(kBaseTermJoin) + base.name};
  for (const auto& c : registry) texts.push_back(category_text(c));
  const auto vectors = embed(provider, texts);
  std::vector<double> sims(registry.size());
  for (std::size_t i = 0; i < registry.size(); ++i) {
    sims[i] = cosine_similarity(vectors[0], vectors[i + 1]);
  }
  return CategoryScores{mlp.forward(sims), ScoreProvenance::BiEncoder};
}

inline std::vector<FacetCategoryId> biencoder_classify(const std::string& input_text,
                                                       const TermCode& base_term,
                                                       const Taxonomy& tx,
                                                       const EmbeddingProvider& provider,
                                                       const Mlp& mlp, double tau) {
  return threshold_classify(biencoder_scores(input_text, base_term, tx, provider, mlp),
                            tau, tx.category_registry());
}

// --- linear multi-label classifier -----------------------------------------------------

struct MultiLabelExample {
  std::string text;
  std::vector<FacetCategoryId> categories;
};

// logits = W * unit(features(text)) + b
class LinearMultiLabel {
 public:
  LinearMultiLabel(std::vector<FacetCategoryId> labels, Matrix weights,
                   std::vector<double> bias, HashFeaturizer featurizer,
                   std::uint64_t seed)
      : labels_(std::move(labels)),
        weights_(std::move(weights)),
        bias_(std::move(bias)),
        featurizer_(featurizer),
        seed_(seed) {
    if (weights_.rows != labels_.size() || bias_.size() != labels_.size() ||
        weights_.cols != featurizer_.dim) {
      fail(ErrorCode::DimensionMismatch, "inconsistent linear model shapes");
    }
  }

  static LinearMultiLabel zeros(std::vector<FacetCategoryId> labels,
                                HashFeaturizer featurizer = {}, std::uint64_t seed = 42) {
    const std::size_t n = labels.size();
    return LinearMultiLabel(std::move(labels), Matrix(n, featurizer.dim),
                            std::vector<double>(n, 0.0), featurizer, seed);
  }

  const std::vector<FacetCategoryId>& labels() const noexcept { return labels_; }
  const Matrix& weights() const noexcept { return weights_; }
  Matrix& mutable_weights() noexcept { return weights_; }
  const std::vector<double>& bias() const noexcept { return bias_; }
  std::vector<double>& mutable_bias() noexcept { return bias_; }
  const HashFeaturizer& featurizer() const noexcept { return featurizer_; }
  std::uint64_t seed() const noexcept { return seed_; }

  text::SparseFeatures features(const std::string& s) const {
    auto x = featurizer_(s);
    double n2 = 0.0;
    for (const auto& [i, v] : x) n2 += v * v;
    if (n2 > 0.0) {
      const double inv = 1.0 / std::sqrt(n2);
      for (auto& [i, v] : x) v *= inv;
    }
    return x;
  }

  std::vector<double> logits_for(const text::SparseFeatures& x) const {
    std::vector<double> z(bias_);
    for (std::size_t r = 0; r < weights_.rows; ++r) {
      const double* row = &weights_.data[r * weights_.cols];
      for (const auto& [c, v] : x) z[r] += row[c] * v;
    }
    return z;
  }

  CategoryScores score(const std::string& s) const {
    return CategoryScores{logits_for(features(s)), ScoreProvenance::Linear};
  }

  void save(std::ostream& out) const {
    out << "linear_multilabel " << weights_.rows << ' ' << weights_.cols << ' '
        << seed_ << ' ' << featurizer_.seed << '\n';
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      out << (i ? " " : "") << labels_[i];
    }
    out << '\n';
    write_matrix_rows(weights_, out);
    Matrix b(1, bias_.size());
    b.data = bias_;
    write_matrix_rows(b, out);
  }

  static LinearMultiLabel load(std::istream& in) {
    std::string tag;
    std::size_t rows = 0, cols = 0;
    std::uint64_t seed = 0, feature_seed = 0;
    if (!(in >> tag >> rows >> cols >> seed >> feature_seed) || tag != "linear_multilabel") {
      fail(ErrorCode::Io, "not a linear_multilabel model file");
    }
    std::vector<FacetCategoryId> labels;
    for (std::size_t i = 0; i < rows; ++i) {
      std::string id;
      if (!(in >> id) || !FacetCategoryId::is_valid(id)) fail(ErrorCode::Io, "bad label row");
      labels.push_back(FacetCategoryId::parse(id));
    }
    auto w = read_matrix_rows(in, rows, cols);
    auto b = read_matrix_rows(in, 1, rows).data;
    return LinearMultiLabel(std::move(labels), std::move(w), std::move(b),
                            HashFeaturizer{cols, feature_seed}, seed);
  }

 private:
  std::vector<FacetCategoryId> labels_;
  Matrix weights_;
  std::vector<double> bias_;
  HashFeaturizer featurizer_;
  std::uint64_t seed_;
};

struct LinearLossAndGradient {
  double loss = 0.0;  // mean BCE over examples and labels
  Matrix grad_weights;
  std::vector<double> grad_bias;
};

inline std::vector<std::vector<double>> label_targets(
    const LinearMultiLabel& model, const std::vector<MultiLabelExample>& data) {
  std::vector<std::vector<double>> ys;
  ys.reserve(data.size());
  for (const auto& ex : data) {
    std::vector<double> y(model.labels().size(), 0.0);
    for (const auto& c : ex.categories) {
      const auto it = std::find(model.labels().begin(), model.labels().end(), c);
      if (it == model.labels().end()) fail(ErrorCode::UnknownLabel, c.str());
      y[static_cast<std::size_t>(it - model.labels().begin())] = 1.0;
    }
    ys.push_back(std::move(y));
  }
  return ys;
}

inline LinearLossAndGradient linear_bce_loss_and_gradient(
    const LinearMultiLabel& model, const std::vector<MultiLabelExample>& data) {
  if (data.empty()) fail(ErrorCode::InvalidArgument, "empty dataset");
  const std::size_t n = model.labels().size();
  const auto ys = label_targets(model, data);
  LinearLossAndGradient out{0.0, Matrix(n, model.weights().cols),
                            std::vector<double>(n, 0.0)};
  const double norm = 1.0 / static_cast<double>(data.size() * n);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = model.features(data[i].text);
    const auto z = model.logits_for(x);
    for (std::size_t c = 0; c < n; ++c) {
      // BCE with logits: max(z,0) - z*y + log(1 + e^{-|z|})
      out.loss += (std::max(z[c], 0.0) - z[c] * ys[i][c] +
                   std::log1p(std::exp(-std::abs(z[c])))) *
                  norm;
      const double g = (sigmoid(z[c]) - ys[i][c]) * norm;
      out.grad_bias[c] += g;
      double* row = &out.grad_weights.data[c * out.grad_weights.cols];
      for (const auto& [k, v] : x) row[k] += g * v;
    }
  }
  return out;
}

struct LinearTrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 2.0;
  std::uint64_t seed = 42;
  HashFeaturizer featurizer{};
};

struct LinearTrainResult {
  LinearMultiLabel model;
  std::vector<double> epoch_losses;  // mean BCE at the start of each epoch
};

// Full-batch gradient descent from zero weights.
inline LinearTrainResult train_linear_multilabel(const std::vector<MultiLabelExample>& data,
                                                 std::vector<FacetCategoryId> labels,
                                                 const LinearTrainConfig& cfg) {
  if (data.empty()) fail(ErrorCode::InvalidArgument, "empty training set");
  LinearTrainResult result{
      LinearMultiLabel::zeros(std::move(labels), cfg.featurizer, cfg.seed), {}};
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto lg = linear_bce_loss_and_gradient(result.model, data);
    if (!std::isfinite(lg.loss)) {
      fail(ErrorCode::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch));
    }
    result.epoch_losses.push_back(lg.loss);
    auto& w = result.model.mutable_weights().data;
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * lg.grad_weights.data[k];
    auto& b = result.model.mutable_bias();
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= cfg.learning_rate * lg.grad_bias[k];
  }
  return result;
}

}  // namespace feast

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "feast/facet_classifier.hpp"
#include "feast/metrics.hpp"
#include "support.hpp"

using namespace feast;
using namespace feast::testing;

namespace {

const char* kCatalog =
    "R0000\tfoods\tBASE\t\t\t\n"
    "A0001\twhole milk\tBASE\tR0000\t\t\n"
    "C0000\tSource\tF01\t\t\tanimal or plant origin\n"
    "C0001\tcow\tF01\tC0000\t\t\n"
    "D0000\tIngredient\tF04\t\t\tadded ingredients\n"
    "D0001\tsugar\tF04\tD0000\t\t\n"
    "E0000\tPackaging\tF28\t\t\tpacking material\n"
    "E0001\tbox\tF28\tE0000\t\t\n";

// Maps each known text to a basis vector; used to build orthogonal fixtures.
class TableProvider final : public EmbeddingProvider {
 public:
  explicit TableProvider(std::map<std::string, std::size_t> axis, std::size_t dim)
      : axis_(std::move(axis)), dim_(dim) {}
  ProviderKind kind() const override { return ProviderKind::DeterministicTest; }
  std::size_t dimension() const override { return dim_; }
  std::string id() const override { return "table"; }
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override {
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) {
      EmbeddingVector v(dim_, 0.0);
      v[axis_.at(t)] = 1.0;
      out.push_back(v);
    }
    return out;
  }

 private:
  std::map<std::string, std::size_t> axis_;
  std::size_t dim_;
};

}  // namespace

TEST(FacetClassifier, ThresholdExamples) {
  const auto tx = parse_catalog(kCatalog);
  const auto& reg = tx.category_registry();
  ASSERT_EQ(reg.size(), 3u);
  EXPECT_EQ(threshold_classify({{0.0, -5.0, 5.0}}, 0.4, reg),
            (std::vector<FacetCategoryId>{fc("F01"), fc("F28")}));
  EXPECT_TRUE(threshold_classify({{-1.0, -1.0, -1.0}}, 0.5, reg).empty());
  EXPECT_EQ(error_code_of([&] { threshold_classify({{0.0}}, 0.5, reg); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(error_code_of([&] { threshold_classify({{0, 0, 0}}, 1.0, reg); }),
            ErrorCode::InvalidArgument);
}

TEST(FacetClassifier, SigmoidIsStable) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 1e-15);
}

TEST(FacetClassifier, ThresholdChainProperty) {
  const auto tx = parse_catalog(kCatalog);
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    CategoryScores s{{rng.normal() * 2, rng.normal() * 2, rng.normal() * 2}};
    std::set<FacetCategoryId> prev;
    for (double tau : {0.4, 0.35, 0.3}) {
      const auto got = threshold_classify(s, tau, tx.category_registry());
      const std::set<FacetCategoryId> cur(got.begin(), got.end());
      ASSERT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
}

TEST(FacetClassifier, IdentityMlpPassesThrough) {
  const auto mlp = Mlp::identity(4);
  EXPECT_EQ(mlp.hidden(), 8u);
  const std::vector<double> x{0.5, -2.0, 0.0, 3.25};
  EXPECT_EQ(mlp.forward(x), x);
  std::stringstream ss;
  mlp.save(ss);
  EXPECT_EQ(Mlp::load(ss).forward(x), x);
}

TEST(FacetClassifier, BiEncoderOrthogonalFixture) {
  const auto tx = parse_catalog(kCatalog);
  const auto& reg = tx.category_registry();
  const std::string input = "sweetened";
  const std::string joined = input + std::string(kBaseTermJoin) + "whole milk";
  // The input lines up with F04's description; the others are orthogonal.
  const TableProvider p({{joined, 1},
                         {category_text(reg[0]), 0},
                         {category_text(reg[1]), 1},
                         {category_text(reg[2]), 2}},
                        3);
  const auto mlp = Mlp::identity(3);
  EXPECT_EQ(biencoder_classify(input, tc("A0001"), tx, p, mlp, 0.6),
            std::vector<FacetCategoryId>{fc("F04")});
  // sigma(0) = 0.5 sits exactly on a 0.5 threshold, so the orthogonal
  // categories are kept there.
  EXPECT_EQ(biencoder_classify(input, tc("A0001"), tx, p, mlp, 0.5).size(), 3u);
  EXPECT_EQ(biencoder_classify(input, tc("A0001"), tx, p, Mlp::zeros(3), 0.4).size(), 3u);
  EXPECT_EQ(error_code_of([&] { biencoder_classify(input, tc("Z0001"), tx, p, mlp, 0.5); }),
            ErrorCode::UnknownCode);
}

TEST(FacetClassifier, ZeroModelLossIsLog2) {
  const auto model = LinearMultiLabel::zeros({fc("F01"), fc("F04")}, {64, 1});
  const std::vector<MultiLabelExample> data{{"a b", {fc("F01")}}, {"c d", {fc("F04")}}};
  EXPECT_NEAR(linear_bce_loss_and_gradient(model, data).loss, std::log(2.0), 1e-12);
  EXPECT_EQ(error_code_of([&] { label_targets(model, {{"x", {fc("F28")}}}); }),
            ErrorCode::UnknownLabel);
}

TEST(FacetClassifier, LinearGradientMatchesFiniteDifferences) {
  Rng rng(2);
  auto model = LinearMultiLabel::zeros({fc("F01"), fc("F04"), fc("F28")}, {32, 3});
  for (double& w : model.mutable_weights().data) w = rng.normal();
  for (double& b : model.mutable_bias()) b = rng.normal();
  const std::vector<MultiLabelExample> data{
      {"milk cow fresh", {fc("F01")}}, {"sugar box", {fc("F04"), fc("F28")}}, {"plain", {}}};
  const auto g = linear_bce_loss_and_gradient(model, data);
  const double h = 1e-5;
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double orig = param;
    param = orig + h;
    const double up = linear_bce_loss_and_gradient(model, data).loss;
    param = orig - h;
    const double down = linear_bce_loss_and_gradient(model, data).loss;
    param = orig;
    const double numeric = (up - down) / (2 * h);
    if (std::abs(analytic) < 1e-8 && std::abs(numeric) < 1e-8) return;
    worst = std::max(worst, std::abs(analytic - numeric) /
                                std::max(std::abs(analytic), std::abs(numeric)));
  };
  for (std::size_t i = 0; i < g.grad_weights.data.size(); ++i) {
    check(model.mutable_weights().data[i], g.grad_weights.data[i]);
  }
  for (std::size_t i = 0; i < g.grad_bias.size(); ++i) check(model.mutable_bias()[i], g.grad_bias[i]);
  EXPECT_LT(worst, 1e-4);
}

TEST(FacetClassifier, LinearSeparableToySet) {
  const std::vector<FacetCategoryId> labels{fc("F01"), fc("F04")};
  const std::vector<MultiLabelExample> data{
      {"raw cow milk", {fc("F01")}},          {"goat milk", {fc("F01")}},
      {"sugar syrup", {fc("F04")}},           {"added sugar cake", {fc("F04")}},
      {"cow milk with sugar", {fc("F01"), fc("F04")}}, {"water", {}}};
  LinearTrainConfig cfg;
  const auto zero = train_linear_multilabel(data, labels, {0, 2.0, 42, {}});
  for (double w : zero.model.weights().data) ASSERT_EQ(w, 0.0);

  const auto r = train_linear_multilabel(data, labels, cfg);
  const auto again = train_linear_multilabel(data, labels, cfg);
  EXPECT_EQ(r.model.weights().data, again.model.weights().data);
  ASSERT_EQ(r.epoch_losses.size(), cfg.epochs);
  for (std::size_t e = cfg.epochs / 2 + 1; e < cfg.epochs; ++e) {
    EXPECT_LE(r.epoch_losses[e], r.epoch_losses[e - 1]);
  }
  std::vector<std::set<FacetCategoryId>> preds, golds;
  for (const auto& ex : data) {
    const auto p = threshold_classify(r.model.score(ex.text), 0.5,
                                      {{labels[0], "", "", 0}, {labels[1], "", "", 0}});
    preds.emplace_back(p.begin(), p.end());
    golds.emplace_back(ex.categories.begin(), ex.categories.end());
  }
  EXPECT_EQ(classification_metrics(preds, golds, labels).micro_f1, 1.0);

  std::stringstream ss;
  r.model.save(ss);
  const auto back = LinearMultiLabel::load(ss);
  EXPECT_EQ(back.labels(), labels);
  for (const auto& ex : data) {
    const auto a = r.model.score(ex.text).logits, b = back.score(ex.text).logits;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

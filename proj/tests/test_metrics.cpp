#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "feast/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace feast;
using namespace feast::testing;

namespace {

RankingRun run_of(const std::vector<TermCode>& order, std::set<TermCode> relevant) {
  RankedCandidates rc{"q", Stage::Retrieved, {}};
  double s = 1.0;
  for (const auto& c : order) rc.items.push_back({c, s -= 0.1});
  return {rc, {"q", std::move(relevant)}};
}

std::vector<TermCode> five() {
  std::vector<TermCode> v;
  for (int i = 0; i < 5; ++i) v.push_back(tc(code_for(i)));
  return v;
}

}  // namespace

TEST(Metrics, PerfectRanking) {
  const auto c = five();
  const auto r = ranking_metrics({run_of(c, {c[0]})}, {1, 3, 10});
  for (const auto& [name, v] : r.scalars) {
    if (name.rfind("Prec", 0) == 0) continue;
    EXPECT_EQ(v, 1.0) << name;
  }
  EXPECT_EQ(r.scalars.at("Prec@1"), 1.0);
}

TEST(Metrics, SingleRelevantAtRankThree) {
  const auto c = five();
  const auto r = ranking_metrics({run_of(c, {c[2]})}, {10});
  EXPECT_EQ(r.scalars.at("MRR@10"), 1.0 / 3.0);
  EXPECT_EQ(r.scalars.at("NDCG@10"), 1.0 / std::log2(4.0));
  EXPECT_EQ(r.scalars.at("NDCG@10"), 0.5);
}

TEST(Metrics, AllPermutationsMatchDefinitions) {
  auto order = five();
  const std::set<TermCode> rel{order[1], order[3]};
  std::size_t perms = 0;
  std::sort(order.begin(), order.end());
  do {
    ++perms;
    for (std::size_t k : {1u, 2u, 3u, 5u, 10u}) {
      const auto got = ranking_metrics({run_of(order, rel)}, {k}).scalars;
      const auto want = oracle::ranking_by_definition(order, rel, k);
      ASSERT_EQ(got.size(), want.size());
      for (const auto& [name, v] : want) ASSERT_NEAR(got.at(name), v, 1e-9) << name;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  EXPECT_EQ(perms, 120u);
}

TEST(Metrics, RankingInvariants) {
  Rng rng(1);
  auto codes = five();
  for (int i = 0; i < 300; ++i) {
    rng.shuffle(codes);
    std::set<TermCode> rel{codes[rng.below(5)], codes[rng.below(5)]};
    const auto r = ranking_metrics({run_of(codes, rel)}, {1, 2, 3, 4, 5}).scalars;
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto at = "@" + std::to_string(k);
      EXPECT_LE(r.at("Prec" + at), r.at("Acc" + at));
      EXPECT_LE(r.at("MRR" + at), r.at("Acc" + at));
      for (const char* m : {"Acc", "Rec", "Prec", "MRR", "NDCG", "MAP"}) {
        EXPECT_GE(r.at(m + at), 0.0);
        EXPECT_LE(r.at(m + at), 1.0 + 1e-12);
      }
      if (k > 1) {
        const auto prev = "@" + std::to_string(k - 1);
        EXPECT_GE(r.at("Rec" + at), r.at("Rec" + prev));
        EXPECT_GE(r.at("Acc" + at), r.at("Acc" + prev));
      }
    }
  }
}

TEST(Metrics, RankingErrors) {
  const auto c = five();
  EXPECT_EQ(error_code_of([&] { ranking_metrics({run_of({}, {c[0]})}, {1}); }),
            ErrorCode::EmptyRanking);
  EXPECT_EQ(error_code_of([&] { ranking_metrics({run_of(c, {})}, {1}); }),
            ErrorCode::EmptyRelevantSet);
}

TEST(Metrics, ClassificationPerfectAndEmpty) {
  const std::vector<std::string> u{"a", "b", "c"};
  const std::vector<std::set<std::string>> gold{{"a"}, {"b", "c"}, {"a", "c"}};
  const auto perfect = classification_metrics(gold, gold, u);
  EXPECT_EQ(perfect.micro_f1, 1.0);
  EXPECT_EQ(perfect.macro_f1, 1.0);
  EXPECT_EQ(perfect.exact_match, 1.0);
  const auto none = classification_metrics<std::string>({{}, {}, {}}, gold, u);
  EXPECT_EQ(none.micro_recall, 0.0);
  EXPECT_EQ(none.exact_match, 0.0);
  EXPECT_EQ(error_code_of([&] { classification_metrics<std::string>({{}}, gold, u); }),
            ErrorCode::LengthMismatch);
  EXPECT_EQ(error_code_of([&] {
              classification_metrics<std::string>({{"z"}, {}, {}}, gold, u);
            }),
            ErrorCode::UnknownLabel);
}

TEST(Metrics, ClassificationMatchesCountingOracle) {
  Rng rng(2);
  const std::vector<std::string> u{"a", "b", "c", "d", "e"};
  for (int t = 0; t < 300; ++t) {
    std::vector<std::set<std::string>> preds, golds;
    const auto n = 1 + rng.below(8);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::string> p, g;
      for (const auto& l : u) {
        if (rng.below(3) == 0) p.insert(l);
        if (rng.below(3) == 0) g.insert(l);
      }
      preds.push_back(p);
      golds.push_back(g);
    }
    const auto r = classification_metrics(preds, golds, u);
    double tp = 0, fp = 0, fn = 0, em = 0, macro = 0;
    int counted = 0;
    for (const auto& l : u) {
      double ltp = 0, lfp = 0, lfn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool p = preds[i].count(l), g = golds[i].count(l);
        ltp += p && g;
        lfp += p && !g;
        lfn += !p && g;
      }
      tp += ltp;
      fp += lfp;
      fn += lfn;
      if (ltp + lfp + lfn > 0) {
        const double P = ltp + lfp > 0 ? ltp / (ltp + lfp) : 0;
        const double R = ltp + lfn > 0 ? ltp / (ltp + lfn) : 0;
        macro += P + R > 0 ? 2 * P * R / (P + R) : 0;
        ++counted;
      }
    }
    for (std::size_t i = 0; i < n; ++i) em += preds[i] == golds[i];
    const double P = tp + fp > 0 ? tp / (tp + fp) : 0;
    const double R = tp + fn > 0 ? tp / (tp + fn) : 0;
    ASSERT_NEAR(r.micro_precision, P, 1e-12);
    ASSERT_NEAR(r.micro_recall, R, 1e-12);
    ASSERT_NEAR(r.micro_f1, P + R > 0 ? 2 * P * R / (P + R) : 0, 1e-12);
    ASSERT_NEAR(r.macro_f1, counted ? macro / counted : 0, 1e-12);
    ASSERT_NEAR(r.exact_match, em / static_cast<double>(n), 1e-12);
    // An exact match has recall 1, so EM is bounded by the per-instance
    // mean recall (micro recall pools counts and can sit below EM).
    bool all_gold_nonempty = true;
    double instance_recall = 0;
    for (std::size_t i = 0; i < n; ++i) {
      all_gold_nonempty &= !golds[i].empty();
      double hit = 0;
      for (const auto& l : golds[i]) hit += preds[i].count(l);
      instance_recall += golds[i].empty() ? 0 : hit / static_cast<double>(golds[i].size());
    }
    if (all_gold_nonempty) ASSERT_LE(r.exact_match, instance_recall / n + 1e-12);
  }
}

TEST(Metrics, ExactMatchCanExceedMicroRecall) {
  const std::vector<std::string> u{"a", "b", "c", "d", "e"};
  const auto r = classification_metrics<std::string>(
      {{"a"}, {}, {}}, {{"a"}, {"b", "c", "d"}, {"b", "c", "d", "e"}}, u);
  EXPECT_NEAR(r.exact_match, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.micro_recall, 1.0 / 8.0, 1e-15);
}

TEST(Metrics, ReportWriters) {
  const auto c = five();
  const auto r = ranking_metrics({run_of(c, {c[2]})}, {10});
  std::ostringstream table, records;
  write_report_table(r, table, "base terms");
  write_report_records(r, records, "task1");
  EXPECT_NE(table.str().find("MRR@10        33.33"), std::string::npos) << table.str();
  EXPECT_NE(records.str().find(R"({"metric":"MRR@10","scope":"task1","value":0.3333333333333333})"),
            std::string::npos)
      << records.str();
}

#pragma once

// Ranking metrics (Acc/Rec/Prec/NDCG/MRR/MAP @K) and multi-label
// classification metrics (per-class, micro, macro, exact match).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "feast/error.hpp"
#include "feast/retrieval.hpp"
#include "feast/taxonomy.hpp"

namespace feast {

struct RelevanceJudgment {
  std::string query_id;
  std::set<TermCode> relevant;
};

struct RankingRun {
  RankedCandidates ranking;
  RelevanceJudgment judgment;
};

struct ClassStats {
  std::string label;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support = 0;  // tp + fn
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::size_t instances = 0;
  // Ranking metrics keyed "Acc@1", "NDCG@10", ...
  std::map<std::string, double> scalars;
  std::vector<ClassStats> per_class;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double exact_match = 0.0;
};

inline double f1_score(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline double dcg_discount(std::size_t rank) {
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

inline EvalReport ranking_metrics(const std::vector<RankingRun>& runs,
                                  const std::vector<std::size_t>& ks) {
  if (runs.empty()) fail(ErrorCode::InvalidArgument, "no runs to evaluate");
  EvalReport report;
  report.instances = runs.size();
  for (std::size_t k : ks) {
    if (k == 0) fail(ErrorCode::InvalidArgument, "K must be positive");
  }
  std::map<std::string, double> sums;
  for (const auto& run : runs) {
    const auto& items = run.ranking.items;
    const auto& rel = run.judgment.relevant;
    if (items.empty()) fail(ErrorCode::EmptyRanking, "query " + run.judgment.query_id);
    if (rel.empty()) fail(ErrorCode::EmptyRelevantSet, "query " + run.judgment.query_id);
    for (std::size_t k : ks) {
      const std::size_t depth = std::min(k, items.size());
      std::size_t hits = 0;
      double first_rr = 0.0;
      double dcg = 0.0;
      double ap = 0.0;
      for (std::size_t i = 0; i < depth; ++i) {
        if (!rel.count(items[i].code)) continue;
        ++hits;
        const std::size_t rank = i + 1;
        if (first_rr == 0.0) first_rr = 1.0 / static_cast<double>(rank);
        dcg += dcg_discount(rank);
        ap += static_cast<double>(hits) / static_cast<double>(rank);
      }
      const std::size_t ideal = std::min(rel.size(), k);
      double idcg = 0.0;
      for (std::size_t r = 1; r <= ideal; ++r) idcg += dcg_discount(r);
      const std::string at = "@" + std::to_string(k);
      sums["Acc" + at] += hits > 0 ? 1.0 : 0.0;
      sums["Rec" + at] += static_cast<double>(hits) / static_cast<double>(rel.size());
      sums["Prec" + at] += static_cast<double>(hits) / static_cast<double>(k);
      sums["MRR" + at] += first_rr;
      sums["NDCG" + at] += dcg / idcg;
      sums["MAP" + at] += ap / static_cast<double>(ideal);
    }
  }
  for (const auto& [name, s] : sums) {
    report.scalars[name] = s / static_cast<double>(runs.size());
  }
  return report;
}

// --- classification ---------------------------------------------------------------

inline std::string label_string(const std::string& s) { return s; }
inline std::string label_string(const TermCode& c) { return c.str(); }
inline std::string label_string(const FacetCategoryId& c) { return c.str(); }
inline std::string label_string(const FacetGroup& g) {
  return g.category.str() + "." + g.descriptor.str();
}

// Labels absent from both gold and predictions are left out of the macro
// averages.
template <class Label>
EvalReport classification_metrics(const std::vector<std::set<Label>>& preds,
                                  const std::vector<std::set<Label>>& golds,
                                  const std::vector<Label>& universe) {
  if (preds.size() != golds.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                        std::to_string(golds.size()) + " gold sets");
  }
  if (preds.empty()) fail(ErrorCode::InvalidArgument, "no instances to evaluate");
  std::map<Label, ClassStats> stats;
  for (const auto& l : universe) stats[l].label = label_string(l);

  std::size_t exact = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (const auto& l : preds[i]) {
      const auto it = stats.find(l);
      if (it == stats.end()) fail(ErrorCode::UnknownLabel, label_string(l));
      if (golds[i].count(l)) {
        ++it->second.tp;
      } else {
        ++it->second.fp;
      }
    }
    for (const auto& l : golds[i]) {
      const auto it = stats.find(l);
      if (it == stats.end()) fail(ErrorCode::UnknownLabel, label_string(l));
      if (!preds[i].count(l)) ++it->second.fn;
    }
    if (preds[i] == golds[i]) ++exact;
  }

  EvalReport report;
  report.instances = preds.size();
  std::size_t tp = 0, fp = 0, fn = 0, counted = 0;
  for (auto& [label, s] : stats) {
    s.support = s.tp + s.fn;
    s.precision = (s.tp + s.fp) ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
    s.recall = s.support ? static_cast<double>(s.tp) / static_cast<double>(s.support) : 0.0;
    s.f1 = f1_score(s.precision, s.recall);
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
    if (s.support > 0 || s.tp + s.fp > 0) {
      report.macro_precision += s.precision;
      report.macro_recall += s.recall;
      report.macro_f1 += s.f1;
      ++counted;
    }
    report.per_class.push_back(s);
  }
  if (counted) {
    report.macro_precision /= static_cast<double>(counted);
    report.macro_recall /= static_cast<double>(counted);
    report.macro_f1 /= static_cast<double>(counted);
  }
  report.micro_precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  report.micro_recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  report.micro_f1 = f1_score(report.micro_precision, report.micro_recall);
  report.exact_match = static_cast<double>(exact) / static_cast<double>(preds.size());
  return report;
}

// --- report output ------------------------------------------------------------------

inline void write_report_table(const EvalReport& r, std::ostream& out,
                               const std::string& title = "") {
  char buf[160];
  if (!title.empty()) out << "== " << title << " ==\n";
  out << "instances: " << r.instances << '\n';
  if (!r.scalars.empty()) {
    for (const auto& [name, v] : r.scalars) {
      std::snprintf(buf, sizeof buf, "%-10s %8.2f\n", name.c_str(), 100.0 * v);
      out << buf;
    }
  }
  if (!r.per_class.empty()) {
    std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %8s\n", "label", "precision",
                  "recall", "f1", "support");
    out << buf;
    for (const auto& s : r.per_class) {
      std::snprintf(buf, sizeof buf, "%-12s %9.4f %9.4f %9.4f %8zu\n", s.label.c_str(),
                    s.precision, s.recall, s.f1, s.support);
      out << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "micro P/R/F1 %.4f %.4f %.4f\nmacro P/R/F1 %.4f %.4f %.4f\nexact match  %.4f\n",
                  r.micro_precision, r.micro_recall, r.micro_f1, r.macro_precision,
                  r.macro_recall, r.macro_f1, r.exact_match);
    out << buf;
  }
}

// One JSON object per line: {"metric": ..., "value": ...} and per-class rows.
inline void write_report_records(const EvalReport& r, std::ostream& out,
                                 const std::string& scope = "") {
  using nlohmann::json;
  auto emit = [&](json j) {
    if (!scope.empty()) j["scope"] = scope;
    out << j.dump() << '\n';
  };
  for (const auto& [name, v] : r.scalars) emit({{"metric", name}, {"value", v}});
  if (r.per_class.empty()) return;
  for (const auto& s : r.per_class) {
    emit({{"label", s.label},
          {"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"support", s.support}});
  }
  emit({{"metric", "micro_precision"}, {"value", r.micro_precision}});
  emit({{"metric", "micro_recall"}, {"value", r.micro_recall}});
  emit({{"metric", "micro_f1"}, {"value", r.micro_f1}});
  emit({{"metric", "macro_precision"}, {"value", r.macro_precision}});
  emit({{"metric", "macro_recall"}, {"value", r.macro_recall}});
  emit({{"metric", "macro_f1"}, {"value", r.macro_f1}});
  emit({{"metric", "exact_match"}, {"value", r.exact_match}});
}

}  // namespace feast

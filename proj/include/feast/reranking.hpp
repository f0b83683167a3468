#pragma once

// Second-stage scoring of retrieved candidates and confidence filtering.

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "feast/error.hpp"
#include "feast/negative_mining.hpp"
#include "feast/retrieval.hpp"
#include "feast/text.hpp"

namespace feast {

enum class ScorerKind { RemoteCrossEncoder, LexicalBaseline };

// Relevance of (query, candidate context) pairs, each in [0, 1].
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual ScorerKind kind() const = 0;
  virtual std::vector<double> score_batch(
      const std::string& query, const std::vector<std::string>& contexts) const = 0;
};

// Token-set Jaccard overlap. Two token-free strings count as identical.
inline double jaccard(const std::string& a, const std::string& b) {
  const auto ta = text::tokenize(a);
  const auto tb = text::tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) /
         static_cast<double>(sa.size() + sb.size() - inter);
}

class LexicalScorer final : public PairScorer {
 public:
  ScorerKind kind() const override { return ScorerKind::LexicalBaseline; }
  std::vector<double> score_batch(
      const std::string& query,
      const std::vector<std::string>& contexts) const override {
    std::vector<double> out;
    out.reserve(contexts.size());
    for (const auto& c : contexts) out.push_back(jaccard(query, c));
    return out;
  }
};

inline std::vector<double> score_pairs(const PairScorer& scorer,
                                       const std::string& query,
                                       const std::vector<std::string>& contexts) {
  if (contexts.empty()) fail(ErrorCode::InvalidArgument, "no candidates to score");
  auto scores = scorer.score_batch(query, contexts);
  if (scores.size() != contexts.size()) {
    fail(ErrorCode::LengthMismatch, "scorer returned " + std::to_string(scores.size()) +
                                        " scores for " +
                                        std::to_string(contexts.size()) + " candidates");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      fail(ErrorCode::InvalidArgument, "pair score outside [0,1]: " + std::to_string(s));
    }
  }
  return scores;
}

// Re-sorts by scorer score (stable on input order) and drops scores < tau.
// Retrieval scores play no part in the new order.
inline RankedCandidates rerank_and_filter(const PairScorer& scorer,
                                          const std::string& query,
                                          const RankedCandidates& retrieved,
                                          const VectorIndex& index, double tau) {
  if (retrieved.stage != Stage::Retrieved) {
    fail(ErrorCode::InvalidArgument, "rerank expects retrieved candidates");
  }
  RankedCandidates out{retrieved.query_id, Stage::Reranked, {}};
  if (retrieved.items.empty()) return out;
  std::vector<std::string> contexts;
  contexts.reserve(retrieved.items.size());
  for (const auto& it : retrieved.items) contexts.push_back(index.entry(it.code).context);
  const auto scores = score_pairs(scorer, query, contexts);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (std::size_t i : order) {
    if (scores[i] >= tau) out.items.push_back({retrieved.items[i].code, scores[i]});
  }
  return out;
}

// --- training-pair export for an external cross-encoder trainer ---------------------

struct LabeledPair {
  std::string query;
  std::string candidate_context;
  int label;  // 1 = gold, 0 = mined negative
};

// The gold candidate plus its taxonomy hard negatives within `hierarchy`.
inline std::vector<LabeledPair> mined_pairs(const std::string& query,
                                            const TermCode& gold,
                                            std::string_view hierarchy,
                                            const Taxonomy& tx,
                                            const MiningConfig& cfg) {
  std::vector<LabeledPair> out;
  const std::size_t g = tx.index_of(hierarchy, gold);
  out.push_back({query, node_context(tx, g), 1});
  for (const auto& n : mine_hard_negatives_index(g, cfg, tx).negatives) {
    out.push_back({query, node_context(tx, tx.index_of(hierarchy, n.code)), 0});
  }
  return out;
}

// query<TAB>candidate_context<TAB>label
inline void write_pairs(const std::vector<LabeledPair>& pairs, std::ostream& out) {
  for (const auto& p : pairs) {
    out << text::sanitize_field(p.query) << '\t'
        << text::sanitize_field(p.candidate_context) << '\t' << p.label << '\n';
  }
}

}  // namespace feast

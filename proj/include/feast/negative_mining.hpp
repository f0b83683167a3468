#pragma once

// Taxonomy-based hard negatives. Every sibling of the target is taken first;
// remaining slots are drawn without replacement with probability proportional
// to
//
//   score(t, v) = (1 + |F(t) ∩ F(v)|) / (1 + hop(t, v))
//
// where F is the implicit-facet set and hop the LCA-based tree distance.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "feast/error.hpp"
#include "feast/random.hpp"
#include "feast/taxonomy.hpp"

namespace feast {

enum class PoolPolicy { SameHierarchy };

struct MiningConfig {
  std::size_t n_negatives = 10;
  std::uint64_t rng_seed = 42;
  PoolPolicy pool_policy = PoolPolicy::SameHierarchy;
};

enum class Provenance { Sibling, Sampled };

inline std::string_view to_string(Provenance p) {
  return p == Provenance::Sibling ? "SIBLING" : "SAMPLED";
}

struct HardNegative {
  TermCode code;
  Provenance provenance;
  double score;
};

struct HardNegativeSet {
  TermCode target;
  std::vector<HardNegative> negatives;
  // Set when the eligible candidates could not fill n_negatives slots.
  bool insufficient_pool = false;
};

// Sorted-merge count over two sorted facet lists.
inline std::size_t facet_overlap_sorted(const std::vector<FacetGroup>& a,
                                        const std::vector<FacetGroup>& b) {
  std::size_t i = 0, j = 0, count = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

inline std::size_t facet_overlap(const TermCode& t, const TermCode& v,
                                 const Taxonomy& tx) {
  return facet_overlap_sorted(tx.implicit_facets(t), tx.implicit_facets(v));
}

inline double candidate_score_index(std::size_t t, std::size_t v,
                                    const Taxonomy& tx) {
  if (t == v) fail(ErrorCode::SameNode, tx.node_at(t).code.str());
  const auto overlap = facet_overlap_sorted(tx.node_at(t).implicit_facets,
                                            tx.node_at(v).implicit_facets);
  const int hop = tx.hop_distance_index(t, v);
  return static_cast<double>(1 + overlap) / static_cast<double>(1 + hop);
}

inline double candidate_score(const TermCode& t, const TermCode& v,
                              const Taxonomy& tx) {
  if (t == v) fail(ErrorCode::SameNode, t.str());
  const auto [a, b] = tx.resolve_pair(t, v);
  return candidate_score_index(a, b, tx);
}

// Normalized scores over `pool` (which must not contain t).
inline std::map<TermCode, double> sampling_distribution(
    const TermCode& t, const std::vector<TermCode>& pool, const Taxonomy& tx) {
  if (pool.empty()) fail(ErrorCode::EmptyPool, "no candidates for " + t.str());
  std::map<TermCode, double> dist;
  double total = 0.0;
  for (const auto& v : pool) {
    const double s = candidate_score(t, v, tx);
    dist[v] = s;
    total += s;
  }
  for (auto& [code, p] : dist) p /= total;
  return dist;
}

// Same-hierarchy nodes excluding the target, its ancestors and its siblings.
inline std::vector<std::size_t> sampling_pool(std::size_t t, const Taxonomy& tx) {
  const auto& h = tx.hierarchy(tx.node_at(t).hierarchy);
  std::vector<char> excluded(tx.size(), 0);
  excluded[t] = 1;
  for (std::size_t a : tx.ancestor_indices(t)) excluded[a] = 1;
  for (std::size_t s : tx.sibling_indices(t)) excluded[s] = 1;
  std::vector<std::size_t> pool;
  for (std::size_t i : h.members) {
    if (!excluded[i]) pool.push_back(i);
  }
  return pool;
}

inline HardNegativeSet mine_hard_negatives_index(std::size_t t,
                                                 const MiningConfig& cfg,
                                                 const Taxonomy& tx) {
  if (cfg.n_negatives < 1) {
    fail(ErrorCode::InvalidArgument, "n_negatives must be at least 1");
  }
  const auto& target = tx.node_at(t);
  HardNegativeSet out{target.code, {}, false};

  struct Scored {
    std::size_t index;
    double score;
  };
  std::vector<Scored> siblings;
  for (std::size_t s : tx.sibling_indices(t)) {
    siblings.push_back({s, candidate_score_index(t, s, tx)});
  }
  std::sort(siblings.begin(), siblings.end(), [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return tx.node_at(a.index).code < tx.node_at(b.index).code;
  });
  if (siblings.size() > cfg.n_negatives) {
    siblings.erase(siblings.begin() + static_cast<std::ptrdiff_t>(cfg.n_negatives),
                   siblings.end());
  }
  for (const auto& s : siblings) {
    out.negatives.push_back({tx.node_at(s.index).code, Provenance::Sibling, s.score});
  }

  const std::size_t remaining = cfg.n_negatives - out.negatives.size();
  if (remaining == 0) return out;

  std::vector<Scored> pool;
  for (std::size_t v : sampling_pool(t, tx)) {
    pool.push_back({v, candidate_score_index(t, v, tx)});
  }
  if (pool.size() < remaining) out.insufficient_pool = true;

  // Sequential draws, renormalizing over what is left after each pick.
  Rng rng = Rng::derive(cfg.rng_seed, target.hierarchy + ":" + target.code.str());
  const std::size_t draws = std::min(remaining, pool.size());
  for (std::size_t k = 0; k < draws; ++k) {
    double total = 0.0;
    for (const auto& c : pool) total += c.score;
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = pool.size() - 1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      acc += pool[i].score;
      if (u < acc) {
        pick = i;
        break;
      }
    }
    out.negatives.push_back(
        {tx.node_at(pool[pick].index).code, Provenance::Sampled, pool[pick].score});
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

inline HardNegativeSet mine_hard_negatives(const TermCode& t,
                                           const MiningConfig& cfg,
                                           const Taxonomy& tx) {
  return mine_hard_negatives_index(tx.index_of(t), cfg, tx);
}

inline HardNegativeSet mine_hard_negatives(std::string_view hierarchy,
                                           const TermCode& t,
                                           const MiningConfig& cfg,
                                           const Taxonomy& tx) {
  return mine_hard_negatives_index(tx.index_of(hierarchy, t), cfg, tx);
}

// target<TAB>negative<TAB>provenance<TAB>score
inline void write_negative_set(const HardNegativeSet& set, std::ostream& out) {
  const auto precision = out.precision(17);
  for (const auto& n : set.negatives) {
    out << set.target << '\t' << n.code << '\t' << to_string(n.provenance)
        << '\t' << n.score << '\n';
  }
  out.precision(precision);
}

}  // namespace feast

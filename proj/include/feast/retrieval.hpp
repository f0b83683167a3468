#pragma once

// Exact cosine top-k over an embedded corpus (base terms, or the descriptors
// of one facet category).

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "feast/embedding.hpp"
#include "feast/error.hpp"
#include "feast/taxonomy.hpp"
#include "feast/text.hpp"

namespace feast {

enum class Stage { Retrieved, Reranked };

struct ScoredCode {
  TermCode code;
  double score;

  friend bool operator==(const ScoredCode&, const ScoredCode&) = default;
};

// Scores are non-increasing; codes unique.
struct RankedCandidates {
  std::string query_id;
  Stage stage = Stage::Retrieved;
  std::vector<ScoredCode> items;
};

struct IndexEntry {
  TermCode code;
  EmbeddingVector vector;  // unit length
  std::string context;
};

class VectorIndex {
 public:
  VectorIndex(HierarchyId tag, std::size_t dimension)
      : tag_(std::move(tag)), dimension_(dimension) {}

  void add(IndexEntry entry) {
    if (entry.vector.size() != dimension_) {
      fail(ErrorCode::DimensionMismatch, "index entry " + entry.code.str());
    }
    if (!positions_.emplace(entry.code, entries_.size()).second) {
      fail(ErrorCode::InvalidArgument, "duplicate index entry " + entry.code.str());
    }
    entries_.push_back(std::move(entry));
  }

  const HierarchyId& tag() const noexcept { return tag_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<IndexEntry>& entries() const noexcept { return entries_; }

  const IndexEntry& entry(const TermCode& code) const {
    const auto it = positions_.find(code);
    if (it == positions_.end()) {
      fail(ErrorCode::UnknownCode, code.str() + " not in index " + tag_);
    }
    return entries_[it->second];
  }
  bool contains(const TermCode& code) const { return positions_.count(code) > 0; }

 private:
  HierarchyId tag_;
  std::size_t dimension_;
  std::vector<IndexEntry> entries_;
  std::unordered_map<TermCode, std::size_t> positions_;
};

// "name / description / root name / ... / parent name", empty parts skipped.
inline std::string node_context(const Taxonomy& tx, std::size_t i) {
  const auto& n = tx.node_at(i);
  std::vector<std::string> parts;
  auto push = [&](const std::string& s) {
    const auto t = text::collapse_whitespace(s);
    if (!t.empty()) parts.push_back(t);
  };
  push(n.name);
  push(n.description);
  for (std::size_t a : tx.ancestor_indices(i)) push(tx.node_at(a).name);
  return text::join(parts, " / ");
}

inline VectorIndex build_index(const Taxonomy& tx, std::string_view hierarchy,
                               const EmbeddingProvider& provider,
                               bool include_root = false) {
  const auto& h = tx.hierarchy(hierarchy);
  std::vector<std::size_t> members;
  for (std::size_t i : h.members) {
    if (include_root || i != h.root) members.push_back(i);
  }
  if (members.empty()) {
    fail(ErrorCode::EmptyHierarchy, "nothing to index in " + std::string(hierarchy));
  }
  std::vector<std::string> contexts;
  contexts.reserve(members.size());
  for (std::size_t i : members) contexts.push_back(node_context(tx, i));
  const auto vectors = embed(provider, contexts);
  VectorIndex index(std::string(hierarchy), provider.dimension());
  for (std::size_t k = 0; k < members.size(); ++k) {
    index.add({tx.node_at(members[k]).code, normalized(vectors[k]), contexts[k]});
  }
  return index;
}

// Score descending, then code ascending.
inline bool ranks_before(const ScoredCode& a, const ScoredCode& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.code < b.code;
}

// A zero query vector (no tokens) scores every entry 0.
inline RankedCandidates top_k_vector(const VectorIndex& index,
                                     const EmbeddingVector& query, std::size_t k,
                                     std::string query_id = {}) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  if (index.empty()) fail(ErrorCode::EmptyIndex, "index " + index.tag() + " is empty");
  if (query.size() != index.dimension()) {
    fail(ErrorCode::DimensionMismatch, "query dimension " +
                                           std::to_string(query.size()) +
                                           " vs index " +
                                           std::to_string(index.dimension()));
  }
  const double norm = l2_norm(query);
  std::vector<ScoredCode> scored;
  scored.reserve(index.size());
  for (const auto& e : index.entries()) {
    const double s = norm == 0.0 ? 0.0 : std::clamp(dot(e.vector, query) / norm, -1.0, 1.0);
    scored.push_back({e.code, s});
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), ranks_before);
  scored.erase(scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end());
  return RankedCandidates{std::move(query_id), Stage::Retrieved, std::move(scored)};
}

inline RankedCandidates top_k(const VectorIndex& index, const std::string& query_text,
                              std::size_t k, const EmbeddingProvider& provider) {
  if (provider.dimension() != index.dimension()) {
    fail(ErrorCode::DimensionMismatch, "provider does not match index");
  }
  return top_k_vector(index, embed_one(provider, query_text), k, query_text);
}

// --- persistence -------------------------------------------------------------------

namespace base64 {

inline constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

inline std::vector<std::uint8_t> decode(std::string_view s) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (s.size() % 4 != 0) fail(ErrorCode::Io, "bad base64 length");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < s.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      if (s[i + k] == '=' && i + 4 == s.size() && k >= 2) {
        v[k] = 0;
        ++pad;
      } else {
        v[k] = value(s[i + k]);
        if (v[k] < 0 || pad) fail(ErrorCode::Io, "bad base64 character");
      }
    }
    const std::uint32_t n = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((n >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n & 0xff));
  }
  return out;
}

}  // namespace base64

inline std::string encode_vector_f32(const EmbeddingVector& v) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(v.size() * 4);
  for (double x : v) {
    const float f = static_cast<float>(x);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  return base64::encode(bytes);
}

inline EmbeddingVector decode_vector_f32(std::string_view s) {
  const auto bytes = base64::decode(s);
  if (bytes.size() % 4 != 0) fail(ErrorCode::Io, "vector byte count not a multiple of 4");
  EmbeddingVector v;
  v.reserve(bytes.size() / 4);
  for (std::size_t i = 0; i < bytes.size(); i += 4) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t{bytes[i + b]} << (8 * b);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    v.push_back(f);
  }
  return v;
}

// Header "dimension<TAB>tag<TAB>count", then "code<TAB>base64 f32 LE<TAB>context".
inline void save_index(const VectorIndex& index, std::ostream& out) {
  out << index.dimension() << '\t' << index.tag() << '\t' << index.size() << '\n';
  for (const auto& e : index.entries()) {
    out << e.code << '\t' << encode_vector_f32(e.vector) << '\t'
        << text::sanitize_field(e.context) << '\n';
  }
}

inline VectorIndex load_index(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Io, "empty index file");
  const auto header = text::split(line, '\t');
  if (header.size() != 3) fail(ErrorCode::Io, "bad index header");
  std::size_t dim = 0, count = 0;
  try {
    dim = std::stoul(header[0]);
    count = std::stoul(header[2]);
  } catch (const std::exception&) {
    fail(ErrorCode::Io, "bad index header numbers");
  }
  VectorIndex index(header[1], dim);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) fail(ErrorCode::Io, "index truncated");
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3 || !TermCode::is_valid(cols[0])) {
      fail(ErrorCode::Io, "bad index entry at line " + std::to_string(i + 2));
    }
    index.add({TermCode::parse(cols[0]), decode_vector_f32(cols[1]), cols[2]});
  }
  return index;
}

inline void save_index(const VectorIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  save_index(index, out);
}

inline VectorIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  return load_index(in);
}

}  // namespace feast

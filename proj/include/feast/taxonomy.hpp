#pragma once

// FoodEx2 catalog as a forest of coded hierarchies: one base-term hierarchy
// ("BASE") plus one hierarchy per facet category ("F01".."F28"). The root of a
// facet hierarchy carries the category's own name and description; its
// descendants are the category's descriptors.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "feast/error.hpp"
#include "feast/text.hpp"

namespace feast {

// Five-character FoodEx2 term code, `[A-Z][0-9A-Z]{4}`.
class TermCode {
 public:
  static bool is_valid(std::string_view s) {
    if (s.size() != 5) return false;
    if (s[0] < 'A' || s[0] > 'Z') return false;
    for (std::size_t i = 1; i < 5; ++i) {
      const char c = s[i];
      if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) return false;
    }
    return true;
  }

  static TermCode parse(std::string_view s) {
    if (!is_valid(s)) {
      fail(ErrorCode::InvalidArgument,
           "not a term code: '" + std::string(s) + "'");
    }
    return TermCode(std::string(s));
  }

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const TermCode&, const TermCode&) = default;
  friend std::ostream& operator<<(std::ostream& os, const TermCode& c) {
    return os << c.value_;
  }

 private:
  explicit TermCode(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

// Facet category identifier "F01".."F28".
class FacetCategoryId {
 public:
  static constexpr int kMaxCategory = 28;

  static bool is_valid(std::string_view s) {
    if (s.size() != 3 || s[0] != 'F') return false;
    if (s[1] < '0' || s[1] > '9' || s[2] < '0' || s[2] > '9') return false;
    const int n = (s[1] - '0') * 10 + (s[2] - '0');
    return n >= 1 && n <= kMaxCategory;
  }

  static FacetCategoryId parse(std::string_view s) {
    if (!is_valid(s)) {
      fail(ErrorCode::InvalidArgument,
           "not a facet category id: '" + std::string(s) + "'");
    }
    return FacetCategoryId(std::string(s));
  }

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const FacetCategoryId&,
                          const FacetCategoryId&) = default;
  friend std::ostream& operator<<(std::ostream& os, const FacetCategoryId& c) {
    return os << c.value_;
  }

 private:
  explicit FacetCategoryId(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

// (category, descriptor) pair; used both for code facets and for implicit
// facets stored in the catalog.
struct FacetGroup {
  FacetCategoryId category;
  TermCode descriptor;

  friend auto operator<=>(const FacetGroup&, const FacetGroup&) = default;
};

using HierarchyId = std::string;
inline const HierarchyId kBaseHierarchy = "BASE";

inline bool is_valid_hierarchy(std::string_view h) {
  return h == kBaseHierarchy || FacetCategoryId::is_valid(h);
}

struct TaxonomyNode {
  TermCode code;
  std::string name;
  HierarchyId hierarchy;
  std::optional<TermCode> parent;
  int depth = 0;
  std::vector<FacetGroup> implicit_facets;  // sorted, unique
  std::string description;
};

struct FacetCategory {
  FacetCategoryId id;
  std::string name;
  std::string description;
  std::size_t descriptor_count = 0;
};

}  // namespace feast

template <>
struct std::hash<feast::TermCode> {
  std::size_t operator()(const feast::TermCode& c) const noexcept {
    return std::hash<std::string>{}(c.str());
  }
};

namespace feast {

// One catalog line before validation. `line` is 1-based in the source file.
struct CatalogRecord {
  std::string code;
  std::string name;
  std::string hierarchy;
  std::string parent_code;
  std::string implicit_facets;
  std::string description;
  std::size_t line = 0;
};

inline constexpr std::string_view kCatalogHeader =
    "code\tname\thierarchy\tparent_code\timplicit_facets\tdescription";

class Taxonomy {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  struct Hierarchy {
    HierarchyId id;
    std::size_t root = npos;
    std::vector<std::size_t> members;  // catalog order
  };

  // Validates and indexes a record list. Checks run in this order:
  // malformed fields, dangling parents, cycles, root count, implicit facets.
  static Taxonomy from_records(const std::vector<CatalogRecord>& records) {
    Taxonomy tx;
    tx.build(records);
    return tx;
  }

  // --- node access -------------------------------------------------------

  std::size_t size() const noexcept { return nodes_.size(); }
  const TaxonomyNode& node_at(std::size_t i) const { return nodes_.at(i); }
  const std::vector<TaxonomyNode>& nodes() const noexcept { return nodes_; }

  bool contains(const TermCode& code) const {
    return by_code_.find(code) != by_code_.end();
  }
  bool contains(std::string_view hierarchy, const TermCode& code) const {
    return by_key_.find(key(hierarchy, code.str())) != by_key_.end();
  }

  // First occurrence of `code` in catalog order.
  std::size_t index_of(const TermCode& code) const {
    const auto it = by_code_.find(code);
    if (it == by_code_.end()) fail(ErrorCode::UnknownCode, code.str());
    return it->second.front();
  }

  std::size_t index_of(std::string_view hierarchy, const TermCode& code) const {
    const auto it = by_key_.find(key(hierarchy, code.str()));
    if (it == by_key_.end()) {
      fail(ErrorCode::UnknownCode,
           code.str() + " in hierarchy " + std::string(hierarchy));
    }
    return it->second;
  }

  const TaxonomyNode& node(const TermCode& code) const {
    return nodes_[index_of(code)];
  }
  const TaxonomyNode& node(std::string_view hierarchy,
                           const TermCode& code) const {
    return nodes_[index_of(hierarchy, code)];
  }

  std::size_t parent_index(std::size_t i) const { return parent_.at(i); }
  const std::vector<std::size_t>& child_indices(std::size_t i) const {
    return children_.at(i);
  }
  int depth(std::size_t i) const { return nodes_.at(i).depth; }

  // --- hierarchies ---------------------------------------------------------

  const std::vector<Hierarchy>& hierarchies() const noexcept {
    return hierarchies_;
  }

  bool has_hierarchy(std::string_view id) const {
    return hierarchy_pos_.find(std::string(id)) != hierarchy_pos_.end();
  }

  const Hierarchy& hierarchy(std::string_view id) const {
    const auto it = hierarchy_pos_.find(std::string(id));
    if (it == hierarchy_pos_.end()) {
      fail(ErrorCode::InvalidArgument, "unknown hierarchy " + std::string(id));
    }
    return hierarchies_[it->second];
  }

  // Facet categories in ascending id order.
  const std::vector<FacetCategory>& category_registry() const noexcept {
    return registry_;
  }

  std::optional<std::size_t> category_position(
      const FacetCategoryId& id) const {
    for (std::size_t i = 0; i < registry_.size(); ++i) {
      if (registry_[i].id == id) return i;
    }
    return std::nullopt;
  }

  // --- structural queries ------------------------------------------------

  std::size_t lca_index(std::size_t a, std::size_t b) const {
    if (nodes_.at(a).hierarchy != nodes_.at(b).hierarchy) {
      fail(ErrorCode::DifferentHierarchies,
           nodes_[a].code.str() + " vs " + nodes_[b].code.str());
    }
    while (nodes_[a].depth > nodes_[b].depth) a = parent_[a];
    while (nodes_[b].depth > nodes_[a].depth) b = parent_[b];
    while (a != b) {
      a = parent_[a];
      b = parent_[b];
    }
    return a;
  }

  int hop_distance_index(std::size_t a, std::size_t b) const {
    const std::size_t z = lca_index(a, b);
    return (nodes_[a].depth - nodes_[z].depth) +
           (nodes_[b].depth - nodes_[z].depth);
  }

  // Codes may appear in several hierarchies (a base term can also be a
  // descriptor). Pair queries resolve to the first hierarchy, in catalog
  // order, that holds both codes.
  std::pair<std::size_t, std::size_t> resolve_pair(const TermCode& t,
                                                   const TermCode& v) const {
    const auto it = by_code_.find(t);
    if (it == by_code_.end()) fail(ErrorCode::UnknownCode, t.str());
    const auto jt = by_code_.find(v);
    if (jt == by_code_.end()) fail(ErrorCode::UnknownCode, v.str());
    for (const auto& h : hierarchies_) {
      const auto a = by_key_.find(key(h.id, t.str()));
      const auto b = by_key_.find(key(h.id, v.str()));
      if (a != by_key_.end() && b != by_key_.end()) {
        return {a->second, b->second};
      }
    }
    fail(ErrorCode::DifferentHierarchies, t.str() + " vs " + v.str());
  }

  TermCode lca(const TermCode& t, const TermCode& v) const {
    const auto [a, b] = resolve_pair(t, v);
    return nodes_[lca_index(a, b)].code;
  }

  TermCode lca(std::string_view hierarchy, const TermCode& t,
               const TermCode& v) const {
    return nodes_[lca_index(index_of(hierarchy, t), index_of(hierarchy, v))]
        .code;
  }

  int hop_distance(const TermCode& t, const TermCode& v) const {
    const auto [a, b] = resolve_pair(t, v);
    return hop_distance_index(a, b);
  }

  int hop_distance(std::string_view hierarchy, const TermCode& t,
                   const TermCode& v) const {
    return hop_distance_index(index_of(hierarchy, t), index_of(hierarchy, v));
  }

  // Other children of the parent; empty for roots.
  std::vector<std::size_t> sibling_indices(std::size_t i) const {
    std::vector<std::size_t> out;
    const std::size_t p = parent_.at(i);
    if (p == npos) return out;
    for (std::size_t c : children_[p]) {
      if (c != i) out.push_back(c);
    }
    return out;
  }

  // Sorted by code.
  std::vector<TermCode> siblings(const TermCode& t) const {
    return codes_of(sibling_indices(index_of(t)));
  }
  std::vector<TermCode> siblings(std::string_view hierarchy,
                                 const TermCode& t) const {
    return codes_of(sibling_indices(index_of(hierarchy, t)));
  }

  const std::vector<FacetGroup>& implicit_facets(const TermCode& t) const {
    return nodes_[index_of(t)].implicit_facets;
  }

  // Root first, `i` excluded.
  std::vector<std::size_t> ancestor_indices(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t p = parent_.at(i); p != npos; p = parent_[p]) {
      out.push_back(p);
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  static std::string key(std::string_view hierarchy, std::string_view code) {
    std::string k(hierarchy);
    k.push_back('\t');
    k.append(code);
    return k;
  }

  std::vector<TermCode> codes_of(const std::vector<std::size_t>& idx) const {
    std::vector<TermCode> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(nodes_[i].code);
    std::sort(out.begin(), out.end());
    return out;
  }

  static std::string where(const CatalogRecord& r) {
    return "line " + std::to_string(r.line) + " (code '" + r.code + "')";
  }

  static std::vector<FacetGroup> parse_implicit(const CatalogRecord& r) {
    std::vector<FacetGroup> out;
    const auto field = text::trim(r.implicit_facets);
    if (field.empty()) return out;
    for (const auto& raw : text::split(field, ';')) {
      const auto item = text::trim(raw);
      const auto dot = item.find('.');
      if (dot == std::string_view::npos ||
          !FacetCategoryId::is_valid(item.substr(0, dot)) ||
          !TermCode::is_valid(item.substr(dot + 1))) {
        fail(ErrorCode::MalformedRecord,
             where(r) + ": bad implicit facet '" + std::string(item) + "'");
      }
      out.push_back({FacetCategoryId::parse(item.substr(0, dot)),
                     TermCode::parse(item.substr(dot + 1))});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void build(const std::vector<CatalogRecord>& records) {
    nodes_.reserve(records.size());
    for (const auto& r : records) {
      if (!TermCode::is_valid(r.code)) {
        fail(ErrorCode::MalformedRecord, where(r) + ": bad term code");
      }
      if (!is_valid_hierarchy(r.hierarchy)) {
        fail(ErrorCode::MalformedRecord,
             where(r) + ": bad hierarchy '" + r.hierarchy + "'");
      }
      if (!r.parent_code.empty() && !TermCode::is_valid(r.parent_code)) {
        fail(ErrorCode::MalformedRecord,
             where(r) + ": bad parent code '" + r.parent_code + "'");
      }
      if (text::trim(r.name).empty()) {
        fail(ErrorCode::MalformedRecord, where(r) + ": empty name");
      }
      const auto k = key(r.hierarchy, r.code);
      if (by_key_.count(k)) {
        fail(ErrorCode::MalformedRecord,
             where(r) + ": duplicate code in hierarchy " + r.hierarchy);
      }
      const std::size_t idx = nodes_.size();
      by_key_.emplace(k, idx);
      std::optional<TermCode> parent;
      if (!r.parent_code.empty()) parent = TermCode::parse(r.parent_code);
      nodes_.push_back(TaxonomyNode{TermCode::parse(r.code), r.name,
                                    r.hierarchy, parent, 0, parse_implicit(r),
                                    r.description});
      by_code_[nodes_.back().code].push_back(idx);
      auto [pos, inserted] =
          hierarchy_pos_.emplace(r.hierarchy, hierarchies_.size());
      if (inserted) hierarchies_.push_back(Hierarchy{r.hierarchy, npos, {}});
      hierarchies_[pos->second].members.push_back(idx);
    }

    parent_.assign(nodes_.size(), npos);
    children_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      if (!n.parent) continue;
      const auto it = by_key_.find(key(n.hierarchy, n.parent->str()));
      if (it == by_key_.end()) {
        fail(ErrorCode::DanglingParent,
             where(records[i]) + ": parent '" + n.parent->str() +
                 "' not in hierarchy " + n.hierarchy);
      }
      parent_[i] = it->second;
    }

    // Depths; a walk that revisits a node on the current path is a cycle.
    constexpr int kUnset = -1;
    constexpr int kVisiting = -2;
    std::vector<int> depth(nodes_.size(), kUnset);
    std::vector<std::size_t> path;
    for (std::size_t start = 0; start < nodes_.size(); ++start) {
      path.clear();
      std::size_t cur = start;
      while (cur != npos && depth[cur] == kUnset) {
        depth[cur] = kVisiting;
        path.push_back(cur);
        cur = parent_[cur];
      }
      if (cur != npos && depth[cur] == kVisiting) {
        fail(ErrorCode::CycleDetected,
             where(records[cur]) + ": parent chain loops back");
      }
      int d = (cur == npos) ? -1 : depth[cur];
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        depth[*it] = ++d;
      }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      nodes_[i].depth = depth[i];
      if (parent_[i] != npos) children_[parent_[i]].push_back(i);
    }

    for (auto& h : hierarchies_) {
      for (std::size_t i : h.members) {
        if (parent_[i] != npos) continue;
        if (h.root != npos) {
          fail(ErrorCode::MalformedRecord,
               where(records[i]) + ": second root in hierarchy " + h.id);
        }
        h.root = i;
      }
    }

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      for (const auto& f : nodes_[i].implicit_facets) {
        if (!by_key_.count(key(f.category.str(), f.descriptor.str()))) {
          fail(ErrorCode::DanglingImplicitFacet,
               where(records[i]) + ": " + f.category.str() + "." +
                   f.descriptor.str() + " not in its category hierarchy");
        }
      }
    }

    for (const auto& h : hierarchies_) {
      if (h.id == kBaseHierarchy) continue;
      const auto& root = nodes_[h.root];
      registry_.push_back(FacetCategory{FacetCategoryId::parse(h.id), root.name,
                                        root.description,
                                        h.members.size() - 1});
    }
    std::sort(registry_.begin(), registry_.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
  }

  std::vector<TaxonomyNode> nodes_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::unordered_map<std::string, std::size_t> by_key_;
  std::unordered_map<TermCode, std::vector<std::size_t>> by_code_;
  std::vector<Hierarchy> hierarchies_;
  std::unordered_map<std::string, std::size_t> hierarchy_pos_;
  std::vector<FacetCategory> registry_;
};

// --- catalog file ------------------------------------------------------------

inline std::vector<CatalogRecord> read_catalog_records(std::istream& in) {
  std::vector<CatalogRecord> records;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorCode::MalformedRecord, "empty catalog");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line != kCatalogHeader) {
    fail(ErrorCode::MalformedRecord, "line 1: missing catalog header");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 6) {
      fail(ErrorCode::MalformedRecord,
           "line " + std::to_string(line_no) + ": expected 6 columns, got " +
               std::to_string(cols.size()));
    }
    records.push_back(CatalogRecord{cols[0], cols[1], cols[2], cols[3],
                                    cols[4], cols[5], line_no});
  }
  return records;
}

inline Taxonomy load_catalog(std::istream& in) {
  return Taxonomy::from_records(read_catalog_records(in));
}

inline Taxonomy load_catalog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open catalog " + path);
  return load_catalog(in);
}

inline void write_catalog(const Taxonomy& tx, std::ostream& out) {
  out << kCatalogHeader << '\n';
  for (const auto& n : tx.nodes()) {
    std::vector<std::string> facets;
    for (const auto& f : n.implicit_facets) {
      facets.push_back(f.category.str() + "." + f.descriptor.str());
    }
    out << n.code << '\t' << text::sanitize_field(n.name) << '\t'
        << n.hierarchy << '\t' << (n.parent ? n.parent->str() : "") << '\t'
        << text::join(facets, ";") << '\t'
        << text::sanitize_field(n.description) << '\n';
  }
}

inline std::string catalog_to_string(const Taxonomy& tx) {
  std::ostringstream os;
  write_catalog(tx, os);
  return os.str();
}

}  // namespace feast

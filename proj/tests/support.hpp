#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "feast/random.hpp"
#include "feast/taxonomy.hpp"

namespace feast::testing {

// Deterministic 5-char code for an integer: prefix letter + 4 base-36 digits.
inline std::string code_for(std::size_t n, char prefix = 'A') {
  static constexpr char digits[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::string s(5, '0');
  s[0] = prefix;
  for (int i = 4; i >= 1; --i) {
    s[i] = digits[n % 36];
    n /= 36;
  }
  return s;
}

inline TermCode tc(std::string_view s) { return TermCode::parse(s); }
inline FacetCategoryId fc(std::string_view s) { return FacetCategoryId::parse(s); }

inline CatalogRecord rec(std::string code, std::string name, std::string hierarchy,
                         std::string parent = "", std::string facets = "",
                         std::string description = "") {
  return {std::move(code), std::move(name), std::move(hierarchy), std::move(parent),
          std::move(facets), std::move(description), 0};
}

// Random tree over `n` nodes in hierarchy `h`: node i picks a parent
// uniformly among nodes 0..i-1.
inline std::vector<CatalogRecord> random_tree(std::size_t n, Rng& rng,
                                              const std::string& h = kBaseHierarchy,
                                              char prefix = 'A') {
  std::vector<CatalogRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string parent = i == 0 ? "" : code_for(rng.below(i), prefix);
    out.push_back(rec(code_for(i, prefix), "node " + std::to_string(i), h, parent));
  }
  return out;
}

inline Taxonomy parse_catalog(const std::string& body) {
  std::istringstream in(std::string(kCatalogHeader) + "\n" + body);
  return load_catalog(in);
}

// Code of the feast::Error thrown by f, or nullopt if it returns normally.
template <class F>
std::optional<ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace feast::testing

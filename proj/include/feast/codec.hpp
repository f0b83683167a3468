#pragma once

// FoodEx2 code strings:  BASE [ "#" GROUP ( "$" GROUP )* ],  GROUP = CAT "." CODE
//
//   "A000A"                       base term only
//   "A000A#F04.A032J$F28.A07GV"   base term with two facet groups
//
// Parsed codes are canonical: groups sorted by (category, descriptor) with no
// duplicates, so two codes naming the same facet set compare equal.

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "feast/error.hpp"
#include "feast/taxonomy.hpp"
#include "feast/text.hpp"

namespace feast {

struct FoodCode {
  TermCode base_term;
  std::vector<FacetGroup> facets;

  friend bool operator==(const FoodCode&, const FoodCode&) = default;
};

struct CodecOptions {
  char group_separator = '.';
  // Uppercases input and drops duplicate groups instead of rejecting them.
  bool lenient = false;
};

inline CodecOptions strict_codec() { return {}; }
inline CodecOptions lenient_codec() { return {'.', true}; }

inline void canonicalize(FoodCode& code) {
  std::sort(code.facets.begin(), code.facets.end());
  code.facets.erase(std::unique(code.facets.begin(), code.facets.end()),
                    code.facets.end());
}

namespace detail {

inline bool is_code_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool is_code_char_any_case(char c) {
  return is_code_char(c) || (c >= 'a' && c <= 'z');
}

}  // namespace detail

inline FoodCode parse_code(std::string_view input,
                           const CodecOptions& opts = {}) {
  if (input.empty()) fail(ErrorCode::EmptyInput, "empty code string");
  const std::string s = opts.lenient ? text::to_upper(input) : std::string(input);
  const std::size_t n = s.size();

  for (std::size_t i = 0; i < 5; ++i) {
    if (i >= n || !detail::is_code_char(s[i]) || (i == 0 && s[0] <= '9')) {
      fail(ErrorCode::BadBaseCode, "invalid base term", i);
    }
  }
  FoodCode code{TermCode::parse(std::string_view(s).substr(0, 5)), {}};
  if (n == 5) return code;
  if (detail::is_code_char_any_case(s[5])) {
    fail(ErrorCode::BadBaseCode, "base term longer than 5 characters", 5);
  }
  if (s[5] != '#') {
    fail(ErrorCode::UnknownSeparator,
         std::string("unexpected '") + s[5] + "' after base term", 5);
  }

  std::size_t pos = 6;
  while (true) {
    const std::size_t start = pos;
    const std::size_t sep = start + 3;
    const std::size_t end = start + 9;
    if (end > n || !FacetCategoryId::is_valid(std::string_view(s).substr(start, 3)) ||
        s[sep] != opts.group_separator ||
        !TermCode::is_valid(std::string_view(s).substr(sep + 1, 5))) {
      fail(ErrorCode::BadGroupSyntax, "malformed facet group", start);
    }
    FacetGroup group{FacetCategoryId::parse(std::string_view(s).substr(start, 3)),
                     TermCode::parse(std::string_view(s).substr(sep + 1, 5))};
    if (std::find(code.facets.begin(), code.facets.end(), group) !=
        code.facets.end()) {
      if (!opts.lenient) {
        fail(ErrorCode::DuplicateGroup,
             "duplicate group " + group.category.str() + "." +
                 group.descriptor.str(),
             start);
      }
    } else {
      code.facets.push_back(std::move(group));
    }
    if (end == n) break;
    if (detail::is_code_char_any_case(s[end])) {
      fail(ErrorCode::BadGroupSyntax, "facet group too long", start);
    }
    if (s[end] != '$') {
      fail(ErrorCode::UnknownSeparator,
           std::string("unexpected '") + s[end] + "' between groups", end);
    }
    pos = end + 1;
  }
  canonicalize(code);
  return code;
}

inline std::string serialize_code(const FoodCode& code,
                                  const CodecOptions& opts = {}) {
  std::string out = code.base_term.str();
  for (std::size_t i = 0; i < code.facets.size(); ++i) {
    out.push_back(i == 0 ? '#' : '$');
    out += code.facets[i].category.str();
    out.push_back(opts.group_separator);
    out += code.facets[i].descriptor.str();
  }
  return out;
}

// --- validation against a catalog --------------------------------------------

enum class ViolationKind { UnknownBaseTerm, UnknownCategory, DescriptorOutsideCategory };

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

inline ValidationReport validate_code(const FoodCode& code, const Taxonomy& tx) {
  ValidationReport report;
  if (!tx.has_hierarchy(kBaseHierarchy) ||
      !tx.contains(kBaseHierarchy, code.base_term)) {
    report.violations.push_back(
        {ViolationKind::UnknownBaseTerm, code.base_term.str()});
  }
  for (const auto& g : code.facets) {
    if (!tx.category_position(g.category)) {
      report.violations.push_back({ViolationKind::UnknownCategory, g.category.str()});
    } else if (!tx.contains(g.category.str(), g.descriptor)) {
      report.violations.push_back({ViolationKind::DescriptorOutsideCategory,
                                   g.category.str() + "." + g.descriptor.str()});
    }
  }
  return report;
}

}  // namespace feast

#pragma once

// Text utilities shared by the embedders, the lexical scorer and the dataset
// cleaner.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "feast/random.hpp"

namespace feast::text {

inline bool is_token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline char ascii_upper(char c) {
  return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

inline std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_upper);
  return out;
}

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Trims and collapses internal whitespace runs to a single space.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// Lowercased alphanumeric runs; non-ASCII bytes are kept inside tokens so
// accented words survive intact.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current.push_back(ascii_lower(ch));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

// Tabs and newlines would break the line-oriented file formats.
inline std::string sanitize_field(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

inline constexpr std::size_t kDefaultFeatureDim = 1024;
inline constexpr std::uint64_t kDefaultFeatureSeed = 0x5eedf00dULL;

// Sparse hashed feature vector: (bucket, count) pairs sorted by bucket.
using SparseFeatures = std::vector<std::pair<std::size_t, double>>;

inline std::size_t feature_bucket(std::string_view gram, std::size_t dim,
                                  std::uint64_t seed) {
  return static_cast<std::size_t>(fnv1a64(gram, 0xcbf29ce484222325ULL ^
                                                    splitmix64(seed)) %
                                  dim);
}

// Hashed unigram + bigram counts.
inline SparseFeatures hashed_features(std::string_view s,
                                      std::size_t dim = kDefaultFeatureDim,
                                      std::uint64_t seed = kDefaultFeatureSeed) {
  const auto tokens = tokenize(s);
  std::vector<std::size_t> buckets;
  buckets.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    buckets.push_back(feature_bucket(tokens[i], dim, seed));
    if (i + 1 < tokens.size()) {
      buckets.push_back(
          feature_bucket(tokens[i] + " " + tokens[i + 1], dim, seed));
    }
  }
  std::sort(buckets.begin(), buckets.end());
  SparseFeatures out;
  for (std::size_t b : buckets) {
    if (!out.empty() && out.back().first == b) {
      out.back().second += 1.0;
    } else {
      out.emplace_back(b, 1.0);
    }
  }
  return out;
}

inline std::vector<double> densify(const SparseFeatures& sparse,
                                   std::size_t dim) {
  std::vector<double> dense(dim, 0.0);
  for (const auto& [i, v] : sparse) dense[i] += v;
  return dense;
}

}  // namespace feast::text

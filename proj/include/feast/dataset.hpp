#pragma once

// Raw annotation ingestion, cleaning and train/val/test splitting.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "feast/codec.hpp"
#include "feast/error.hpp"
#include "feast/negative_mining.hpp"
#include "feast/random.hpp"
#include "feast/taxonomy.hpp"
#include "feast/text.hpp"

namespace feast {

namespace csv {

// RFC 4180: comma separated, double-quoted fields with "" escapes, LF or CRLF
// line ends, newlines allowed inside quotes.
inline std::vector<std::vector<std::string>> parse(std::string_view content) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  if (content.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (; i < content.size(); ++i) {
    const char c = content[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      if (i + 1 < content.size() && content[i + 1] == '\n') continue;
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) fail(ErrorCode::Io, "unterminated quoted CSV field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << "\r\n";
}

}  // namespace csv

struct RawRecord {
  std::string description;     // ENFOODNAME
  std::string base_term_name;  // BASETERM_NAME
  std::string facets_code;     // FACETS
};

struct Sample {
  std::string description;
  std::string base_term_name;
  FoodCode gold;
};

inline std::vector<RawRecord> read_dataset(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = csv::parse(buf.str());
  if (rows.empty()) fail(ErrorCode::Io, "dataset has no header");
  const auto& header = rows.front();
  auto column = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorCode::Io, "dataset header lacks " + std::string(name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t desc = column("ENFOODNAME");
  const std::size_t base = column("BASETERM_NAME");
  const std::size_t facets = column("FACETS");
  std::vector<RawRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto get = [&](std::size_t c) { return c < rows[r].size() ? rows[r][c] : std::string(); };
    out.push_back({get(desc), get(base), get(facets)});
  }
  return out;
}

inline std::vector<RawRecord> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open dataset " + path);
  return read_dataset(in);
}

inline RawRecord to_record(const Sample& s) {
  return {s.description, s.base_term_name, serialize_code(s.gold)};
}

inline void write_samples(const std::vector<Sample>& samples, std::ostream& out) {
  csv::write_row(out, {"ENFOODNAME", "BASETERM_NAME", "FACETS"});
  for (const auto& s : samples) {
    csv::write_row(out, {s.description, s.base_term_name, serialize_code(s.gold)});
  }
}

inline std::vector<Sample> read_samples(std::istream& in) {
  std::vector<Sample> out;
  for (const auto& r : read_dataset(in)) {
    out.push_back({r.description, r.base_term_name, parse_code(r.facets_code)});
  }
  return out;
}

inline std::vector<Sample> read_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open dataset " + path);
  return read_samples(in);
}

// --- cleaning -------------------------------------------------------------------

struct PreprocessOptions {
  // Bracketed placeholder tokens such as "[BRAND]" or "[COMPANY_2]".
  std::string anonymized_pattern = R"(\[[A-Z][A-Z0-9_ ]*\])";
};

struct PreprocessAudit {
  std::size_t input = 0;
  std::size_t missing = 0;
  std::size_t anonymized = 0;
  std::size_t malformed_code = 0;  // unparseable even in lenient mode
  std::size_t unknown_code = 0;    // parses, but not valid against the catalog
  std::size_t duplicates = 0;
  std::size_t output = 0;
  std::vector<std::string> log;

  std::size_t removed() const {
    return missing + anonymized + malformed_code + unknown_code + duplicates;
  }
};

struct PreprocessResult {
  std::vector<Sample> samples;
  PreprocessAudit audit;
};

// Collapsed, lowercased description.
inline std::string dedup_key(std::string_view description) {
  return text::to_lower(text::collapse_whitespace(description));
}

// Higher is more informative: more facet groups, then longer code, then the
// lexicographically smaller code.
inline bool more_informative(const Sample& a, const Sample& b) {
  if (a.gold.facets.size() != b.gold.facets.size()) {
    return a.gold.facets.size() > b.gold.facets.size();
  }
  const auto sa = serialize_code(a.gold);
  const auto sb = serialize_code(b.gold);
  if (sa.size() != sb.size()) return sa.size() > sb.size();
  return sa < sb;
}

inline PreprocessResult preprocess(const std::vector<RawRecord>& records, const Taxonomy& tx,
                                   const PreprocessOptions& opts = {}) {
  PreprocessResult result;
  auto& audit = result.audit;
  audit.input = records.size();
  const std::regex anonymized(opts.anonymized_pattern);

  std::vector<Sample> kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i + 1);
    const auto description = text::collapse_whitespace(r.description);
    const auto base_name = text::collapse_whitespace(r.base_term_name);
    const auto code_text = std::string(text::trim(r.facets_code));
    if (description.empty() || base_name.empty() || code_text.empty()) {
      ++audit.missing;
      audit.log.push_back(where + ": missing value");
      continue;
    }
    if (std::regex_search(description, anonymized)) {
      ++audit.anonymized;
      audit.log.push_back(where + ": anonymized description");
      continue;
    }
    std::optional<FoodCode> code;
    try {
      code = parse_code(code_text, lenient_codec());
    } catch (const Error& e) {
      ++audit.malformed_code;
      audit.log.push_back(where + ": malformed code '" + code_text + "' (" + e.what() + ")");
      continue;
    }
    if (!validate_code(*code, tx).ok()) {
      ++audit.unknown_code;
      audit.log.push_back(where + ": code not in catalog '" + code_text + "'");
      continue;
    }
    kept.push_back({description, base_name, std::move(*code)});
  }

  std::unordered_map<std::string, std::size_t> winner;  // key -> position in out
  for (auto& s : kept) {
    const auto key = dedup_key(s.description);
    const auto it = winner.find(key);
    if (it == winner.end()) {
      winner.emplace(key, result.samples.size());
      result.samples.push_back(std::move(s));
      continue;
    }
    ++audit.duplicates;
    auto& current = result.samples[it->second];
    audit.log.push_back("duplicate description '" + s.description + "'");
    if (more_informative(s, current)) current = std::move(s);
  }
  audit.output = result.samples.size();
  return result;
}

// Validation distractors: hard negatives of the gold base term.
inline HardNegativeSet simulate_distractors(const Sample& sample, const Taxonomy& tx,
                                            const MiningConfig& cfg) {
  return mine_hard_negatives(kBaseHierarchy, sample.gold.base_term, cfg, tx);
}

// --- splitting ------------------------------------------------------------------

enum class SplitMode { Stratified, OutOfSample };

struct SplitSpec {
  SplitMode mode = SplitMode::Stratified;
  std::uint64_t seed = 42;
  std::size_t test_target_size = 0;
  std::size_t val_target_size = 0;  // ignored in out-of-sample mode
};

struct SplitResult {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
};

namespace detail {

// Groups sample positions by base term, groups in order of first appearance.
inline std::vector<std::vector<std::size_t>> group_by_base(const std::vector<Sample>& samples,
                                                           const std::vector<std::size_t>& pool) {
  std::vector<std::vector<std::size_t>> groups;
  std::map<TermCode, std::size_t> slot;
  for (std::size_t i : pool) {
    const auto [it, inserted] = slot.emplace(samples[i].gold.base_term, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

// Proportional (largest remainder) allocation of `target` items over the
// base-term groups of `pool`; every group receives floor or ceil of its quota.
inline std::vector<std::size_t> stratified_pick(const std::vector<Sample>& samples,
                                                const std::vector<std::size_t>& pool,
                                                std::size_t target, Rng& rng) {
  auto groups = group_by_base(samples, pool);
  const std::size_t total = pool.size();
  std::vector<std::size_t> alloc(groups.size());
  std::vector<std::size_t> remainder(groups.size());
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::size_t scaled = groups[g].size() * target;
    alloc[g] = scaled / total;
    remainder[g] = scaled % total;
    assigned += alloc[g];
  }
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target; ++k, ++assigned) ++alloc[order[k]];

  std::vector<std::size_t> picked;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    rng.shuffle(groups[g]);
    picked.insert(picked.end(), groups[g].begin(),
                  groups[g].begin() + static_cast<std::ptrdiff_t>(alloc[g]));
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace detail

// Whole base-term groups go to test, in the given group order, until the test
// size first reaches `target`; everything else is train.
inline SplitResult oos_split_in_order(const std::vector<Sample>& samples,
                                      const std::vector<TermCode>& group_order,
                                      std::size_t target) {
  if (target >= samples.size()) {
    fail(ErrorCode::TargetTooLarge, "test target " + std::to_string(target) +
                                        " not below corpus size " +
                                        std::to_string(samples.size()));
  }
  std::map<TermCode, bool> in_test;
  std::map<TermCode, std::size_t> sizes;
  for (const auto& s : samples) ++sizes[s.gold.base_term];
  std::size_t test_size = 0;
  for (const auto& code : group_order) {
    if (test_size >= target) break;
    if (in_test[code]) continue;
    in_test[code] = true;
    test_size += sizes[code];
  }
  SplitResult out;
  for (const auto& s : samples) {
    (in_test[s.gold.base_term] ? out.test : out.train).push_back(s);
  }
  return out;
}

inline SplitResult split(const std::vector<Sample>& samples, const SplitSpec& spec) {
  Rng rng(spec.seed);
  if (spec.mode == SplitMode::OutOfSample) {
    std::vector<TermCode> order;
    std::map<TermCode, bool> seen;
    for (const auto& s : samples) {
      if (!seen[s.gold.base_term]) {
        seen[s.gold.base_term] = true;
        order.push_back(s.gold.base_term);
      }
    }
    rng.shuffle(order);
    return oos_split_in_order(samples, order, spec.test_target_size);
  }

  if (spec.test_target_size + spec.val_target_size >= samples.size()) {
    fail(ErrorCode::TargetTooLarge, "test + val targets not below corpus size " +
                                        std::to_string(samples.size()));
  }
  std::vector<std::size_t> pool(samples.size());
  std::iota(pool.begin(), pool.end(), 0);
  const auto test = detail::stratified_pick(samples, pool, spec.test_target_size, rng);
  std::vector<std::size_t> rest;
  std::set_difference(pool.begin(), pool.end(), test.begin(), test.end(),
                      std::back_inserter(rest));
  const auto val = detail::stratified_pick(samples, rest, spec.val_target_size, rng);
  std::vector<char> where(samples.size(), 0);
  for (std::size_t i : test) where[i] = 2;
  for (std::size_t i : val) where[i] = 1;
  SplitResult out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (where[i] == 2 ? out.test : where[i] == 1 ? out.val : out.train).push_back(samples[i]);
  }
  return out;
}

}  // namespace feast

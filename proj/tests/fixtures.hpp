#pragma once

// Data fixtures shared by the unit tests and the acceptance runner.

#include <string>
#include <vector>

#include "feast/dataset.hpp"
#include "support.hpp"

namespace feast::fixtures {

// BASE: root + 20 leaves A0001..A0020; F01: root + descriptors C0001..C0005.
inline Taxonomy defect_catalog() {
  std::string body = "R0000\tfoods\tBASE\t\t\t\n";
  for (int i = 1; i <= 20; ++i) {
    body += testing::code_for(static_cast<std::size_t>(i)) + "\tfood " + std::to_string(i) +
            "\tBASE\tR0000\t\t\n";
  }
  body += "C0000\tSource\tF01\t\t\t\n";
  for (int i = 1; i <= 5; ++i) {
    body += testing::code_for(static_cast<std::size_t>(i), 'C') + "\tsource " +
            std::to_string(i) + "\tF01\tC0000\t\t\n";
  }
  return testing::parse_catalog(body);
}

struct PlantedDefects {
  std::vector<RawRecord> records;
  PreprocessAudit expected;
};

// 100 records: 75 clean ones plus planted defects of every kind.
inline PlantedDefects planted_defects() {
  using testing::code_for;
  PlantedDefects out;
  auto& r = out.records;
  auto& e = out.expected;
  auto base = [](std::size_t i) { return code_for(1 + i % 20); };
  auto facet = [](std::size_t i) { return "F01." + code_for(1 + i % 5, 'C'); };
  for (std::size_t i = 0; i < 75; ++i) {
    std::string code = base(i);
    if (i % 3 == 1) code += "#" + facet(i);
    // Lowercase codes are repaired by the lenient parser, not dropped.
    if (i % 10 == 7) code = text::to_lower(code);
    r.push_back({"clean item " + std::to_string(i), "food " + std::to_string(1 + i % 20), code});
  }
  // Missing values in each column.
  for (int i = 0; i < 7; ++i) {
    RawRecord m{"missing " + std::to_string(i), "food 1", code_for(1)};
    if (i % 3 == 0) m.description = "   ";
    if (i % 3 == 1) m.base_term_name = "";
    if (i % 3 == 2) m.facets_code = "";
    r.push_back(m);
  }
  for (int i = 0; i < 5; ++i) {
    r.push_back({"item from [BRAND] number " + std::to_string(i), "food 2", code_for(2)});
  }
  for (const char* bad : {"A00", "A0001#F01C0001", "A0001#F01.C0001;F01.C0002", "0A001"}) {
    r.push_back({std::string("malformed ") + bad, "food 3", bad});
  }
  // Well-formed but outside the catalog: base term, category, descriptor.
  r.push_back({"unknown base", "food 4", "Z9999"});
  r.push_back({"unknown category", "food 4", code_for(4) + "#F28.C0001"});
  r.push_back({"unknown descriptor", "food 4", code_for(4) + "#F01.C0009"});
  // Duplicates of clean items, differing only in case/whitespace.
  for (int i = 0; i < 6; ++i) {
    r.push_back({"  Clean   ITEM " + std::to_string(i * 3), "food 9", code_for(9) + "#F01.C0001$F01.C0002"});
  }
  e.input = 100;
  e.missing = 7;
  e.anonymized = 5;
  e.malformed_code = 4;
  e.unknown_code = 3;
  e.duplicates = 6;
  e.output = 75;
  return out;
}

// Groups of the given sizes, one base term per group.
inline std::vector<Sample> grouped_samples(const std::vector<std::size_t>& sizes) {
  std::vector<Sample> out;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    for (std::size_t i = 0; i < sizes[g]; ++i) {
      out.push_back({"group " + std::to_string(g) + " item " + std::to_string(i),
                     "food " + std::to_string(g),
                     FoodCode{testing::tc(testing::code_for(g + 1)), {}}});
    }
  }
  return out;
}

}  // namespace feast::fixtures

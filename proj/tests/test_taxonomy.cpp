#include <gtest/gtest.h>

#include "feast/taxonomy.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace feast;
using namespace feast::testing;

namespace {

// Small fixture:
//   R0000
//     A0001
//       A0003
//         A0006
//       A0004
//     A0002
//       A0005
const char* kSmall =
    "R0000\troot\tBASE\t\t\t\n"
    "A0001\tleft\tBASE\tR0000\tF01.D0001\t\n"
    "A0002\tright\tBASE\tR0000\t\t\n"
    "A0003\tleft left\tBASE\tA0001\tF01.D0001;F01.D0002\t\n"
    "A0004\tleft right\tBASE\tA0001\t\t\n"
    "A0005\tright only\tBASE\tA0002\t\t\n"
    "A0006\tdeep\tBASE\tA0003\t\t\n"
    "D0000\tSource\tF01\t\t\tWhere the food comes from\n"
    "D0001\tcow\tF01\tD0000\t\t\n"
    "D0002\tgoat\tF01\tD0000\t\t\n";

}  // namespace

TEST(Taxonomy, LoadsSmallCatalog) {
  const auto tx = parse_catalog(kSmall);
  EXPECT_EQ(tx.size(), 10u);
  EXPECT_EQ(tx.hierarchies().size(), 2u);
  EXPECT_EQ(tx.node(tc("A0006")).depth, 3);
  EXPECT_EQ(tx.node(tc("R0000")).depth, 0);
  ASSERT_EQ(tx.category_registry().size(), 1u);
  EXPECT_EQ(tx.category_registry()[0].name, "Source");
  EXPECT_EQ(tx.category_registry()[0].descriptor_count, 2u);
}

TEST(Taxonomy, LcaAndHopDistanceExamples) {
  const auto tx = parse_catalog(kSmall);
  EXPECT_EQ(tx.lca(tc("A0003"), tc("A0004")), tc("A0001"));
  EXPECT_EQ(tx.hop_distance(tc("A0003"), tc("A0004")), 2);
  EXPECT_EQ(tx.lca(tc("A0006"), tc("A0005")), tc("R0000"));
  EXPECT_EQ(tx.hop_distance(tc("A0006"), tc("A0005")), 5);
  EXPECT_EQ(tx.hop_distance(tc("A0006"), tc("A0006")), 0);
  EXPECT_EQ(tx.lca(tc("A0006"), tc("A0001")), tc("A0001"));
  EXPECT_EQ(tx.hop_distance(tc("A0006"), tc("A0001")), 2);
}

TEST(Taxonomy, CrossHierarchyPairsAreRejected) {
  const auto tx = parse_catalog(kSmall);
  EXPECT_EQ(error_code_of([&] { tx.lca(tc("A0001"), tc("D0001")); }),
            ErrorCode::DifferentHierarchies);
  EXPECT_EQ(error_code_of([&] { tx.hop_distance(tc("A0001"), tc("Z9999")); }),
            ErrorCode::UnknownCode);
}

TEST(Taxonomy, SiblingsAndImplicitFacets) {
  const auto tx = parse_catalog(kSmall);
  EXPECT_EQ(tx.siblings(tc("A0003")), std::vector<TermCode>{tc("A0004")});
  EXPECT_TRUE(tx.siblings(tc("R0000")).empty());
  EXPECT_TRUE(tx.siblings(tc("A0005")).empty());
  const auto& f = tx.implicit_facets(tc("A0003"));
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].descriptor, tc("D0001"));
}

TEST(Taxonomy, ValidationErrors) {
  EXPECT_EQ(error_code_of([] { parse_catalog("A0001\tx\tBASE\tA0009\t\t\n"); }),
            ErrorCode::DanglingParent);
  EXPECT_EQ(error_code_of([] {
              parse_catalog("R0000\tr\tBASE\t\t\t\nA0001\tx\tBASE\tA0002\t\t\nA0002\ty\tBASE\tA0001\t\t\n");
            }),
            ErrorCode::CycleDetected);
  EXPECT_EQ(error_code_of([] { parse_catalog("A0001\tx\tBASE\tA0001\t\t\n"); }),
            ErrorCode::CycleDetected);
  EXPECT_EQ(error_code_of([] { parse_catalog("R0000\tr\tBASE\t\tF02.D0001\t\n"); }),
            ErrorCode::DanglingImplicitFacet);
  EXPECT_EQ(error_code_of([] { parse_catalog("r0000\tr\tBASE\t\t\t\n"); }),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(error_code_of([] { parse_catalog("R0000\tr\tBASE\t\t\n"); }),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(error_code_of([] { parse_catalog("R0000\tr\tBASE\t\t\t\nR0000\ts\tBASE\t\t\t\n"); }),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(error_code_of([] { parse_catalog("R0000\tr\tBASE\t\t\t\nR0001\ts\tBASE\t\t\t\n"); }),
            ErrorCode::MalformedRecord);
  std::istringstream no_header("R0000\tr\tBASE\t\t\t\n");
  EXPECT_EQ(error_code_of([&] { load_catalog(no_header); }), ErrorCode::MalformedRecord);
}

TEST(Taxonomy, CodeMayAppearInSeveralHierarchies) {
  const auto tx = parse_catalog(
      "R0000\troot\tBASE\t\t\t\n"
      "A0001\tmilk\tBASE\tR0000\t\t\n"
      "A0002\tcheese\tBASE\tR0000\t\t\n"
      "D0000\tIngredient\tF04\t\t\t\n"
      "A0001\tmilk\tF04\tD0000\t\t\n");
  EXPECT_EQ(tx.index_of(tc("A0001")), 1u);
  EXPECT_EQ(tx.index_of("F04", tc("A0001")), 4u);
  EXPECT_EQ(tx.hop_distance(tc("A0001"), tc("A0002")), 2);
  EXPECT_EQ(tx.hop_distance("F04", tc("A0001"), tc("D0000")), 1);
}

TEST(Taxonomy, CatalogRoundTrip) {
  const auto tx = parse_catalog(kSmall);
  const auto text = catalog_to_string(tx);
  std::istringstream in(text);
  const auto again = load_catalog(in);
  EXPECT_EQ(catalog_to_string(again), text);
}

TEST(Taxonomy, BomAndCrlfAreAccepted) {
  std::istringstream in("\xEF\xBB\xBF" + std::string(kCatalogHeader) +
                        "\r\nR0000\troot\tBASE\t\t\t\r\n");
  EXPECT_EQ(load_catalog(in).size(), 1u);
}

// Properties on random trees: lca matches the path-intersection oracle and
// hop distance matches BFS; hop distance is a metric on the tree.
TEST(Taxonomy, RandomTreesMatchOracles) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.below(120);
    const auto tx = Taxonomy::from_records(random_tree(n, rng));
    for (int q = 0; q < 300; ++q) {
      const auto a = rng.below(n), b = rng.below(n), c = rng.below(n);
      ASSERT_EQ(tx.lca_index(a, b), oracle::lca_by_paths(tx, a, b));
      const int d = tx.hop_distance_index(a, b);
      ASSERT_EQ(d, oracle::hops_by_bfs(tx, a, b));
      ASSERT_EQ(d, tx.hop_distance_index(b, a));
      ASSERT_EQ(d == 0, a == b);
      ASSERT_LE(tx.hop_distance_index(a, c), d + tx.hop_distance_index(b, c));
    }
  }
}

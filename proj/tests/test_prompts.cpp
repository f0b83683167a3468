#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "feast/prompts.hpp"
#include "support.hpp"

using namespace feast;
using namespace feast::testing;

namespace {

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(FEAST_GOLDEN) + "/" + name);
  EXPECT_TRUE(in.good()) << name;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string as_golden(const Prompt& p) {
  return "system: " + p.system + "\nuser: " + p.user + "\n";
}

}  // namespace

TEST(Prompts, BaseTermMatchesGolden) {
  const auto p = render_prompt(PromptTask::BaseTerm,
                               {"A0001: milk | A0002: cheese",
                                std::vector<std::string>{"A0001", "A0002"}, "whole milk", {}});
  EXPECT_EQ(as_golden(p), read_golden("task1_base_term.txt"));
}

TEST(Prompts, FacetCategoryMatchesGolden) {
  const auto p = render_prompt(PromptTask::FacetCategory,
                               {"F01: source | F04: ingredient",
                                std::vector<std::string>{"F01", "F04"}, "whole milk", {}});
  EXPECT_EQ(as_golden(p), read_golden("task2_facet_category.txt"));
}

TEST(Prompts, FacetDescriptorMatchesGolden) {
  const auto p = render_prompt(PromptTask::FacetDescriptor,
                               {"A0C0B: cow", std::vector<std::string>{"A0C0B", "A0C0C"},
                                "whole milk", std::string("F01")});
  EXPECT_EQ(as_golden(p), read_golden("task3_facet_descriptor.txt"));
}

TEST(Prompts, EmptyCategoryList) {
  const auto p = render_prompt(PromptTask::FacetCategory,
                               {"", std::vector<std::string>{}, "water", {}});
  EXPECT_NE(p.user.find("Categories: []"), std::string::npos);
}

TEST(Prompts, MissingPlaceholders) {
  EXPECT_EQ(error_code_of([] {
              render_prompt(PromptTask::BaseTerm, {"ctx", std::nullopt, "food", {}});
            }),
            ErrorCode::MissingPlaceholder);
  EXPECT_EQ(error_code_of([] {
              render_prompt(PromptTask::FacetDescriptor,
                            {"ctx", std::vector<std::string>{"A0001"}, "food", std::nullopt});
            }),
            ErrorCode::MissingPlaceholder);
  EXPECT_EQ(error_code_of([] {
              render_prompt(PromptTask::FacetCategory,
                            {std::nullopt, std::vector<std::string>{}, "food", {}});
            }),
            ErrorCode::MissingPlaceholder);
}

TEST(Prompts, SystemTextHasNoPlaceholders) {
  for (auto task : {PromptTask::BaseTerm, PromptTask::FacetCategory,
                    PromptTask::FacetDescriptor}) {
    EXPECT_EQ(prompt_template(task).system.find('{'), std::string_view::npos);
  }
}

TEST(ParseSelection, AcceptsCandidatesAndRejectsOthers) {
  const std::vector<std::string> cands{"A0001", "A0002", "A0003"};
  const auto r = parse_selection("['A0002', 'A0001']\nZ9999, A0002.", cands);
  EXPECT_EQ(r.accepted, (std::vector<std::string>{"A0002", "A0001"}));
  EXPECT_EQ(r.rejected, (std::vector<std::string>{"Z9999"}));
}

TEST(ParseSelection, EmptyListYieldsNothing) {
  const auto r = parse_selection("[]", {"F01"});
  EXPECT_TRUE(r.accepted.empty());
  EXPECT_TRUE(r.rejected.empty());
}

TEST(ParseSelection, BulletLists) {
  const auto r = parse_selection("- F01\n* \"F04\"\n", {"F01", "F04"});
  EXPECT_EQ(r.accepted, (std::vector<std::string>{"F01", "F04"}));
}

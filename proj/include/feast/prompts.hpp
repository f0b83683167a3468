#pragma once

// Instruction templates for the generative backend, one per pipeline task,
// and parsing of the generated candidate lists.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "feast/error.hpp"
#include "feast/text.hpp"

namespace feast {

enum class PromptTask { BaseTerm, FacetCategory, FacetDescriptor };

struct PromptTemplate {
  std::string_view system;
  std::string_view user;
};

inline PromptTemplate prompt_template(PromptTask task) {
  switch (task) {
    case PromptTask::BaseTerm:
      return {"Given a food item, select one or more base terms from the candidate options. "
              "The context provides additional information for each candidate.",
              "Context:{context} BaseTerms: {baseterms} Food: {food}"};
    case PromptTask::FacetCategory:
      return {"Given a food item, select one or more categories that best describe it. The "
              "context provides additional information for each candidate. If no category "
              "applies, return an empty list [].",
              "Context: {context} Categories: {categories} Food: {food}"};
    case PromptTask::FacetDescriptor:
      return {"Given a food item in a category, select its most relevant descriptor(s) from "
              "the candidate options. The context provides additional information for each "
              "candidate descriptor.",
              "Context: {context}  Descriptors: {descriptors} Food: {food} Category: "
              "{food_category}"};
  }
  fail(ErrorCode::InvalidArgument, "unknown prompt task");
}

struct PromptInputs {
  std::optional<std::string> context;
  std::optional<std::vector<std::string>> candidates;
  std::optional<std::string> food;
  std::optional<std::string> category;  // descriptor task only
};

struct Prompt {
  std::string system;
  std::string user;
};

// ['a', 'b'] ; an empty list renders as [].
inline std::string render_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "'" + items[i] + "'";
  }
  return out + "]";
}

// Replaces every {name} that appears in `values`; any other {identifier}
// left behind is a missing placeholder.
inline std::string fill_template(std::string_view tmpl,
                                 const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const std::string name(tmpl.substr(i + 1, close - i - 1));
        const auto it = values.find(name);
        if (it == values.end()) {
          fail(ErrorCode::MissingPlaceholder, "no value for {" + name + "}");
        }
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

inline Prompt render_prompt(PromptTask task, const PromptInputs& in) {
  std::map<std::string, std::string> values;
  if (in.context) values["context"] = *in.context;
  if (in.food) values["food"] = *in.food;
  if (in.category) values["food_category"] = *in.category;
  if (in.candidates) {
    const auto list = render_list(*in.candidates);
    switch (task) {
      case PromptTask::BaseTerm: values["baseterms"] = list; break;
      case PromptTask::FacetCategory: values["categories"] = list; break;
      case PromptTask::FacetDescriptor: values["descriptors"] = list; break;
    }
  }
  const auto t = prompt_template(task);
  return {fill_template(t.system, values), fill_template(t.user, values)};
}

// Remote text-generation backend.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual std::string generate(const Prompt& prompt) const = 0;
};

struct ParsedSelection {
  std::vector<std::string> accepted;  // candidate order of first mention
  std::vector<std::string> rejected;  // tokens not among the candidates
};

// Splits generated text on newlines and commas, strips brackets, quotes and
// whitespace, and keeps only items that are in `candidates`.
inline ParsedSelection parse_selection(std::string_view generated,
                                       const std::vector<std::string>& candidates) {
  const std::set<std::string> allowed(candidates.begin(), candidates.end());
  ParsedSelection out;
  std::set<std::string> seen;
  std::string item;
  auto flush = [&] {
    std::string_view v = text::trim(item);
    while (!v.empty() && (v.front() == '[' || v.front() == '\'' || v.front() == '"' ||
                          v.front() == '-' || v.front() == '*' || text::is_space(v.front()))) {
      v.remove_prefix(1);
    }
    while (!v.empty() && (v.back() == ']' || v.back() == '\'' || v.back() == '"' ||
                          v.back() == '.' || text::is_space(v.back()))) {
      v.remove_suffix(1);
    }
    if (!v.empty()) {
      std::string s(v);
      if (allowed.count(s)) {
        if (seen.insert(s).second) out.accepted.push_back(s);
      } else {
        out.rejected.push_back(s);
      }
    }
    item.clear();
  };
  for (char c : generated) {
    if (c == '\n' || c == ',') {
      flush();
    } else {
      item.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace feast

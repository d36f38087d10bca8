#include "nada/promptgen.hpp"

#include "nada/error.hpp"
#include "nada/proposer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace nada::promptgen {

using proposer::to_lower;

void LabelRemapTable::add(std::string source, std::string rendered) {
  if (find(source)) throw ValidationError("remap source '" + source + "' listed twice");
  if (rendered.empty()) throw ValidationError("remap target for '" + source + "' is empty");
  entries_.emplace_back(std::move(source), std::move(rendered));
}

std::optional<std::string> LabelRemapTable::find(const std::string& label) const {
  const std::string key = to_lower(label);
  for (const auto& [source, rendered] : entries_) {
    if (to_lower(source) == key) return rendered;
  }
  return std::nullopt;
}

LabelRemapTable LabelRemapTable::iconart() {
  LabelRemapTable t;
  t.add("Saint Sebastien", "person");
  t.add("Saint Sebastian", "person");
  t.add("child Jesus", "baby");
  t.add("nudity", "naked person");
  return t;
}

LabelRemapTable LabelRemapTable::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("remap table must be a JSON object");
  LabelRemapTable t;
  for (const auto& [source, rendered] : doc.items()) {
    if (!rendered.is_string()) throw ValidationError("remap target for '" + source + "' is not a string");
    t.add(source, rendered.get<std::string>());
  }
  return t;
}

LabelRemapTable LabelRemapTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open remap table " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("remap table " + path.string() + ": " + e.what());
  }
}

std::string remap_label(const std::string& label, const LabelRemapTable& table) {
  return table.find(label).value_or(label);
}

PromptSpec template_prompt(const std::string& rendered_label) {
  if (rendered_label.empty()) throw ValidationError("empty label");
  static const std::vector<std::string> with_article = {"person", "baby", "naked person"};
  const bool article =
      std::find(with_article.begin(), with_article.end(), rendered_label) != with_article.end();
  PromptSpec spec;
  spec.rendered_label = rendered_label;
  spec.text = (article ? "A painting of a " : "A painting of ") + rendered_label;
  spec.mode = PromptMode::Template;
  return spec;
}

PromptSpec caption_prompt(const std::string& caption, const std::string& rendered_label,
                          int token_budget, std::optional<int> label_token_start) {
  const bool mentioned = to_lower(caption).find(to_lower(rendered_label)) != std::string::npos;
  const bool in_budget = label_token_start && *label_token_start < token_budget;
  PromptSpec spec;
  spec.rendered_label = rendered_label;
  spec.mode = PromptMode::Caption;
  if (mentioned && in_budget && !caption.empty()) {
    spec.text = caption;
    spec.fallback = false;
  } else {
    spec.text = template_prompt(rendered_label).text + ". " + caption;
    spec.fallback = true;
  }
  return spec;
}

std::optional<QueryKind> query_kind_from_string(const std::string& s) {
  if (s == "choice-artdl") return QueryKind::ChoiceArtDL;
  if (s == "choice-iconart") return QueryKind::ChoiceIconArt;
  if (s == "score") return QueryKind::Score;
  if (s == "yesno" || s == "per-class") return QueryKind::PerClassYesNo;
  return std::nullopt;
}

std::vector<std::string> build_vlm_query(const std::vector<std::string>& vocabulary, QueryKind kind) {
  if (vocabulary.empty()) throw ValidationError("empty vocabulary");
  std::string classes;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (i > 0) classes += ", ";
    classes += vocabulary[i];
  }
  switch (kind) {
    case QueryKind::ChoiceArtDL:
      return {"Who is in the painting? Choose from the following: " + classes};
    case QueryKind::ChoiceIconArt:
      return {"Which of the options are in the painting? Choose from the following: " + classes};
    case QueryKind::Score:
      return {"Which of the Christian iconographic symbols are in the painting? Choose from the "
              "following: " +
              classes +
              "\nFor each symbol, give a score from 0 to 1 of how confident you are."
              "\nPut your answer in a dictionary first and then reason your answer."
              "\nBe as accurate as possible."
              "\nIf none of the symbols are present, output 'None'"};
    case QueryKind::PerClassYesNo: {
      std::vector<std::string> out;
      for (const auto& label : vocabulary) out.push_back("Is " + label + " in the painting?");
      return out;
    }
  }
  return {};
}

std::string caption_request(const std::string& rendered_label) {
  return "Describe the visual elements in the image in one sentence. Include the term \"" +
         rendered_label + "\".";
}

}  // namespace nada::promptgen

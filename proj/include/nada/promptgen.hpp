#pragma once

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nada::promptgen {

inline constexpr int kDefaultTokenBudget = 75;

/// Source label -> rendered label; unlisted labels render as themselves.
/// Lookup ignores ASCII case.
class LabelRemapTable {
 public:
  LabelRemapTable() = default;

  /// Throws ValidationError when `source` is already mapped.
  void add(std::string source, std::string rendered);
  std::optional<std::string> find(const std::string& label) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  /// IconArt renames: Saint Sebastien -> person, child Jesus -> baby,
  /// nudity -> naked person.
  static LabelRemapTable iconart();

  /// A JSON object {"source": "rendered", ...}.
  static LabelRemapTable from_json(const nlohmann::json& doc);
  static LabelRemapTable load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string remap_label(const std::string& label, const LabelRemapTable& table);

enum class PromptMode { Template, Caption };

struct PromptSpec {
  std::string text;
  std::string rendered_label;
  PromptMode mode = PromptMode::Template;
  bool fallback = false;  // caption mode fell back to template + caption
};

/// "A painting of {label}", or "A painting of a {label}" for person, baby and
/// naked person.
PromptSpec template_prompt(const std::string& rendered_label);

/// Uses the caption verbatim when it mentions the label (any case) and the
/// label starts before `token_budget`; otherwise prepends the template
/// sentence. `label_token_start` comes from the caption producer's tokenizer.
PromptSpec caption_prompt(const std::string& caption, const std::string& rendered_label,
                          int token_budget, std::optional<int> label_token_start);

enum class QueryKind { ChoiceArtDL, ChoiceIconArt, Score, PerClassYesNo };

std::optional<QueryKind> query_kind_from_string(const std::string& s);

/// VLM queries for a vocabulary: one text for the set-style kinds, one per
/// label for per-class yes/no.
std::vector<std::string> build_vlm_query(const std::vector<std::string>& vocabulary, QueryKind kind);

/// Caption request for the same VLM, used for caption-mode prompts.
std::string caption_request(const std::string& rendered_label);

}  // namespace nada::promptgen

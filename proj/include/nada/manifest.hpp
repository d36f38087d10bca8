#pragma once

#include "nada/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nada::dataio {

struct GroundTruthBox {
  std::string label;
  Box box;
};

struct ImageRecord {
  std::string id;
  int width = 0;
  int height = 0;
  std::vector<std::string> gt_labels;
  std::vector<GroundTruthBox> gt_boxes;
};

struct DatasetManifest {
  std::string name;
  std::vector<std::string> classes;
  std::vector<ImageRecord> images;

  std::optional<std::size_t> class_index(const std::string& label) const;
  bool has_class(const std::string& label) const { return class_index(label).has_value(); }
  const ImageRecord* find_image(const std::string& id) const;

  /// Throws ValidationError on the first violated invariant.
  void validate() const;
};

/// Built-in class vocabularies.
namespace vocab {
/// ArtDL 2.0: Wikipedia article titles of the ten iconographic classes.
const std::vector<std::string>& artdl();
/// IconArt: the seven classes as rendered for prompting (Saint Sebastian as
/// "person", child Jesus as "baby", nudity as "naked person").
const std::vector<std::string>& iconart();
/// Resolves "artdl" / "iconart"; nullopt otherwise.
std::optional<std::vector<std::string>> builtin(const std::string& name);
}  // namespace vocab

/// Parses and validates a manifest document. `classes` may be a list of
/// labels or the name of a built-in vocabulary ("@artdl", "@iconart").
DatasetManifest manifest_from_json(const nlohmann::json& doc);
nlohmann::json manifest_to_json(const DatasetManifest& manifest);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace nada::dataio

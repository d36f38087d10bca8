#include "nada/manifest.hpp"

#include "nada/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace nada::dataio {

using nlohmann::json;

std::optional<std::size_t> DatasetManifest::class_index(const std::string& label) const {
  const auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

const ImageRecord* DatasetManifest::find_image(const std::string& id) const {
  for (const auto& image : images) {
    if (image.id == id) return &image;
  }
  return nullptr;
}

void DatasetManifest::validate() const {
  if (classes.empty()) throw ValidationError("manifest '" + name + "' has no classes");
  std::set<std::string> vocabulary;
  for (const auto& c : classes) {
    if (c.empty()) throw ValidationError("empty class label");
    if (!vocabulary.insert(c).second) throw ValidationError("duplicate class '" + c + "'");
  }
  std::set<std::string> ids;
  for (const auto& image : images) {
    if (image.id.empty()) throw ValidationError("image with empty id");
    if (!ids.insert(image.id).second) throw ValidationError("duplicate image id '" + image.id + "'");
    if (image.width <= 0 || image.height <= 0) {
      throw ValidationError("image '" + image.id + "' has non-positive dimensions");
    }
    std::set<std::string> labels;
    for (const auto& l : image.gt_labels) {
      if (!vocabulary.count(l)) {
        throw ValidationError("image '" + image.id + "': label '" + l + "' is not in the vocabulary");
      }
      if (!labels.insert(l).second) {
        throw ValidationError("image '" + image.id + "': duplicate label '" + l + "'");
      }
    }
    for (const auto& gt : image.gt_boxes) {
      if (!labels.count(gt.label)) {
        throw ValidationError("image '" + image.id + "': box label '" + gt.label +
                              "' is not among its gt labels");
      }
      if (!gt.box.is_valid()) {
        throw ValidationError("image '" + image.id + "': degenerate box " + to_string(gt.box));
      }
      if (!gt.box.within(image.width, image.height)) {
        throw ValidationError("image '" + image.id + "': box " + to_string(gt.box) +
                              " outside the image");
      }
    }
  }
}

namespace vocab {

const std::vector<std::string>& artdl() {
  static const std::vector<std::string> classes = {
      "Anthony of Padua", "John the Baptist",      "Paul the Apostle", "Francis of Assisi",
      "Mary Magdalene",   "Saint Jerome",          "Saint Dominic",    "Mary, mother of Jesus",
      "Saint Peter",      "Saint Sebastian",
  };
  return classes;
}

const std::vector<std::string>& iconart() {
  static const std::vector<std::string> classes = {
      "person", "crucifixion of jesus", "angel", "mary", "baby", "naked person", "ruins",
  };
  return classes;
}

std::optional<std::vector<std::string>> builtin(const std::string& name) {
  if (name == "artdl") return artdl();
  if (name == "iconart") return iconart();
  return std::nullopt;
}

}  // namespace vocab

namespace {

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("box must be [x0, y0, x1, y1]");
  return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

DatasetManifest manifest_from_json(const json& doc) {
  DatasetManifest m;
  try {
    m.name = doc.value("name", std::string{});
    const json& classes = doc.at("classes");
    if (classes.is_string()) {
      auto name = classes.get<std::string>();
      if (!name.empty() && name.front() == '@') name.erase(0, 1);
      auto builtin = vocab::builtin(name);
      if (!builtin) throw ValidationError("unknown built-in vocabulary '" + name + "'");
      m.classes = std::move(*builtin);
    } else {
      m.classes = classes.get<std::vector<std::string>>();
    }
    for (const auto& img : doc.at("images")) {
      ImageRecord r;
      r.id = img.at("id").get<std::string>();
      r.width = img.at("width").get<int>();
      r.height = img.at("height").get<int>();
      r.gt_labels = img.value("gt_labels", std::vector<std::string>{});
      if (img.contains("gt_boxes")) {
        for (const auto& gt : img.at("gt_boxes")) {
          r.gt_boxes.push_back({gt.at("label").get<std::string>(), box_from_json(gt.at("box"))});
        }
      }
      m.images.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  m.validate();
  return m;
}

json manifest_to_json(const DatasetManifest& manifest) {
  json images = json::array();
  for (const auto& r : manifest.images) {
    json boxes = json::array();
    for (const auto& gt : r.gt_boxes) {
      boxes.push_back({{"label", gt.label}, {"box", {gt.box.x0, gt.box.y0, gt.box.x1, gt.box.y1}}});
    }
    images.push_back({{"id", r.id},
                      {"width", r.width},
                      {"height", r.height},
                      {"gt_labels", r.gt_labels},
                      {"gt_boxes", boxes}});
  }
  return {{"name", manifest.name}, {"classes", manifest.classes}, {"images", images}};
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  return manifest_from_json(doc);
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  manifest.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << manifest_to_json(manifest).dump(1) << '\n';
}

}  // namespace nada::dataio

#include "nada/evalkit.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <sstream>

namespace nada::evalkit {

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::size_t label_width(const EvalReport& r) {
  std::size_t w = 5;
  for (const auto& c : r.detection) w = std::max(w, c.label.size());
  for (const auto& c : r.classification) w = std::max(w, c.label.size());
  return w + 2;
}

}  // namespace

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  const auto w = label_width(r);
  out << "# dataset " << r.dataset << ": " << r.images << " images, " << r.ground_truth_boxes
      << " gt boxes, " << r.detections << " detections\n";
  out << "# protocol: all-point interpolated AP, greedy matching at IoU >= 0.5, "
         "macro over classes with ground truth\n";
  if (!r.detection.empty()) {
    out << pad("class", w) << "gts    dets   tp     AP50\n";
    for (const auto& c : r.detection) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%-6zu %-6zu %-6zu ", c.num_gt, c.num_detections,
                    c.true_positives);
      out << pad(c.label, w) << buf << fmt(c.ap) << '\n';
    }
    out << pad("macro", w) << std::string(21, ' ') << fmt(r.macro_ap50) << '\n';
  }
  if (!r.classification.empty()) {
    out << pad("class", w) << "pos    P      R      F1     AP\n";
    for (const auto& c : r.classification) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%-6zu %.3f  %.3f  %.3f  ", c.positives, c.precision,
                    c.recall, c.f1);
      out << pad(c.label, w) << buf << fmt(c.ap) << '\n';
    }
    out << pad("macro", w) << "       " << fmt(r.macro_precision) << "  " << fmt(r.macro_recall)
        << "  " << fmt(r.macro_f1) << "  " << fmt(r.macro_ap) << '\n';
  }
  return out.str();
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json doc;
  doc["dataset"] = r.dataset;
  doc["protocol"] = {{"interpolation", "all-point"},
                     {"matching", "greedy"},
                     {"iou_threshold", kIouThreshold}};
  doc["counts"] = {{"images", r.images},
                   {"gt_boxes", r.ground_truth_boxes},
                   {"detections", r.detections}};
  if (!r.detection.empty()) {
    auto rows = nlohmann::json::array();
    for (const auto& c : r.detection) {
      rows.push_back({{"label", c.label},
                      {"gts", c.num_gt},
                      {"detections", c.num_detections},
                      {"tp", c.true_positives},
                      {"ap50", opt(c.ap)}});
    }
    doc["detection"] = {{"classes", rows}, {"macro_ap50", opt(r.macro_ap50)}};
  }
  if (!r.classification.empty()) {
    auto rows = nlohmann::json::array();
    for (const auto& c : r.classification) {
      rows.push_back({{"label", c.label},
                      {"positives", c.positives},
                      {"tp", c.tp},
                      {"fp", c.fp},
                      {"fn", c.fn},
                      {"precision", c.precision},
                      {"recall", c.recall},
                      {"f1", c.f1},
                      {"ap", opt(c.ap)}});
    }
    doc["classification"] = {{"classes", rows},
                             {"macro_precision", opt(r.macro_precision)},
                             {"macro_recall", opt(r.macro_recall)},
                             {"macro_f1", opt(r.macro_f1)},
                             {"macro_ap", opt(r.macro_ap)}};
  }
  return doc;
}

}  // namespace nada::evalkit

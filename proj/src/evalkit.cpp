#include "nada/evalkit.hpp"

#include "nada/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace nada::evalkit {

double iou(const Box& a, const Box& b) {
  if (!a.is_valid() || !b.is_valid()) throw ValidationError("IoU of a degenerate box");
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

void sort_by_confidence(std::vector<Detection>& detections) {
  std::stable_sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.image_id < b.image_id;
  });
}

std::vector<bool> match_detections(const std::vector<Detection>& ranked,
                                   const std::vector<GroundTruth>& ground_truth,
                                   double iou_threshold) {
  std::vector<bool> claimed(ground_truth.size(), false);
  std::vector<bool> flags;
  flags.reserve(ranked.size());
  for (const auto& det : ranked) {
    double best = -1.0;
    std::size_t best_index = ground_truth.size();
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (claimed[g] || ground_truth[g].image_id != det.image_id) continue;
      const double overlap = iou(det.box, ground_truth[g].box);
      if (overlap > best) {
        best = overlap;
        best_index = g;
      }
    }
    const bool tp = best_index < ground_truth.size() && best >= iou_threshold;
    if (tp) claimed[best_index] = true;
    flags.push_back(tp);
  }
  return flags;
}

std::optional<double> average_precision(const std::vector<bool>& flags, std::size_t num_gt) {
  if (num_gt == 0) {
    if (flags.empty()) return std::nullopt;
    return 0.0;
  }
  const std::size_t n = flags.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flags[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  // interpolated precision: running max from the right
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

namespace {

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void require_known(const dataio::DatasetManifest& manifest, const std::string& label,
                   const std::string& image_id) {
  if (!manifest.has_class(label)) {
    throw ValidationError("unknown label '" + label + "' for image '" + image_id + "'");
  }
}

}  // namespace

EvalReport detection_ap50(const std::vector<Detection>& detections,
                          const dataio::DatasetManifest& manifest, double iou_threshold) {
  EvalReport report;
  report.dataset = manifest.name;
  report.images = manifest.images.size();
  report.detections = detections.size();

  std::map<std::string, std::vector<Detection>> by_class;
  for (const auto& d : detections) {
    require_known(manifest, d.label, d.image_id);
    if (!manifest.find_image(d.image_id)) {
      throw ValidationError("detection for unknown image '" + d.image_id + "'");
    }
    by_class[d.label].push_back(d);
  }
  std::map<std::string, std::vector<GroundTruth>> gts;
  for (const auto& image : manifest.images) {
    for (const auto& gt : image.gt_boxes) {
      gts[gt.label].push_back({image.id, gt.box});
      ++report.ground_truth_boxes;
    }
  }

  std::vector<double> per_class;
  for (const auto& label : manifest.classes) {
    ClassDetection row;
    row.label = label;
    auto& dets = by_class[label];
    const auto& truth = gts[label];
    sort_by_confidence(dets);
    const auto flags = match_detections(dets, truth, iou_threshold);
    row.num_gt = truth.size();
    row.num_detections = dets.size();
    row.true_positives = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    row.ap = average_precision(flags, truth.size());
    if (row.num_gt > 0 && row.ap) per_class.push_back(*row.ap);
    report.detection.push_back(std::move(row));
  }
  report.macro_ap50 = mean_of(per_class);
  return report;
}

EvalReport classification_metrics(const std::vector<ProposalSet>& proposals,
                                  const dataio::DatasetManifest& manifest) {
  EvalReport report;
  report.dataset = manifest.name;
  report.images = manifest.images.size();

  std::map<std::string, const ProposalSet*> by_image;
  for (const auto& p : proposals) {
    if (!manifest.find_image(p.image_id)) {
      throw ValidationError("proposals for unknown image '" + p.image_id + "'");
    }
    for (const auto& e : p.entries) require_known(manifest, e.label, p.image_id);
    if (!by_image.emplace(p.image_id, &p).second) {
      throw ValidationError("two proposal sets for image '" + p.image_id + "'");
    }
  }

  std::vector<double> ps, rs, fs, aps;
  for (const auto& label : manifest.classes) {
    ClassClassification row;
    row.label = label;
    std::vector<std::pair<double, bool>> ranking;  // (score, is positive), manifest order
    for (const auto& image : manifest.images) {
      const bool positive =
          std::find(image.gt_labels.begin(), image.gt_labels.end(), label) != image.gt_labels.end();
      const auto it = by_image.find(image.id);
      const auto score = it == by_image.end() ? std::nullopt : it->second->score(label);
      if (positive) ++row.positives;
      if (score && positive) ++row.tp;
      if (score && !positive) ++row.fp;
      if (!score && positive) ++row.fn;
      ranking.emplace_back(score.value_or(0.0), positive);
    }
    row.precision = row.tp + row.fp > 0 ? double(row.tp) / double(row.tp + row.fp) : 0.0;
    row.recall = row.tp + row.fn > 0 ? double(row.tp) / double(row.tp + row.fn) : 0.0;
    row.f1 = row.precision + row.recall > 0
                 ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                 : 0.0;
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<bool> flags;
    for (const auto& [score, positive] : ranking) flags.push_back(positive);
    row.ap = average_precision(flags, row.positives);
    if (row.positives > 0) {
      ps.push_back(row.precision);
      rs.push_back(row.recall);
      fs.push_back(row.f1);
      aps.push_back(*row.ap);
    }
    report.classification.push_back(std::move(row));
  }
  report.macro_precision = mean_of(ps);
  report.macro_recall = mean_of(rs);
  report.macro_f1 = mean_of(fs);
  report.macro_ap = mean_of(aps);
  return report;
}

}  // namespace nada::evalkit

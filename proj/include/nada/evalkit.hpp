#pragma once

#include "nada/manifest.hpp"
#include "nada/records.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nada::evalkit {

inline constexpr double kIouThreshold = 0.5;

/// Intersection over union; throws ValidationError on a degenerate box.
double iou(const Box& a, const Box& b);

/// Descending confidence; ties by image id, then by input position.
void sort_by_confidence(std::vector<Detection>& detections);

struct GroundTruth {
  std::string image_id;
  Box box;
};

/// Greedy matching of confidence-ranked detections of one class. Each
/// detection takes the still-unclaimed ground truth of its image with the
/// highest IoU (lowest index on ties); it is a true positive iff that IoU
/// reaches `iou_threshold`. Returns one flag per detection, true = TP.
std::vector<bool> match_detections(const std::vector<Detection>& ranked,
                                   const std::vector<GroundTruth>& ground_truth,
                                   double iou_threshold = kIouThreshold);

/// All-point interpolated area under the precision-recall curve of ranked
/// TP/FP flags. Undefined (nullopt) when there is no ground truth and no
/// detection; 0 when there is no ground truth but there are detections.
std::optional<double> average_precision(const std::vector<bool>& flags, std::size_t num_gt);

struct ClassDetection {
  std::string label;
  std::size_t num_gt = 0;
  std::size_t num_detections = 0;
  std::size_t true_positives = 0;
  std::optional<double> ap;
};

struct ClassClassification {
  std::string label;
  std::size_t positives = 0;  // images with the class in ground truth
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> ap;
};

struct EvalReport {
  std::string dataset;
  std::size_t images = 0;
  std::size_t ground_truth_boxes = 0;
  std::size_t detections = 0;

  std::vector<ClassDetection> detection;  // vocabulary order
  std::optional<double> macro_ap50;

  std::vector<ClassClassification> classification;  // vocabulary order
  std::optional<double> macro_precision;
  std::optional<double> macro_recall;
  std::optional<double> macro_f1;
  std::optional<double> macro_ap;
};

/// Per-class AP at IoU 0.5 over the whole split; the macro mean covers
/// classes with at least one ground-truth box.
EvalReport detection_ap50(const std::vector<Detection>& detections,
                          const dataio::DatasetManifest& manifest,
                          double iou_threshold = kIouThreshold);

/// Per-class precision/recall/F1 of the proposals against image labels, and
/// classification AP of images ranked by proposal score (0 when not proposed,
/// manifest order among ties). Macro means cover classes with positives.
EvalReport classification_metrics(const std::vector<ProposalSet>& proposals,
                                  const dataio::DatasetManifest& manifest);

/// Per-class table plus macro row, with a header stating the protocol.
std::string format_report(const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace nada::evalkit

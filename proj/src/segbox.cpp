#include "nada/segbox.hpp"

#include "nada/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace nada::segbox {

void ExtractionConfig::validate() const {
  if (mode == ThresholdMode::Fixed && !(fixed_threshold > 0.0 && fixed_threshold < 1.0)) {
    throw ValidationError("fixed threshold must lie in (0,1)");
  }
  if (!(min_region_area > 0.0 && min_region_area < 1.0)) {
    throw ValidationError("min-region-area fraction must lie in (0,1)");
  }
  if (!(marker_min_distance > 0.0 && marker_min_distance < 1.0)) {
    throw ValidationError("marker min-distance fraction must lie in (0,1)");
  }
}

int histogram_bin(double value, int bins) {
  const double scaled = std::floor(value * bins);
  return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(bins - 1)));
}

double otsu_threshold(const GridD& map, int bins) {
  if (bins < 2) throw ValidationError("Otsu needs at least two bins");
  if (map.size() == 0) return 0.0;

  std::vector<std::int64_t> hist(static_cast<std::size_t>(bins), 0);
  for (Index i = 0; i < map.size(); ++i) ++hist[static_cast<std::size_t>(histogram_bin(map.data()[i], bins))];

  std::int64_t total = 0;
  std::int64_t total_sum = 0;
  for (int b = 0; b < bins; ++b) {
    total += hist[static_cast<std::size_t>(b)];
    total_sum += b * hist[static_cast<std::size_t>(b)];
  }

  // Candidate edge k puts bins [0,k) below and [k,bins) above. With counts
  // and bin-index sums kept in integers, between-class variance is
  // (N*S0 - N0*S)^2 / (N^2 * N0 * N1); the constant N^2 is dropped.
  std::int64_t below = 0;
  std::int64_t below_sum = 0;
  double best = -1.0;
  int best_edge = -1;
  for (int k = 1; k < bins; ++k) {
    below += hist[static_cast<std::size_t>(k - 1)];
    below_sum += (k - 1) * hist[static_cast<std::size_t>(k - 1)];
    const std::int64_t above = total - below;
    if (below == 0 || above == 0) continue;
    const double diff = static_cast<double>(total * below_sum - below * total_sum);
    const double score = diff * diff / (static_cast<double>(below) * static_cast<double>(above));
    if (score > best) {
      best = score;
      best_edge = k;
    }
  }
  if (best_edge < 0) return map.maxCoeff();
  return static_cast<double>(best_edge) / bins;
}

BinaryMask binarize(const GridD& map, double threshold) {
  return {map > threshold, threshold};
}

std::vector<CellBox> region_extents(const RegionLabeling& labeling) {
  std::vector<CellBox> boxes(static_cast<std::size_t>(labeling.count));
  for (int id = 1; id <= labeling.count; ++id) {
    auto& b = boxes[static_cast<std::size_t>(id - 1)];
    b.region = id;
    b.row0 = labeling.ids.rows();
    b.col0 = labeling.ids.cols();
    b.row1 = -1;
    b.col1 = -1;
  }
  for (Index r = 0; r < labeling.ids.rows(); ++r) {
    for (Index c = 0; c < labeling.ids.cols(); ++c) {
      const int id = labeling.ids(r, c);
      if (id <= 0) continue;
      auto& b = boxes[static_cast<std::size_t>(id - 1)];
      b.row0 = std::min(b.row0, r);
      b.col0 = std::min(b.col0, c);
      b.row1 = std::max(b.row1, r);
      b.col1 = std::max(b.col1, c);
      ++b.area;
    }
  }
  std::erase_if(boxes, [](const CellBox& b) { return b.area == 0; });
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const CellBox& a, const CellBox& b) { return a.area > b.area; });
  return boxes;
}

namespace {

std::vector<CellBox> surviving_extents(const RegionLabeling& labeling, double min_area_fraction) {
  const double min_area =
      min_area_fraction * static_cast<double>(labeling.ids.rows() * labeling.ids.cols());
  auto extents = region_extents(labeling);
  std::erase_if(extents, [&](const CellBox& b) { return static_cast<double>(b.area) < min_area; });
  return extents;
}

Box scale_cells(const CellBox& cells, GridSize grid, double image_width, double image_height) {
  const double sx = image_width / static_cast<double>(grid.cols);
  const double sy = image_height / static_cast<double>(grid.rows);
  Box box{static_cast<double>(cells.col0) * sx, static_cast<double>(cells.row0) * sy,
          static_cast<double>(cells.col1 + 1) * sx, static_cast<double>(cells.row1 + 1) * sy};
  // The last cell edge is the image edge; pin it against rounding.
  if (cells.col1 + 1 == grid.cols) box.x1 = image_width;
  if (cells.row1 + 1 == grid.rows) box.y1 = image_height;
  return box;
}

}  // namespace

std::vector<Box> regions_to_boxes(const RegionLabeling& labeling, double image_width,
                                  double image_height, double min_area_fraction) {
  if (!(image_width > 0 && image_height > 0)) throw ValidationError("image dims must be positive");
  const GridSize grid{labeling.ids.rows(), labeling.ids.cols()};
  std::vector<Box> boxes;
  for (const auto& cells : surviving_extents(labeling, min_area_fraction)) {
    boxes.push_back(scale_cells(cells, grid, image_width, image_height));
  }
  return boxes;
}

Extraction extract(const GridD& map, double image_width, double image_height,
                   const ExtractionConfig& config) {
  config.validate();
  if (!(image_width > 0 && image_height > 0)) throw ValidationError("image dims must be positive");
  Extraction out;
  const GridD work = config.normalize ? normalize_map(map) : map;
  out.threshold =
      config.mode == ThresholdMode::Otsu ? otsu_threshold(work) : config.fixed_threshold;
  out.mask = binarize(work, out.threshold);
  out.regions = watershed_regions(work, out.mask, config);
  const GridSize grid{map.rows(), map.cols()};
  for (const auto& cells : surviving_extents(out.regions, config.min_region_area)) {
    const double saliency =
        map.block(cells.row0, cells.col0, cells.row1 - cells.row0 + 1, cells.col1 - cells.col0 + 1)
            .mean();
    out.boxes.push_back({scale_cells(cells, grid, image_width, image_height), saliency, cells});
  }
  return out;
}

std::vector<ExtractedBox> extract_boxes(const GridD& map, double image_width, double image_height,
                                        const ExtractionConfig& config) {
  return extract(map, image_width, image_height, config).boxes;
}

}  // namespace nada::segbox

#pragma once

#include "nada/types.hpp"

#include <vector>

namespace nada::segbox {

enum class ThresholdMode { Otsu, Fixed };

struct ExtractionConfig {
  ThresholdMode mode = ThresholdMode::Otsu;
  double fixed_threshold = 0.5;       // used when mode == Fixed, in (0,1)
  double min_region_area = 0.005;     // fraction of the grid area
  double marker_min_distance = 0.125; // fraction of max(H, W)
  bool normalize = true;

  void validate() const;
};

struct BinaryMask {
  GridB foreground;
  double threshold = 0.0;

  Index count() const { return foreground.count(); }
};

/// Region ids per pixel, 0 for background, 1..count otherwise.
struct RegionLabeling {
  GridI ids;
  int count = 0;
};

/// Inclusive cell range of a region in grid coordinates.
struct CellBox {
  Index row0 = 0;
  Index col0 = 0;
  Index row1 = 0;
  Index col1 = 0;
  Index area = 0;  // pixels in the region, not in the box
  int region = 0;
};

struct ExtractedBox {
  Box box;          // image pixels
  double saliency;  // mean of the input map over the box's cells
  CellBox cells;
};

/// Every intermediate of one extraction; `extract_boxes` keeps only `boxes`.
struct Extraction {
  double threshold = 0.0;
  BinaryMask mask;
  RegionLabeling regions;
  std::vector<ExtractedBox> boxes;
};

/// Min-max rescale to [0,1]; a constant map is returned unchanged.
template <typename Derived>
GridD normalize_map(const Eigen::DenseBase<Derived>& map) {
  GridD m = map.derived().template cast<double>();
  if (m.size() == 0) return m;
  const double lo = m.minCoeff();
  const double hi = m.maxCoeff();
  if (!(hi > lo)) return m;
  if (lo == 0.0 && hi == 1.0) return m;
  return (m - lo) / (hi - lo);
}

/// Histogram bin of a value in [0,1] for an n-bin histogram.
int histogram_bin(double value, int bins);

/// Otsu's threshold over an n-bin histogram of a [0,1] map: the bin edge k/n
/// maximizing between-class variance, lowest edge on ties. When no edge splits
/// the histogram into two non-empty classes the map maximum is returned, so
/// binarization yields an empty foreground.
double otsu_threshold(const GridD& map, int bins = 256);

/// Foreground iff value > threshold.
BinaryMask binarize(const GridD& map, double threshold);

/// Euclidean distance from every foreground pixel to the nearest background
/// pixel; cells outside the grid count as background. Zero on background.
GridD distance_transform(const GridB& foreground);

/// 8-connected components of the foreground, ids in raster order of first pixel.
RegionLabeling connected_components(const GridB& foreground);

/// Marker-based watershed on the negated distance transform, restricted to
/// the foreground. Markers are distance-transform peaks (a flat plateau counts
/// as one) at least marker_min_distance * max(H, W) apart within a component.
/// Every foreground pixel receives exactly one region.
RegionLabeling watershed_regions(const GridD& map, const BinaryMask& mask,
                                 const ExtractionConfig& config);

/// Tight cell extents of every region, largest region first (ties by id).
std::vector<CellBox> region_extents(const RegionLabeling& labeling);

/// Region boxes scaled to image pixels; regions smaller than
/// `min_area_fraction` of the grid are dropped. Largest region first.
std::vector<Box> regions_to_boxes(const RegionLabeling& labeling, double image_width,
                                  double image_height, double min_area_fraction);

Extraction extract(const GridD& map, double image_width, double image_height,
                   const ExtractionConfig& config);

std::vector<ExtractedBox> extract_boxes(const GridD& map, double image_width, double image_height,
                                        const ExtractionConfig& config);

}  // namespace nada::segbox

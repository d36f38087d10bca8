#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>

namespace nada {

using Index = Eigen::Index;

/// Row-major dense grid; attention maps and label maps are stored this way so
/// the flat layout matches the on-disk payload order.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GridF = Grid<float>;
using GridD = Grid<double>;
using GridB = Grid<bool>;
using GridI = Grid<std::int32_t>;

struct GridSize {
  Index rows = 0;
  Index cols = 0;

  Index area() const { return rows * cols; }
  friend bool operator==(const GridSize&, const GridSize&) = default;
};

/// Axis-aligned box in pixel corner convention, x0 < x1 and y0 < y1.
struct Box {
  double x0 = 0;
  double y0 = 0;
  double x1 = 0;
  double y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool is_valid() const { return x0 < x1 && y0 < y1; }
  bool within(double image_width, double image_height) const {
    return x0 >= 0 && y0 >= 0 && x1 <= image_width && y1 <= image_height;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

std::string to_string(const Box& box);

}  // namespace nada

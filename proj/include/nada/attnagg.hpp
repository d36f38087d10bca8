#pragma once

#include "nada/attention_stack.hpp"
#include "nada/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace nada::attnagg {

namespace detail {

struct Tap {
  Index lo;
  Index hi;
  double frac;
};

// Half-pixel-centre sampling positions, clamped at the borders.
inline std::vector<Tap> bilinear_taps(Index src, Index dst) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (Index i = 0; i < dst; ++i) {
    double x = (static_cast<double>(i) + 0.5) * scale - 0.5;
    x = std::clamp(x, 0.0, static_cast<double>(src - 1));
    const auto lo = static_cast<Index>(std::floor(x));
    const Index hi = std::min(lo + 1, src - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, x - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace detail

/// Bilinear resampling of any dense 2-D expression to rows x cols, evaluated
/// in double. Same-size input is copied exactly. Each output is a convex
/// combination of inputs, so min/max are preserved.
template <typename Derived>
GridD resize_bilinear(const Eigen::DenseBase<Derived>& src, Index rows, Index cols) {
  if (src.rows() == rows && src.cols() == cols) return src.derived().template cast<double>();
  const auto ys = detail::bilinear_taps(src.rows(), rows);
  const auto xs = detail::bilinear_taps(src.cols(), cols);
  GridD out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& ty = ys[static_cast<std::size_t>(r)];
    for (Index c = 0; c < cols; ++c) {
      const auto& tx = xs[static_cast<std::size_t>(c)];
      const double a = static_cast<double>(src(ty.lo, tx.lo));
      const double b = static_cast<double>(src(ty.lo, tx.hi));
      const double d = static_cast<double>(src(ty.hi, tx.lo));
      const double e = static_cast<double>(src(ty.hi, tx.hi));
      const double top = a + (b - a) * tx.frac;
      const double bottom = d + (e - d) * tx.frac;
      const double lo = std::min(std::min(a, b), std::min(d, e));
      const double hi = std::max(std::max(a, b), std::max(d, e));
      out(r, c) = std::clamp(top + (bottom - top) * ty.frac, lo, hi);
    }
  }
  return out;
}

/// Per-token map A_t averaged over all timesteps and blocks.
struct TokenMap {
  std::uint32_t token = 0;
  GridD values;
};

/// Aggregated, clamped map A_l for one label.
struct LabelMap {
  std::string label;
  std::string image_id;
  GridD values;
};

/// Every block resampled to the common (largest) grid.
struct AlignedStack {
  std::string image_id;
  std::uint32_t steps = 0;
  std::uint32_t blocks = 0;
  std::uint32_t tokens = 0;
  GridSize size;
  std::map<std::string, dataio::TokenSpan> label_spans;
  std::vector<GridD> maps;  // (j * K + k) * T + t

  const GridD& map(std::uint32_t j, std::uint32_t k, std::uint32_t t) const {
    return maps[(static_cast<std::size_t>(j) * blocks + k) * tokens + t];
  }
};

/// Largest block grid in the stack (max rows, max cols).
GridSize alignment_target(const dataio::AttentionStack& stack);

AlignedStack align_maps(const dataio::AttentionStack& stack);

/// A_t = (1/JK) sum_{j,k} A'_{jkt}. Per pixel the J*K values are summed in
/// ascending order, so the result does not depend on block order.
TokenMap average_token_maps(const AlignedStack& stack, std::uint32_t token);
/// Same result as aligning first, computed one token at a time.
TokenMap average_token_maps(const dataio::AttentionStack& stack, std::uint32_t token);

/// A_l = clamp_[0,1]( mean_{t in span(l)} A_t ).
LabelMap label_map(const AlignedStack& stack, const std::string& label);
LabelMap label_map(const dataio::AttentionStack& stack, const std::string& label);

}  // namespace nada::attnagg

#include "nada/segbox.hpp"

#include "nada/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace nada::segbox {
namespace {

// Stand-in for "infinitely far"; the padded background border keeps every
// true distance far below it.
constexpr double kFar = 1e20;

// One-dimensional squared distance transform of a sampled function: lower
// envelope of parabolas rooted at each sample (Felzenszwalb & Huttenlocher).
void squared_edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                    std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const auto at = [](auto& vec, int i) -> auto& { return vec[static_cast<std::size_t>(i)]; };
  int k = 0;
  at(v, 0) = 0;
  at(z, 0) = -std::numeric_limits<double>::infinity();
  at(z, 1) = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = 0;
    while (true) {
      const int p = at(v, k);
      s = ((at(f, q) + double(q) * q) - (at(f, p) + double(p) * p)) / (2.0 * (q - p));
      if (s > at(z, k)) break;
      --k;
    }
    ++k;
    at(v, k) = q;
    at(z, k) = s;
    at(z, k + 1) = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (at(z, k + 1) < q) ++k;
    const int p = at(v, k);
    at(d, q) = double(q - p) * (q - p) + at(f, p);
  }
}

constexpr int kNeighbours[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                   {0, 1},   {1, -1}, {1, 0},  {1, 1}};

}  // namespace

GridD distance_transform(const GridB& foreground) {
  const Index rows = foreground.rows() + 2;
  const Index cols = foreground.cols() + 2;
  // padded border of background cells
  GridD sq = GridD::Zero(rows, cols);
  sq.block(1, 1, foreground.rows(), foreground.cols()) =
      foreground.select(GridD::Constant(foreground.rows(), foreground.cols(), kFar), 0.0);

  const std::size_t longest = static_cast<std::size_t>(std::max(rows, cols));
  std::vector<double> f(longest), d(longest), z(longest + 1);
  std::vector<int> v(longest);

  for (Index c = 0; c < cols; ++c) {
    f.resize(static_cast<std::size_t>(rows));
    d.resize(static_cast<std::size_t>(rows));
    for (Index r = 0; r < rows; ++r) f[static_cast<std::size_t>(r)] = sq(r, c);
    squared_edt_1d(f, d, v, z);
    for (Index r = 0; r < rows; ++r) sq(r, c) = d[static_cast<std::size_t>(r)];
  }
  for (Index r = 0; r < rows; ++r) {
    f.resize(static_cast<std::size_t>(cols));
    d.resize(static_cast<std::size_t>(cols));
    for (Index c = 0; c < cols; ++c) f[static_cast<std::size_t>(c)] = sq(r, c);
    squared_edt_1d(f, d, v, z);
    for (Index c = 0; c < cols; ++c) sq(r, c) = d[static_cast<std::size_t>(c)];
  }
  return sq.block(1, 1, foreground.rows(), foreground.cols()).sqrt();
}

RegionLabeling connected_components(const GridB& foreground) {
  RegionLabeling out{GridI::Zero(foreground.rows(), foreground.cols()), 0};
  std::vector<std::pair<Index, Index>> stack;
  for (Index r0 = 0; r0 < foreground.rows(); ++r0) {
    for (Index c0 = 0; c0 < foreground.cols(); ++c0) {
      if (!foreground(r0, c0) || out.ids(r0, c0) != 0) continue;
      const int id = ++out.count;
      out.ids(r0, c0) = id;
      stack.assign(1, {r0, c0});
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        for (const auto& n : kNeighbours) {
          const Index rr = r + n[0];
          const Index cc = c + n[1];
          if (rr < 0 || cc < 0 || rr >= foreground.rows() || cc >= foreground.cols()) continue;
          if (!foreground(rr, cc) || out.ids(rr, cc) != 0) continue;
          out.ids(rr, cc) = id;
          stack.push_back({rr, cc});
        }
      }
    }
  }
  return out;
}

RegionLabeling watershed_regions(const GridD& map, const BinaryMask& mask,
                                 const ExtractionConfig& config) {
  const GridB& fg = mask.foreground;
  if (map.rows() != fg.rows() || map.cols() != fg.cols()) {
    throw ValidationError("mask dims do not match map dims");
  }
  const Index rows = fg.rows();
  const Index cols = fg.cols();
  RegionLabeling out{GridI::Zero(rows, cols), 0};
  if (!fg.any()) return out;

  const RegionLabeling components = connected_components(fg);
  const GridD dist = distance_transform(fg);
  const auto radius = std::max<Index>(
      1, static_cast<Index>(std::lround(config.marker_min_distance *
                                        static_cast<double>(std::max(rows, cols)))));

  // Candidate peaks: maximal within a (2r+1)^2 window of their own component.
  GridB candidate = GridB::Constant(rows, cols, false);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (!fg(r, c)) continue;
      const int comp = components.ids(r, c);
      const double value = dist(r, c);
      bool peak = true;
      for (Index rr = std::max<Index>(0, r - radius); peak && rr <= std::min(rows - 1, r + radius); ++rr) {
        for (Index cc = std::max<Index>(0, c - radius); cc <= std::min(cols - 1, c + radius); ++cc) {
          if (components.ids(rr, cc) == comp && dist(rr, cc) > value) {
            peak = false;
            break;
          }
        }
      }
      candidate(r, c) = peak;
    }
  }

  // A connected plateau of equal-valued candidates is one peak, represented
  // by its first pixel in raster order.
  struct Peak {
    double value;
    Index r;
    Index c;
    std::vector<std::pair<Index, Index>> pixels;
  };
  std::vector<Peak> peaks;
  GridB grouped = GridB::Constant(rows, cols, false);
  for (Index r0 = 0; r0 < rows; ++r0) {
    for (Index c0 = 0; c0 < cols; ++c0) {
      if (!candidate(r0, c0) || grouped(r0, c0)) continue;
      Peak p{dist(r0, c0), r0, c0, {{r0, c0}}};
      grouped(r0, c0) = true;
      for (std::size_t i = 0; i < p.pixels.size(); ++i) {
        const auto [r, c] = p.pixels[i];
        for (const auto& n : kNeighbours) {
          const Index rr = r + n[0];
          const Index cc = c + n[1];
          if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
          if (!candidate(rr, cc) || grouped(rr, cc) || dist(rr, cc) != p.value) continue;
          grouped(rr, cc) = true;
          p.pixels.push_back({rr, cc});
        }
      }
      peaks.push_back(std::move(p));
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });

  std::vector<std::vector<const Peak*>> accepted(static_cast<std::size_t>(components.count) + 1);
  const Index min_sq = radius * radius;
  for (const auto& p : peaks) {
    auto& kept = accepted[static_cast<std::size_t>(components.ids(p.r, p.c))];
    const bool far = std::all_of(kept.begin(), kept.end(), [&](const Peak* q) {
      return (p.r - q->r) * (p.r - q->r) + (p.c - q->c) * (p.c - q->c) >= min_sq;
    });
    if (far) kept.push_back(&p);
  }

  std::vector<const Peak*> markers;
  for (const auto& kept : accepted) markers.insert(markers.end(), kept.begin(), kept.end());
  std::sort(markers.begin(), markers.end(),
            [](const Peak* a, const Peak* b) { return a->r != b->r ? a->r < b->r : a->c < b->c; });

  // Priority flood: highest distance first, FIFO among equal distances.
  struct Item {
    double value;
    std::uint64_t seq;
    Index r;
    Index c;
    bool operator<(const Item& o) const {
      return value != o.value ? value < o.value : seq > o.seq;
    }
  };
  std::priority_queue<Item> queue;
  std::uint64_t seq = 0;
  for (const Peak* m : markers) {
    ++out.count;
    for (const auto& [r, c] : m->pixels) {
      out.ids(r, c) = out.count;
      queue.push({m->value, seq++, r, c});
    }
  }
  while (!queue.empty()) {
    const Item it = queue.top();
    queue.pop();
    const int id = out.ids(it.r, it.c);
    for (const auto& n : kNeighbours) {
      const Index rr = it.r + n[0];
      const Index cc = it.c + n[1];
      if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
      if (!fg(rr, cc) || out.ids(rr, cc) != 0) continue;
      out.ids(rr, cc) = id;
      queue.push({dist(rr, cc), seq++, rr, cc});
    }
  }
  return out;
}

}  // namespace nada::segbox

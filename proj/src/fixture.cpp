#include "nada/fixture.hpp"

#include "nada/error.hpp"
#include "nada/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nada::dataio {

void FixtureSpec::validate() const {
  if (classes.empty()) throw ValidationError("fixture needs at least one class");
  if (images < 1) throw ValidationError("fixture needs at least one image");
  if (min_blobs < 1 || max_blobs < min_blobs) throw ValidationError("invalid blob count range");
  if (grid.rows < 4 || grid.cols < 4) throw ValidationError("fixture grid must be at least 4x4");
  if (image_width < 1 || image_height < 1) throw ValidationError("image dims must be positive");
  if (grid.cols > image_width || grid.rows > image_height) {
    throw ValidationError("attention grid larger than the image");
  }
  if (steps < 1 || blocks < 1) throw ValidationError("J and K must be at least 1");
  if (!(noise >= 0.0)) throw ValidationError("noise must be non-negative");
  if (!(min_box_fraction > 0.0 && min_box_fraction <= max_box_fraction && max_box_fraction <= 1.0)) {
    throw ValidationError("invalid box size range");
  }
}

std::string fixture_image_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fx_%04d", index);
  return buf;
}

namespace {

struct Blob {
  std::string label;
  Index row0, col0, row1, col1;  // half-open cell range on the finest grid
};

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> words;
  for (std::string w; is >> w;) words.push_back(w);
  return words;
}

Index draw_side(Rng& rng, Index grid_side, const FixtureSpec& spec) {
  const auto lo = std::max<Index>(2, std::lround(spec.min_box_fraction * grid_side));
  const auto hi = std::max<Index>(lo, std::lround(spec.max_box_fraction * grid_side));
  return rng.uniform_int(lo, std::min(hi, grid_side));
}

// Gaussian bump filling the blob's box: peak at the centre, kFixtureEdgeLevel
// at the edge midpoints, with per-axis spread following the box shape.
void add_blob(GridF& map, const Blob& blob, GridSize finest) {
  const double sy = static_cast<double>(map.rows()) / static_cast<double>(finest.rows);
  const double sx = static_cast<double>(map.cols()) / static_cast<double>(finest.cols);
  const double cy = 0.5 * static_cast<double>(blob.row0 + blob.row1) * sy;
  const double cx = 0.5 * static_cast<double>(blob.col0 + blob.col1) * sx;
  const double hy = 0.5 * static_cast<double>(blob.row1 - blob.row0) * sy;
  const double hx = 0.5 * static_cast<double>(blob.col1 - blob.col0) * sx;
  const double falloff = std::log(1.0 / kFixtureEdgeLevel);
  for (Index r = 0; r < map.rows(); ++r) {
    const double dy = (static_cast<double>(r) + 0.5 - cy) / hy;
    for (Index c = 0; c < map.cols(); ++c) {
      const double dx = (static_cast<double>(c) + 0.5 - cx) / hx;
      const double g = std::exp(-falloff * (dx * dx + dy * dy));
      map(r, c) = std::max(map(r, c), static_cast<float>(kFixtureBackground +
                                                          (kFixturePeak - kFixtureBackground) * g));
    }
  }
}

}  // namespace

FixtureImage synth_fixture_image(const FixtureSpec& spec, int index) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(index)));

  const int max_blobs = std::min<int>(spec.max_blobs, static_cast<int>(spec.classes.size()));
  const int min_blobs = std::min(spec.min_blobs, max_blobs);
  const auto count = static_cast<int>(rng.uniform_int(min_blobs, max_blobs));

  std::vector<std::size_t> order(spec.classes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<Blob> blobs;
  for (int b = 0; b < count; ++b) {
    Blob blob;
    blob.label = spec.classes[order[static_cast<std::size_t>(b)]];
    const Index h = draw_side(rng, spec.grid.rows, spec);
    const Index w = draw_side(rng, spec.grid.cols, spec);
    blob.row0 = rng.uniform_int(0, spec.grid.rows - h);
    blob.col0 = rng.uniform_int(0, spec.grid.cols - w);
    blob.row1 = blob.row0 + h;
    blob.col1 = blob.col0 + w;
    blobs.push_back(std::move(blob));
  }

  FixtureImage out;
  auto& record = out.record;
  record.id = fixture_image_id(index);
  record.width = spec.image_width;
  record.height = spec.image_height;
  const double px = static_cast<double>(spec.image_width) / static_cast<double>(spec.grid.cols);
  const double py = static_cast<double>(spec.image_height) / static_cast<double>(spec.grid.rows);
  for (const auto& blob : blobs) {
    record.gt_labels.push_back(blob.label);
    Box box{static_cast<double>(blob.col0) * px, static_cast<double>(blob.row0) * py,
            static_cast<double>(blob.col1) * px, static_cast<double>(blob.row1) * py};
    if (blob.col1 == spec.grid.cols) box.x1 = spec.image_width;
    if (blob.row1 == spec.grid.rows) box.y1 = spec.image_height;
    record.gt_boxes.push_back({blob.label, box});
  }

  // Prompt "<start> A painting of <l1> and <l2> ... <end>", one token per word.
  std::vector<int> token_blob;  // blob index per token, -1 for non-label tokens
  std::map<std::string, TokenSpan> spans;
  auto push_token = [&](int blob) { token_blob.push_back(blob); };
  push_token(-1);
  for (int i = 0; i < 3; ++i) push_token(-1);
  for (std::size_t b = 0; b < blobs.size(); ++b) {
    if (b > 0) push_token(-1);
    TokenSpan span;
    for (std::size_t w = 0; w < split_words(blobs[b].label).size(); ++w) {
      span.push_back(static_cast<std::uint32_t>(token_blob.size()));
      push_token(static_cast<int>(b));
    }
    spans[blobs[b].label] = std::move(span);
  }
  push_token(-1);

  std::vector<GridSize> sizes;
  for (std::uint32_t k = 0; k < spec.blocks; ++k) {
    const Index div = Index{1} << std::min<std::uint32_t>(k, 20);
    sizes.push_back({std::max<Index>(1, spec.grid.rows / div), std::max<Index>(1, spec.grid.cols / div)});
  }
  auto& stack = out.stack;
  stack = AttentionStack::zeros(record.id, spec.steps, spec.blocks,
                                static_cast<std::uint32_t>(token_blob.size()), sizes);
  stack.label_spans = std::move(spans);

  // Clean profiles per (block, token), then independent noise per (j, k, t).
  std::vector<GridF> clean;
  for (std::uint32_t k = 0; k < spec.blocks; ++k) {
    for (int b : token_blob) {
      GridF m = GridF::Constant(sizes[k].rows, sizes[k].cols, static_cast<float>(kFixtureBackground));
      if (b >= 0) add_blob(m, blobs[static_cast<std::size_t>(b)], spec.grid);
      clean.push_back(std::move(m));
    }
  }
  for (std::uint32_t j = 0; j < spec.steps; ++j) {
    for (std::uint32_t k = 0; k < spec.blocks; ++k) {
      for (std::uint32_t t = 0; t < stack.tokens; ++t) {
        GridF& m = stack.map(j, k, t);
        m = clean[k * stack.tokens + t];
        for (Index i = 0; i < m.size(); ++i) {
          const double v = static_cast<double>(m.data()[i]) + spec.noise * rng.normal();
          m.data()[i] = static_cast<float>(std::max(0.0, v));
        }
      }
    }
  }
  return out;
}

Fixture synth_fixture(const FixtureSpec& spec) {
  spec.validate();
  Fixture fx;
  fx.manifest.name = spec.name;
  fx.manifest.classes = spec.classes;
  for (int i = 0; i < spec.images; ++i) {
    auto image = synth_fixture_image(spec, i);
    fx.manifest.images.push_back(std::move(image.record));
    fx.stacks.push_back(std::move(image.stack));
  }
  fx.manifest.validate();
  return fx;
}

std::vector<std::filesystem::path> write_fixture(const FixtureSpec& spec,
                                                 const std::filesystem::path& dir) {
  spec.validate();
  std::filesystem::create_directories(dir / "stacks");
  DatasetManifest manifest;
  manifest.name = spec.name;
  manifest.classes = spec.classes;
  std::vector<std::filesystem::path> written{dir / "manifest.json"};
  for (int i = 0; i < spec.images; ++i) {
    auto image = synth_fixture_image(spec, i);
    const auto path = dir / "stacks" / (image.record.id + ".nada");
    save_attention_stack(image.stack, path);
    written.push_back(path);
    manifest.images.push_back(std::move(image.record));
  }
  save_manifest(manifest, written.front());
  return written;
}

}  // namespace nada::dataio

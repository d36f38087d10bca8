#pragma once

#include "nada/attention_stack.hpp"
#include "nada/manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nada::dataio {

/// Synthetic attention stacks with known boxes: each labelled object is a
/// Gaussian bump over a low background in the maps of its label's tokens.
struct FixtureSpec {
  int images = 50;
  int min_blobs = 1;
  int max_blobs = 3;
  GridSize grid{64, 64};  // finest block; block k is grid / 2^k
  int image_width = 512;
  int image_height = 512;
  std::vector<std::string> classes;
  std::uint64_t seed = 0;
  std::uint32_t steps = 2;   // J
  std::uint32_t blocks = 2;  // K
  double noise = 0.01;       // stddev of additive per-map noise
  double min_box_fraction = 0.15;  // box side range, fraction of the grid side
  double max_box_fraction = 0.45;
  std::string name = "fixture";

  void validate() const;
};

inline constexpr double kFixtureBackground = 0.01;
inline constexpr double kFixturePeak = 1.0;
/// Profile value (above background, relative to peak) at the box edge midpoints.
inline constexpr double kFixtureEdgeLevel = 0.3;

struct FixtureImage {
  ImageRecord record;
  AttentionStack stack;
};

/// Generates image `index` of the fixture; each image draws from its own
/// seed-derived stream, so images can be produced independently.
FixtureImage synth_fixture_image(const FixtureSpec& spec, int index);

struct Fixture {
  DatasetManifest manifest;
  std::vector<AttentionStack> stacks;
};

Fixture synth_fixture(const FixtureSpec& spec);

/// Writes `<dir>/manifest.json` and `<dir>/stacks/<image id>.nada`, one image
/// at a time. Returns the written paths, manifest first.
std::vector<std::filesystem::path> write_fixture(const FixtureSpec& spec,
                                                 const std::filesystem::path& dir);

std::string fixture_image_id(int index);

}  // namespace nada::dataio

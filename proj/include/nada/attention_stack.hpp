#pragma once

#include "nada/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace nada::dataio {

using TokenSpan = std::vector<std::uint32_t>;

/// Cross-attention maps exported from a diffusion reconstruction: one map per
/// (timestep j, block k, token t), each block with its own grid size.
struct AttentionStack {
  std::string image_id;
  std::uint32_t steps = 0;   // J
  std::uint32_t blocks = 0;  // K
  std::uint32_t tokens = 0;  // T
  std::vector<GridSize> block_sizes;               // one per block
  std::map<std::string, TokenSpan> label_spans;    // label -> token indices in the prompt
  std::vector<GridF> maps;                         // (j * K + k) * T + t

  /// All-zero stack with the given shape and no spans.
  static AttentionStack zeros(std::string image_id, std::uint32_t steps, std::uint32_t blocks,
                              std::uint32_t tokens, std::vector<GridSize> block_sizes);

  std::size_t map_index(std::uint32_t j, std::uint32_t k, std::uint32_t t) const {
    return (static_cast<std::size_t>(j) * blocks + k) * tokens + t;
  }
  const GridF& map(std::uint32_t j, std::uint32_t k, std::uint32_t t) const {
    return maps[map_index(j, k, t)];
  }
  GridF& map(std::uint32_t j, std::uint32_t k, std::uint32_t t) { return maps[map_index(j, k, t)]; }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const AttentionStack& a, const AttentionStack& b);
};

/// Serializes as a kind-1 NADA1 record. The stack is validated before any
/// byte reaches `out`. Returns the number of bytes written.
std::uint64_t write_attention_stack(const AttentionStack& stack, std::ostream& out);
AttentionStack read_attention_stack(std::istream& in);

void save_attention_stack(const AttentionStack& stack, const std::filesystem::path& path);
AttentionStack load_attention_stack(const std::filesystem::path& path);

}  // namespace nada::dataio

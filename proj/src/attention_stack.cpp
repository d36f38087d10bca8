#include "nada/attention_stack.hpp"

#include "nada/binary_io.hpp"
#include "nada/error.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <span>

namespace nada::dataio {

AttentionStack AttentionStack::zeros(std::string image_id, std::uint32_t steps,
                                     std::uint32_t blocks, std::uint32_t tokens,
                                     std::vector<GridSize> block_sizes) {
  AttentionStack s;
  s.image_id = std::move(image_id);
  s.steps = steps;
  s.blocks = blocks;
  s.tokens = tokens;
  s.block_sizes = std::move(block_sizes);
  if (s.block_sizes.size() != blocks) {
    throw ValidationError("block size list does not match block count");
  }
  s.maps.reserve(static_cast<std::size_t>(steps) * blocks * tokens);
  for (std::uint32_t j = 0; j < steps; ++j) {
    for (std::uint32_t k = 0; k < blocks; ++k) {
      for (std::uint32_t t = 0; t < tokens; ++t) {
        s.maps.push_back(GridF::Zero(s.block_sizes[k].rows, s.block_sizes[k].cols));
      }
    }
  }
  return s;
}

void AttentionStack::validate() const {
  if (steps < 1 || blocks < 1 || tokens < 1) {
    throw ValidationError("stack '" + image_id + "': J, K and T must all be at least 1");
  }
  if (block_sizes.size() != blocks) {
    throw ValidationError("stack '" + image_id + "': expected " + std::to_string(blocks) +
                          " block sizes, got " + std::to_string(block_sizes.size()));
  }
  for (const auto& size : block_sizes) {
    if (size.rows < 1 || size.cols < 1) {
      throw ValidationError("stack '" + image_id + "': empty block grid");
    }
  }
  for (const auto& [label, span] : label_spans) {
    if (span.empty()) throw ValidationError("label '" + label + "' has an empty token span");
    for (auto t : span) {
      if (t >= tokens) {
        throw ValidationError("label '" + label + "' token index " + std::to_string(t) +
                              " out of range for T = " + std::to_string(tokens));
      }
    }
  }
  if (maps.size() != static_cast<std::size_t>(steps) * blocks * tokens) {
    throw ValidationError("stack '" + image_id + "': map count does not equal J*K*T");
  }
  for (std::uint32_t j = 0; j < steps; ++j) {
    for (std::uint32_t k = 0; k < blocks; ++k) {
      for (std::uint32_t t = 0; t < tokens; ++t) {
        const GridF& m = map(j, k, t);
        if (m.rows() != block_sizes[k].rows || m.cols() != block_sizes[k].cols) {
          throw ValidationError("map (" + std::to_string(j) + "," + std::to_string(k) + "," +
                                std::to_string(t) + ") does not match its block grid");
        }
        if (!m.isFinite().all()) throw ValidationError("attention map has non-finite values");
        if ((m < 0.0f).any()) throw ValidationError("attention map has negative values");
      }
    }
  }
}

bool operator==(const AttentionStack& a, const AttentionStack& b) {
  if (a.image_id != b.image_id || a.steps != b.steps || a.blocks != b.blocks ||
      a.tokens != b.tokens || a.block_sizes != b.block_sizes || a.label_spans != b.label_spans ||
      a.maps.size() != b.maps.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.maps.size(); ++i) {
    const auto& x = a.maps[i];
    const auto& y = b.maps[i];
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    // bitwise: distinguishes -0.0f from 0.0f and compares NaN payloads
    if (std::memcmp(x.data(), y.data(), sizeof(float) * static_cast<std::size_t>(x.size())) != 0) {
      return false;
    }
  }
  return true;
}

std::uint64_t write_attention_stack(const AttentionStack& stack, std::ostream& out) {
  stack.validate();
  io::ByteWriter w(out);
  w.header(io::RecordKind::AttentionStack);
  w.str(stack.image_id);
  w.u32(stack.steps);
  w.u32(stack.blocks);
  w.u32(stack.tokens);
  for (const auto& size : stack.block_sizes) {
    w.u32(static_cast<std::uint32_t>(size.rows));
    w.u32(static_cast<std::uint32_t>(size.cols));
  }
  w.u32(static_cast<std::uint32_t>(stack.label_spans.size()));
  for (const auto& [label, span] : stack.label_spans) {
    w.str(label);
    w.u32(static_cast<std::uint32_t>(span.size()));
    for (auto t : span) w.u32(t);
  }
  for (const auto& m : stack.maps) {
    w.f32s(std::span<const float>(m.data(), static_cast<std::size_t>(m.size())));
  }
  return w.bytes_written();
}

namespace {

// Bytes left in a seekable stream, or -1 when the stream cannot tell.
std::int64_t remaining_bytes(std::istream& in) {
  const auto here = in.tellg();
  if (here < 0) return -1;
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(here);
  if (end < 0 || !in) {
    in.clear();
    in.seekg(here);
    return -1;
  }
  return static_cast<std::int64_t>(end - here);
}

}  // namespace

AttentionStack read_attention_stack(std::istream& in) {
  io::ByteReader r(in);
  r.expect_kind(io::RecordKind::AttentionStack);
  AttentionStack s;
  s.image_id = r.str();
  s.steps = r.u32();
  s.blocks = r.u32();
  s.tokens = r.u32();
  if (s.steps < 1 || s.blocks < 1 || s.tokens < 1) {
    throw FormatError("stack header has a zero J, K or T");
  }
  s.block_sizes.resize(s.blocks);
  std::uint64_t cells_per_step_token = 0;
  for (auto& size : s.block_sizes) {
    size.rows = r.u32();
    size.cols = r.u32();
    if (size.rows < 1 || size.cols < 1) throw FormatError("stack header has an empty block grid");
    cells_per_step_token += static_cast<std::uint64_t>(size.rows) * size.cols;
  }
  const std::uint32_t label_count = r.u32();
  for (std::uint32_t i = 0; i < label_count; ++i) {
    std::string label = r.str();
    const std::uint32_t n = r.u32();
    if (n > s.tokens) throw FormatError("span of '" + label + "' is longer than T");
    TokenSpan span(n);
    for (auto& t : span) t = r.u32();
    if (!s.label_spans.emplace(std::move(label), std::move(span)).second) {
      throw FormatError("duplicate label in span table");
    }
  }

  const std::uint64_t payload_bytes =
      4ULL * cells_per_step_token * static_cast<std::uint64_t>(s.steps) * s.tokens;
  if (const auto left = remaining_bytes(in); left >= 0 && static_cast<std::uint64_t>(left) < payload_bytes) {
    throw FormatError("truncated payload: expected " + std::to_string(payload_bytes) +
                      " bytes, got " + std::to_string(left));
  }

  s.maps.reserve(static_cast<std::size_t>(s.steps) * s.blocks * s.tokens);
  for (std::uint32_t j = 0; j < s.steps; ++j) {
    for (std::uint32_t k = 0; k < s.blocks; ++k) {
      for (std::uint32_t t = 0; t < s.tokens; ++t) {
        GridF m(s.block_sizes[k].rows, s.block_sizes[k].cols);
        r.f32s(std::span<float>(m.data(), static_cast<std::size_t>(m.size())));
        if (!m.isFinite().all()) throw FormatError("payload contains non-finite values");
        s.maps.push_back(std::move(m));
      }
    }
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid stack: ") + e.what());
  }
  return s;
}

void save_attention_stack(const AttentionStack& stack, const std::filesystem::path& path) {
  stack.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_attention_stack(stack, out);
}

AttentionStack load_attention_stack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_attention_stack(in);
}

}  // namespace nada::dataio

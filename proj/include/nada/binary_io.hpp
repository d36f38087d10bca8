#pragma once

// Little-endian primitives for the NADA1 container shared by attention
// stacks (kind 1), embedding matrices (kind 2) and MLP checkpoints (kind 3).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace nada::io {

inline constexpr std::string_view kMagic = "NADA";
inline constexpr std::uint16_t kVersion = 1;

enum class RecordKind : std::uint16_t {
  AttentionStack = 1,
  EmbeddingMatrix = 2,
  MlpCheckpoint = 3,
};

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  void f32s(std::span<const float> values);
  void f64s(std::span<const double> values);
  /// u16 length prefix followed by the UTF-8 bytes.
  void str(std::string_view s);
  void raw(std::string_view bytes);

  void header(RecordKind kind);

  std::uint64_t bytes_written() const { return written_; }

 private:
  void put(const char* data, std::size_t n);

  std::ostream& out_;
  std::uint64_t written_ = 0;
};

class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  double f64();
  void f32s(std::span<float> out);
  void f64s(std::span<double> out);
  std::string str();

  /// Checks magic and version, returns the kind field.
  RecordKind header();
  void expect_kind(RecordKind expected);

  std::uint64_t bytes_read() const { return read_; }

 private:
  void get(char* data, std::size_t n, const char* what);

  std::istream& in_;
  std::uint64_t read_ = 0;
};

}  // namespace nada::io

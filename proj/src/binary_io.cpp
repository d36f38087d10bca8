#include "nada/binary_io.hpp"

#include "nada/error.hpp"

#include <array>
#include <bit>
#include <istream>
#include <ostream>
#include <vector>

namespace nada::io {
namespace {

template <typename UInt>
void store_le(UInt v, char* dst) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    dst[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
}

template <typename UInt>
UInt load_le(const char* src) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    v |= static_cast<UInt>(static_cast<unsigned char>(src[i])) << (8 * i);
  }
  return v;
}

// Bulk buffers are converted in chunks so multi-megabyte payloads do not
// go through one stream call per value.
constexpr std::size_t kChunk = 4096;

}  // namespace

void ByteWriter::put(const char* data, std::size_t n) {
  out_.write(data, static_cast<std::streamsize>(n));
  if (!out_) throw Error("write failed after " + std::to_string(written_) + " bytes");
  written_ += n;
}

void ByteWriter::u8(std::uint8_t v) {
  const char c = static_cast<char>(v);
  put(&c, 1);
}

void ByteWriter::u16(std::uint16_t v) {
  std::array<char, 2> b;
  store_le(v, b.data());
  put(b.data(), b.size());
}

void ByteWriter::u32(std::uint32_t v) {
  std::array<char, 4> b;
  store_le(v, b.data());
  put(b.data(), b.size());
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f64(double v) {
  std::array<char, 8> b;
  store_le(std::bit_cast<std::uint64_t>(v), b.data());
  put(b.data(), b.size());
}

void ByteWriter::f32s(std::span<const float> values) {
  std::vector<char> buf;
  buf.reserve(kChunk * 4);
  for (std::size_t i = 0; i < values.size(); i += kChunk) {
    const std::size_t n = std::min(kChunk, values.size() - i);
    buf.resize(n * 4);
    for (std::size_t k = 0; k < n; ++k) {
      store_le(std::bit_cast<std::uint32_t>(values[i + k]), buf.data() + 4 * k);
    }
    put(buf.data(), buf.size());
  }
}

void ByteWriter::f64s(std::span<const double> values) {
  std::vector<char> buf;
  buf.reserve(kChunk * 8);
  for (std::size_t i = 0; i < values.size(); i += kChunk) {
    const std::size_t n = std::min(kChunk, values.size() - i);
    buf.resize(n * 8);
    for (std::size_t k = 0; k < n; ++k) {
      store_le(std::bit_cast<std::uint64_t>(values[i + k]), buf.data() + 8 * k);
    }
    put(buf.data(), buf.size());
  }
}

void ByteWriter::str(std::string_view s) {
  if (s.size() > UINT16_MAX) throw ValidationError("string longer than 65535 bytes");
  u16(static_cast<std::uint16_t>(s.size()));
  put(s.data(), s.size());
}

void ByteWriter::raw(std::string_view bytes) { put(bytes.data(), bytes.size()); }

void ByteWriter::header(RecordKind kind) {
  raw(kMagic);
  u16(kVersion);
  u16(static_cast<std::uint16_t>(kind));
}

void ByteReader::get(char* data, std::size_t n, const char* what) {
  in_.read(data, static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got != n) {
    throw FormatError(std::string("truncated ") + what + ": expected " + std::to_string(n) +
                      " bytes at offset " + std::to_string(read_) + ", got " +
                      std::to_string(got));
  }
  read_ += n;
}

std::uint8_t ByteReader::u8() {
  char c;
  get(&c, 1, "u8");
  return static_cast<std::uint8_t>(c);
}

std::uint16_t ByteReader::u16() {
  std::array<char, 2> b;
  get(b.data(), b.size(), "u16");
  return load_le<std::uint16_t>(b.data());
}

std::uint32_t ByteReader::u32() {
  std::array<char, 4> b;
  get(b.data(), b.size(), "u32");
  return load_le<std::uint32_t>(b.data());
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

double ByteReader::f64() {
  std::array<char, 8> b;
  get(b.data(), b.size(), "f64");
  return std::bit_cast<double>(load_le<std::uint64_t>(b.data()));
}

void ByteReader::f32s(std::span<float> out) {
  std::vector<char> buf(out.size() * 4);
  get(buf.data(), buf.size(), "payload");
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::bit_cast<float>(load_le<std::uint32_t>(buf.data() + 4 * k));
  }
}

void ByteReader::f64s(std::span<double> out) {
  std::vector<char> buf(out.size() * 8);
  get(buf.data(), buf.size(), "payload");
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::bit_cast<double>(load_le<std::uint64_t>(buf.data() + 8 * k));
  }
}

std::string ByteReader::str() {
  const std::uint16_t n = u16();
  std::string s(n, '\0');
  if (n > 0) get(s.data(), n, "string");
  return s;
}

RecordKind ByteReader::header() {
  std::array<char, 4> magic;
  in_.read(magic.data(), 4);
  if (in_.gcount() != 4 || std::string_view(magic.data(), 4) != kMagic) {
    throw FormatError("bad magic: not a NADA container");
  }
  read_ += 4;
  const std::uint16_t version = u16();
  if (version != kVersion) {
    throw FormatError("unsupported NADA version " + std::to_string(version));
  }
  const std::uint16_t kind = u16();
  if (kind < 1 || kind > 3) throw FormatError("unknown record kind " + std::to_string(kind));
  return static_cast<RecordKind>(kind);
}

void ByteReader::expect_kind(RecordKind expected) {
  const RecordKind kind = header();
  if (kind != expected) {
    throw FormatError("record kind " + std::to_string(static_cast<int>(kind)) + ", expected " +
                      std::to_string(static_cast<int>(expected)));
  }
}

}  // namespace nada::io

#include "nada/embedding.hpp"

#include "nada/binary_io.hpp"
#include "nada/error.hpp"

#include <cstring>
#include <fstream>
#include <span>
#include <unordered_set>

namespace nada::dataio {

std::optional<Index> EmbeddingMatrix::find(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return static_cast<Index>(i);
  }
  return std::nullopt;
}

void EmbeddingMatrix::validate() const {
  if (ids.empty() || values.rows() < 1) throw ValidationError("embedding matrix has no rows");
  if (values.cols() < 1) throw ValidationError("embedding dimension must be at least 1");
  if (static_cast<Index>(ids.size()) != values.rows()) {
    throw ValidationError("dimension mismatch: " + std::to_string(ids.size()) + " ids for " +
                          std::to_string(values.rows()) + " rows");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw ValidationError("duplicate embedding id '" + id + "'");
  }
  if (!values.allFinite()) throw ValidationError("embedding matrix has non-finite values");
}

bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  return a.ids == b.ids && a.values.rows() == b.values.rows() &&
         a.values.cols() == b.values.cols() &&
         std::memcmp(a.values.data(), b.values.data(),
                     sizeof(float) * static_cast<std::size_t>(a.values.size())) == 0;
}

std::uint64_t write_embedding_matrix(const EmbeddingMatrix& m, std::ostream& out) {
  m.validate();
  io::ByteWriter w(out);
  w.header(io::RecordKind::EmbeddingMatrix);
  w.u32(static_cast<std::uint32_t>(m.size()));
  w.u32(static_cast<std::uint32_t>(m.dim()));
  for (const auto& id : m.ids) w.str(id);
  w.f32s(std::span<const float>(m.values.data(), static_cast<std::size_t>(m.values.size())));
  return w.bytes_written();
}

EmbeddingMatrix read_embedding_matrix(std::istream& in) {
  io::ByteReader r(in);
  r.expect_kind(io::RecordKind::EmbeddingMatrix);
  const std::uint32_t n = r.u32();
  const std::uint32_t d = r.u32();
  if (n < 1 || d < 1) throw FormatError("embedding header has zero N or D");
  EmbeddingMatrix m;
  m.ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) m.ids.push_back(r.str());
  m.values.resize(n, d);
  r.f32s(std::span<float>(m.values.data(), static_cast<std::size_t>(m.values.size())));
  m.validate();
  return m;
}

void save_embedding_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_embedding_matrix(m, out);
}

EmbeddingMatrix load_embedding_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_embedding_matrix(in);
}

}  // namespace nada::dataio

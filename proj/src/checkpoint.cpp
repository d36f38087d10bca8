#include "nada/binary_io.hpp"
#include "nada/error.hpp"
#include "nada/mlp.hpp"

#include <fstream>
#include <span>

namespace nada::proposer {

std::uint64_t write_checkpoint(const MlpModel& model, std::ostream& out) {
  model.validate();
  io::ByteWriter w(out);
  w.header(io::RecordKind::MlpCheckpoint);
  w.u32(static_cast<std::uint32_t>(model.head));
  w.u32(static_cast<std::uint32_t>(model.layer_count()));
  w.u32(static_cast<std::uint32_t>(model.input_dim()));
  for (const auto& wt : model.weights) w.u32(static_cast<std::uint32_t>(wt.rows()));
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    // weights are column-major in memory; the file is row-major
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = model.weights[l];
    w.f64s(std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
    w.f64s(std::span<const double>(model.biases[l].data(), static_cast<std::size_t>(model.biases[l].size())));
  }
  return w.bytes_written();
}

MlpModel read_checkpoint(std::istream& in) {
  io::ByteReader r(in);
  r.expect_kind(io::RecordKind::MlpCheckpoint);
  const std::uint32_t head = r.u32();
  if (head > 1) throw FormatError("unknown head mode " + std::to_string(head));
  const std::uint32_t layers = r.u32();
  if (layers < 1 || layers > 64) throw FormatError("implausible layer count " + std::to_string(layers));
  std::vector<Index> dims(layers + 1);
  for (auto& d : dims) {
    d = r.u32();
    if (d < 1) throw FormatError("zero layer dimension");
  }
  MlpModel model;
  model.head = static_cast<HeadMode>(head);
  for (std::uint32_t l = 0; l < layers; ++l) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(dims[l + 1], dims[l]);
    r.f64s(std::span<double>(rm.data(), static_cast<std::size_t>(rm.size())));
    Eigen::VectorXd b(dims[l + 1]);
    r.f64s(std::span<double>(b.data(), static_cast<std::size_t>(b.size())));
    model.weights.emplace_back(rm);
    model.biases.push_back(std::move(b));
  }
  try {
    model.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
  return model;
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  model.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_checkpoint(model, out);
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace nada::proposer

#pragma once

#include "nada/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nada::dataio {

using EmbeddingRows = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N embeddings of dimension D keyed by unique ids (image ids or class labels).
struct EmbeddingMatrix {
  std::vector<std::string> ids;
  EmbeddingRows values;  // N x D

  Index size() const { return values.rows(); }
  Index dim() const { return values.cols(); }
  std::optional<Index> find(const std::string& id) const;
  Eigen::VectorXd row(Index i) const { return values.row(i).transpose().cast<double>(); }

  void validate() const;

  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b);
};

std::uint64_t write_embedding_matrix(const EmbeddingMatrix& m, std::ostream& out);
EmbeddingMatrix read_embedding_matrix(std::istream& in);

void save_embedding_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix load_embedding_matrix(const std::filesystem::path& path);

}  // namespace nada::dataio

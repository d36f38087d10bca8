#pragma once

#include "nada/embedding.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace nada::proposer {

/// Single-label heads are trained with softmax cross-entropy, multi-label
/// heads with per-class sigmoid binary cross-entropy.
enum class HeadMode : std::uint32_t { SingleLabel = 0, MultiLabel = 1 };

/// Fully connected network with ReLU between layers. weights[i] is
/// (out x in), biases[i] has `out` entries.
struct MlpModel {
  HeadMode head = HeadMode::SingleLabel;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t layer_count() const { return weights.size(); }
  Index input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }
  Index output_dim() const { return weights.empty() ? 0 : weights.back().rows(); }

  void validate() const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);
};

/// Glorot-uniform weights, zero biases. `layers` counts linear layers, so 2
/// gives input -> hidden -> classes.
MlpModel init_mlp(Index input_dim, Index hidden_dim, Index classes, int layers, HeadMode head,
                  std::uint64_t seed);

/// Row-wise logits for a batch of inputs (batch x input_dim).
Eigen::MatrixXd mlp_logits(const MlpModel& model, const Eigen::MatrixXd& inputs);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean loss of the batch against 0/1 targets (batch x classes) and,
/// optionally, its gradient. Cross-entropy averages over the batch; binary
/// cross-entropy averages over batch x classes.
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets, Gradients* gradients = nullptr);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd sigmoid(const Eigen::VectorXd& logits);

enum class Loss { CrossEntropy, BinaryCrossEntropy };

struct TrainConfig {
  int epochs = 100;
  int batch_size = 512;
  double learning_rate = 1e-4;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Loss loss = Loss::CrossEntropy;
  int layers = 2;
  Index hidden_dim = 384;
  std::uint64_t seed = 0;

  HeadMode head() const {
    return loss == Loss::CrossEntropy ? HeadMode::SingleLabel : HeadMode::MultiLabel;
  }
  void validate() const;
};

struct TrainResult {
  MlpModel model;
  double final_loss = 0.0;          // full-set loss of the returned model
  std::vector<double> epoch_losses; // sample-weighted mean batch loss per epoch
};

/// Mini-batch AdamW (decoupled weight decay) in double precision. Examples
/// are reshuffled every epoch from `config.seed`; the final partial batch is
/// kept. Identical inputs and config give a bit-identical model.
TrainResult train_mlp(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                      const TrainConfig& config);

/// WSCP training over an embedding matrix. Every labelled id must be a row
/// of `embeddings`; single-label training requires exactly one label each.
TrainResult wscp_train(const dataio::EmbeddingMatrix& embeddings,
                       const std::map<std::string, std::vector<std::string>>& labels,
                       const std::vector<std::string>& classes, const TrainConfig& config);

/// Softmax probabilities (single-label) or per-class sigmoids (multi-label).
Eigen::VectorXd wscp_infer(const MlpModel& model, const Eigen::VectorXd& embedding);

/// Kind-3 NADA1 record: u32 head mode, u32 layer count, u32 dims (layers+1),
/// then per layer the weights row-major and the biases as float64 LE.
std::uint64_t write_checkpoint(const MlpModel& model, std::ostream& out);
MlpModel read_checkpoint(std::istream& in);
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace nada::proposer

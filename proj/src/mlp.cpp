#include "nada/mlp.hpp"

#include "nada/error.hpp"
#include "nada/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace nada::proposer {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void MlpModel::validate() const {
  if (weights.empty()) throw ValidationError("MLP has no layers");
  if (weights.size() != biases.size()) throw ValidationError("MLP weight/bias count mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows() < 1 || weights[i].cols() < 1) throw ValidationError("empty MLP layer");
    if (biases[i].size() != weights[i].rows()) {
      throw ValidationError("layer " + std::to_string(i) + " bias size mismatch");
    }
    if (i > 0 && weights[i].cols() != weights[i - 1].rows()) {
      throw ValidationError("layer " + std::to_string(i) + " input does not match previous output");
    }
    if (!weights[i].allFinite() || !biases[i].allFinite()) {
      throw ValidationError("MLP has non-finite parameters");
    }
  }
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.head != b.head || a.weights.size() != b.weights.size()) return false;
  const auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) == 0;
  };
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (!same(a.weights[i], b.weights[i]) || !same(a.biases[i], b.biases[i])) return false;
  }
  return true;
}

MlpModel init_mlp(Index input_dim, Index hidden_dim, Index classes, int layers, HeadMode head,
                  std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || classes < 1 || layers < 1) {
    throw ValidationError("MLP dimensions and layer count must be positive");
  }
  Rng rng(seed);
  MlpModel model;
  model.head = head;
  Index in = input_dim;
  for (int l = 0; l < layers; ++l) {
    const Index out = l + 1 == layers ? classes : hidden_dim;
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    MatrixXd w(out, in);
    for (Index r = 0; r < out; ++r) {
      for (Index c = 0; c < in; ++c) w(r, c) = rng.uniform(-limit, limit);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(VectorXd::Zero(out));
    in = out;
  }
  return model;
}

namespace {

struct Forward {
  std::vector<MatrixXd> activations;  // input, then post-ReLU hidden outputs
  MatrixXd logits;
};

Forward forward(const MlpModel& model, const MatrixXd& inputs) {
  if (inputs.cols() != model.input_dim()) {
    throw ValidationError("dimension mismatch: input has " + std::to_string(inputs.cols()) +
                          " features, model expects " + std::to_string(model.input_dim()));
  }
  Forward f;
  f.activations.push_back(inputs);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    MatrixXd z = f.activations.back() * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    if (l + 1 == model.layer_count()) {
      f.logits = std::move(z);
    } else {
      f.activations.push_back(z.cwiseMax(0.0));
    }
  }
  return f;
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

MatrixXd mlp_logits(const MlpModel& model, const MatrixXd& inputs) {
  return forward(model, inputs).logits;
}

VectorXd softmax(const VectorXd& logits) {
  const VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

VectorXd sigmoid(const VectorXd& logits) { return logits.unaryExpr(&logistic); }

double mlp_loss(const MlpModel& model, const MatrixXd& inputs, const MatrixXd& targets,
                Gradients* gradients) {
  const Forward f = forward(model, inputs);
  const Index batch = inputs.rows();
  const Index classes = model.output_dim();
  if (targets.rows() != batch || targets.cols() != classes) {
    throw ValidationError("target matrix shape does not match batch x classes");
  }
  if (batch == 0) throw ValidationError("empty batch");

  double loss = 0.0;
  MatrixXd delta(batch, classes);  // dLoss/dLogits
  if (model.head == HeadMode::SingleLabel) {
    for (Index i = 0; i < batch; ++i) {
      const auto row = f.logits.row(i);
      const double m = row.maxCoeff();
      const double lse = m + std::log((row.array() - m).exp().sum());
      loss += lse * targets.row(i).sum() - targets.row(i).dot(row);
      delta.row(i) = (row.array() - lse).exp().matrix() * targets.row(i).sum() - targets.row(i);
    }
    loss /= static_cast<double>(batch);
    delta /= static_cast<double>(batch);
  } else {
    for (Index i = 0; i < batch; ++i) {
      for (Index c = 0; c < classes; ++c) {
        const double z = f.logits(i, c);
        const double y = targets(i, c);
        loss += softplus(z) - y * z;
        delta(i, c) = logistic(z) - y;
      }
    }
    const double n = static_cast<double>(batch * classes);
    loss /= n;
    delta /= n;
  }

  if (gradients) {
    const std::size_t layers = model.layer_count();
    gradients->weights.resize(layers);
    gradients->biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
      gradients->weights[l] = delta.transpose() * f.activations[l];
      gradients->biases[l] = delta.colwise().sum().transpose();
      if (l > 0) {
        MatrixXd back = delta * model.weights[l];
        // ReLU derivative: pass where the hidden unit was active
        delta = (f.activations[l].array() > 0.0).select(back, 0.0);
      }
    }
  }
  return loss;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ValidationError("epochs must be non-negative");
  if (batch_size < 1) throw ValidationError("batch size must be positive");
  if (!(learning_rate > 0)) throw ValidationError("learning rate must be positive");
  if (weight_decay < 0) throw ValidationError("weight decay must be non-negative");
  if (layers < 1 || hidden_dim < 1) throw ValidationError("layers and hidden size must be positive");
}

namespace {

struct AdamState {
  std::vector<MatrixXd> mw, vw;
  std::vector<VectorXd> mb, vb;
  long step = 0;

  explicit AdamState(const MlpModel& model) {
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
      mw.push_back(MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
      vw.push_back(mw.back());
      mb.push_back(VectorXd::Zero(model.biases[l].size()));
      vb.push_back(mb.back());
    }
  }
};

template <typename Param, typename Grad>
void adamw_update(Param& p, const Grad& g, Param& m, Param& v, const TrainConfig& cfg,
                  double bias1, double bias2) {
  p *= 1.0 - cfg.learning_rate * cfg.weight_decay;
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  p.array() -= cfg.learning_rate * (m.array() / bias1) /
               ((v.array() / bias2).sqrt() + cfg.epsilon);
}

}  // namespace

TrainResult train_mlp(const MatrixXd& inputs, const MatrixXd& targets, const TrainConfig& config) {
  config.validate();
  if (inputs.rows() < 1) throw ValidationError("no training examples");
  if (targets.rows() != inputs.rows()) throw ValidationError("inputs/targets row mismatch");
  TrainResult result;
  result.model = init_mlp(inputs.cols(), config.hidden_dim, targets.cols(), config.layers,
                          config.head(), config.seed);
  auto& model = result.model;
  AdamState adam(model);
  Rng rng(mix_seed(config.seed, 1));

  const Index n = inputs.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Gradients grads;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<Index>(order));
    double epoch_loss = 0.0;
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index size = std::min<Index>(config.batch_size, n - start);
      MatrixXd x(size, inputs.cols());
      MatrixXd y(size, targets.cols());
      for (Index i = 0; i < size; ++i) {
        x.row(i) = inputs.row(order[static_cast<std::size_t>(start + i)]);
        y.row(i) = targets.row(order[static_cast<std::size_t>(start + i)]);
      }
      epoch_loss += mlp_loss(model, x, y, &grads) * static_cast<double>(size);
      ++adam.step;
      const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam.step));
      const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam.step));
      for (std::size_t l = 0; l < model.layer_count(); ++l) {
        adamw_update(model.weights[l], grads.weights[l], adam.mw[l], adam.vw[l], config, bias1, bias2);
        adamw_update(model.biases[l], grads.biases[l], adam.mb[l], adam.vb[l], config, bias1, bias2);
      }
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
  }
  result.final_loss = mlp_loss(model, inputs, targets);
  return result;
}

TrainResult wscp_train(const dataio::EmbeddingMatrix& embeddings,
                       const std::map<std::string, std::vector<std::string>>& labels,
                       const std::vector<std::string>& classes, const TrainConfig& config) {
  config.validate();
  if (classes.empty()) throw ValidationError("no classes to train");
  if (labels.empty()) throw ValidationError("no labelled examples");
  MatrixXd x(static_cast<Index>(labels.size()), embeddings.dim());
  MatrixXd y = MatrixXd::Zero(static_cast<Index>(labels.size()), static_cast<Index>(classes.size()));
  Index row = 0;
  for (const auto& [id, image_labels] : labels) {
    const auto index = embeddings.find(id);
    if (!index) throw ValidationError("labelled id '" + id + "' has no embedding");
    if (config.head() == HeadMode::SingleLabel && image_labels.size() != 1) {
      throw ValidationError("single-label training needs exactly one label for '" + id + "', got " +
                            std::to_string(image_labels.size()));
    }
    x.row(row) = embeddings.values.row(*index).cast<double>();
    for (const auto& l : image_labels) {
      const auto it = std::find(classes.begin(), classes.end(), l);
      if (it == classes.end()) throw ValidationError("unknown label '" + l + "'");
      y(row, it - classes.begin()) = 1.0;
    }
    ++row;
  }
  return train_mlp(x, y, config);
}

VectorXd wscp_infer(const MlpModel& model, const VectorXd& embedding) {
  if (embedding.size() != model.input_dim()) {
    throw ValidationError("dimension mismatch: embedding has " + std::to_string(embedding.size()) +
                          " values, model expects " + std::to_string(model.input_dim()));
  }
  const VectorXd logits = mlp_logits(model, embedding.transpose()).row(0).transpose();
  return model.head == HeadMode::SingleLabel ? softmax(logits) : sigmoid(logits);
}

}  // namespace nada::proposer

#pragma once

// Central finite differences of the MLP loss, refined by one Richardson step.

#include "nada/mlp.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

inline nada::proposer::Gradients numeric_gradients(const nada::proposer::MlpModel& model,
                                                   const Eigen::MatrixXd& x,
                                                   const Eigen::MatrixXd& y, double h = 1e-4) {
  using nada::proposer::mlp_loss;
  auto m = model;
  auto slope = [&](double& p, double step) {
    const double saved = p;
    p = saved + step;
    const double up = mlp_loss(m, x, y);
    p = saved - step;
    const double down = mlp_loss(m, x, y);
    p = saved;
    return (up - down) / (2 * step);
  };
  auto refined = [&](double& p) { return (4 * slope(p, h / 2) - slope(p, h)) / 3; };
  nada::proposer::Gradients g;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Eigen::MatrixXd gw(m.weights[l].rows(), m.weights[l].cols());
    for (Eigen::Index i = 0; i < gw.size(); ++i) gw.data()[i] = refined(m.weights[l].data()[i]);
    Eigen::VectorXd gb(m.biases[l].size());
    for (Eigen::Index i = 0; i < gb.size(); ++i) gb[i] = refined(m.biases[l][i]);
    g.weights.push_back(gw);
    g.biases.push_back(gb);
  }
  return g;
}

/// Largest elementwise relative error; pairs where both values are below
/// `floor` in magnitude count as agreeing.
inline double max_relative_error(const nada::proposer::Gradients& a,
                                 const nada::proposer::Gradients& b, double floor = 1e-7) {
  double worst = 0.0;
  auto visit = [&](const double* p, const double* q, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = std::max(std::abs(p[i]), std::abs(q[i]));
      if (scale < floor) continue;
      worst = std::max(worst, std::abs(p[i] - q[i]) / scale);
    }
  };
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    visit(a.weights[l].data(), b.weights[l].data(), a.weights[l].size());
    visit(a.biases[l].data(), b.biases[l].data(), a.biases[l].size());
  }
  return worst;
}

/// Smallest |pre-activation| of any hidden unit over the batch; near zero the
/// ReLU kink makes finite differences meaningless.
inline double min_hidden_margin(const nada::proposer::MlpModel& m, const Eigen::MatrixXd& x) {
  double margin = 1e300;
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l + 1 < m.weights.size(); ++l) {
    Eigen::MatrixXd z = (a * m.weights[l].transpose()).rowwise() + m.biases[l].transpose();
    margin = std::min(margin, z.cwiseAbs().minCoeff());
    a = z.cwiseMax(0.0);
  }
  return margin;
}

}  // namespace oracle

#pragma once

// Reference computations shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pf0/mlp.hpp"
#include "pf0/rng.hpp"

namespace pf0::oracle {

/// Summed cross-entropy of a batch, computed one column at a time in Infer mode.
inline double batch_loss(const MlpModel& m, const Eigen::MatrixXd& x, const std::vector<int>& y) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const Eigen::VectorXd col = x.col(c);
    const auto r = forward(m, std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), Mode::Infer);
    s += loss_ce(std::span<const double>(r.probs.data(), static_cast<std::size_t>(r.probs.size())), y[c]);
  }
  return s;
}

/**
 * Worst relative error between backprop and central differences over all
 * parameter tensors of one (model, batch): ||g_bp - g_fd|| / max(||g_bp|| + ||g_fd||, 1e-12).
 */
inline double gradient_check(MlpModel m, const Eigen::MatrixXd& x, const std::vector<int>& y, double eps = 1e-6) {
  m.dropout_p = 0.0;
  const auto cache = forward_batch(m, x, Mode::Infer);
  const Gradients g = backward(m, cache, y);
  double worst = 0.0;
  auto check = [&](auto& param, const auto& grad) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const double keep = param.data()[i];
      param.data()[i] = keep + eps;
      const double up = batch_loss(m, x, y);
      param.data()[i] = keep - eps;
      const double down = batch_loss(m, x, y);
      param.data()[i] = keep;
      const double fd = (up - down) / (2.0 * eps);
      const double bp = grad.data()[i];
      diff += (fd - bp) * (fd - bp);
      na += bp * bp;
      nb += fd * fd;
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nb), 1e-12));
  };
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    check(m.weights[l], g.weights[l]);
    check(m.biases[l], g.biases[l]);
  }
  return worst;
}

/// Random small network plus a random batch, for gradient checking.
struct GradCase {
  MlpModel model;
  Eigen::MatrixXd x;
  std::vector<int> y;
};

inline GradCase random_grad_case(std::uint64_t seed) {
  Rng r(seed);
  const int depth = 1 + static_cast<int>(r.below(3));  // hidden layers
  std::vector<int> dims{24};
  for (int i = 0; i < depth; ++i) dims.push_back(3 + static_cast<int>(r.below(14)));
  dims.push_back(4);
  GradCase c{init_model(dims, seed, 0.0), {}, {}};
  for (auto& b : c.model.biases) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.1 * r.gaussian();
  }
  const int batch = 1 + static_cast<int>(r.below(4));
  c.x.resize(24, batch);
  for (Eigen::Index i = 0; i < c.x.size(); ++i) c.x.data()[i] = r.gaussian();
  for (int b = 0; b < batch; ++b) c.y.push_back(static_cast<int>(r.below(4)));
  return c;
}

}  // namespace pf0::oracle

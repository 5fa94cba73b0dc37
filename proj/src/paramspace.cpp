#include "taco/paramspace.hpp"

#include <cmath>
#include <stdexcept>

namespace taco {

ParameterSet::ParameterSet(Eigen::MatrixXd m) : data(std::move(m)) {
  if (data.rows() < 1 || data.cols() < 1)
    throw std::invalid_argument("ParameterSet: need n >= 1 and K >= 1");
  if (!data.allFinite()) throw std::invalid_argument("ParameterSet: non-finite entries");
}

MaskoutPolicy::MaskoutPolicy(double eps) : epsilon(eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("MaskoutPolicy: epsilon must be > 0");
}

Eigen::MatrixXd CompositionalMatrix::as_matrix() const {
  if (columns.empty()) throw std::invalid_argument("CompositionalMatrix: empty");
  const int K = static_cast<int>(columns[0].w.size());
  Eigen::MatrixXd m(K, static_cast<int>(columns.size()));
  for (size_t t = 0; t < columns.size(); ++t) {
    if (columns[t].w.size() != K)
      throw std::invalid_argument("CompositionalMatrix: inconsistent K across columns");
    m.col(static_cast<int>(t)) = columns[t].w;
  }
  return m;
}

Eigen::VectorXd compose(const ParameterSet& phi, const CompositionalVector& w) {
  if (w.w.size() != phi.K())
    throw std::invalid_argument("compose: w length does not match K");
  return phi.data * w.w;
}

Eigen::MatrixXd compose_all(const ParameterSet& phi, const CompositionalMatrix& W) {
  Eigen::MatrixXd wm = W.as_matrix();
  if (wm.rows() != phi.K())
    throw std::invalid_argument("compose_all: W rows do not match K");
  return phi.data * wm;
}

Eigen::MatrixXd grad_phi(const Eigen::VectorXd& grad_theta, const CompositionalVector& w) {
  if (!grad_theta.allFinite() || !w.w.allFinite())
    throw std::invalid_argument("grad_phi: non-finite input");
  return grad_theta * w.w.transpose();
}

Eigen::VectorXd grad_w(const Eigen::VectorXd& grad_theta, const ParameterSet& phi) {
  if (grad_theta.size() != phi.n())
    throw std::invalid_argument("grad_w: grad_theta length does not match n");
  if (!grad_theta.allFinite()) throw std::invalid_argument("grad_w: non-finite input");
  return phi.data.transpose() * grad_theta;
}

MaskResult mask_losses(const std::vector<double>& losses, const MaskoutPolicy& policy) {
  MaskResult r;
  r.masked = losses;
  for (int i = 0; i < static_cast<int>(losses.size()); ++i) {
    const double l = losses[i];
    if (std::isnan(l) || l > policy.epsilon) {
      r.masked[i] = 0.0;
      r.invalid.push_back(i);
    } else {
      r.valid.push_back(i);
    }
  }
  return r;
}

CompositionalVector reset_w(const CompositionalMatrix& W, const std::vector<int>& valid,
                            Rng& rng) {
  if (valid.empty())
    throw std::runtime_error("reset_w: no valid tasks to draw from (all losses exceeded epsilon)");
  std::vector<double> beta = sample_simplex(static_cast<int>(valid.size()), rng);
  const int K = static_cast<int>(W.columns.at(valid[0]).w.size());
  CompositionalVector out;
  out.w = Eigen::VectorXd::Zero(K);
  for (size_t j = 0; j < valid.size(); ++j) out.w += beta[j] * W.columns.at(valid[j]).w;
  return out;
}

ParameterSet init_parameter_set(const std::vector<double>& bounds, int K, Rng& rng) {
  const int n = static_cast<int>(bounds.size());
  Eigen::MatrixXd m(n, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < n; ++j) m(j, k) = rng.uniform(-bounds[j], bounds[j]);
  return ParameterSet(std::move(m));
}

}  // namespace taco

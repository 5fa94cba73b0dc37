#pragma once

#include <Eigen/Dense>
#include <vector>

#include "taco/rng.hpp"

namespace taco {

// The shared parameter set Phi: an n x K matrix whose columns are the K
// shared parameter vectors. Task parameters are linear combinations of the
// columns.
struct ParameterSet {
  Eigen::MatrixXd data;  // n x K

  ParameterSet() = default;
  ParameterSet(Eigen::MatrixXd m);

  int n() const { return static_cast<int>(data.rows()); }
  int K() const { return static_cast<int>(data.cols()); }
};

// Per-task mixing coefficients w (length K), keyed by task id.
struct CompositionalVector {
  int task_id = -1;
  Eigen::VectorXd w;
};

// One column per task, in task-id order.
struct CompositionalMatrix {
  std::vector<CompositionalVector> columns;

  int T() const { return static_cast<int>(columns.size()); }
  Eigen::MatrixXd as_matrix() const;  // K x T
};

struct MaskoutPolicy {
  double epsilon;  // extreme loss threshold, > 0
  explicit MaskoutPolicy(double eps);
};

struct MaskResult {
  std::vector<double> masked;  // losses with super-threshold entries zeroed
  std::vector<int> invalid;    // tasks whose loss exceeded the threshold
  std::vector<int> valid;      // tasks with loss <= threshold
};

// theta = Phi * w
Eigen::VectorXd compose(const ParameterSet& phi, const CompositionalVector& w);

// Theta = Phi * W (one column per task)
Eigen::MatrixXd compose_all(const ParameterSet& phi, const CompositionalMatrix& W);

// Chain rule of theta = Phi w: dL/dPhi = (dL/dtheta) w^T
Eigen::MatrixXd grad_phi(const Eigen::VectorXd& grad_theta, const CompositionalVector& w);

// dL/dw = Phi^T (dL/dtheta)
Eigen::VectorXd grad_w(const Eigen::VectorXd& grad_theta, const ParameterSet& phi);

// Zeroes losses strictly above the threshold; NaN/Inf counts as above.
MaskResult mask_losses(const std::vector<double>& losses, const MaskoutPolicy& policy);

// Re-initializes an exploded task's w as a convex combination of the valid
// tasks' columns, with coefficients drawn uniformly from the unit simplex.
CompositionalVector reset_w(const CompositionalMatrix& W, const std::vector<int>& valid,
                            Rng& rng);

// Independent random initialization of each column. bounds[j] is the
// half-width of the uniform init range for flat index j (fan-in scaled,
// supplied by the network layout).
ParameterSet init_parameter_set(const std::vector<double>& bounds, int K, Rng& rng);

}  // namespace taco

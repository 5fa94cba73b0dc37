#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "taco/rng.hpp"

namespace taco {

struct SlotRange {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
};

// Maps a flat parameter vector of length n onto the SAC networks: a
// tanh-squashed Gaussian policy and twin Q heads. The policy slot range is
// contiguous and leads the vector (policy-only transfer copies [0, P)).
struct NetworkLayout {
  int state_dim = 0;
  int action_dim = 0;
  std::vector<int> hidden;
  SlotRange policy, q1, q2;  // disjoint, cover exactly [0, n)
  int n = 0;

  static NetworkLayout make(int state_dim, int action_dim, std::vector<int> hidden);

  uint64_t hash() const;
  int q_size() const { return q1.size(); }
  // Target networks are per-task shadow buffers (q1 then q2), not part of
  // the composed vector.
  int target_size() const { return 2 * q1.size(); }
  // Per-flat-index half-width for uniform fan-in initialization.
  std::vector<double> init_bounds() const;
};

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kTanhEps = 1e-6;  // inside log(1 - a^2 + eps)

struct PolicyOutput {
  std::vector<double> mean;
  std::vector<double> log_std;  // clamped to [kLogStdMin, kLogStdMax]
};

struct ActionSample {
  std::vector<double> action;  // in (-1, 1)^d
  double log_prob = 0.0;
  std::vector<double> z;  // the standard-normal draw used (for reparameterized grads)
};

PolicyOutput policy_forward(const NetworkLayout& lay, const double* theta, const double* state);
std::pair<double, double> q_forward(const NetworkLayout& lay, const double* theta,
                                    const double* state, const double* action);

ActionSample sample_action(const PolicyOutput& out, Rng& rng);
ActionSample action_from_z(const PolicyOutput& out, const std::vector<double>& z);
std::vector<double> deterministic_action(const PolicyOutput& out);

// Cached variants for training.
struct MlpCache {
  std::vector<std::vector<double>> acts;  // acts[0] = input, then post-tanh per hidden layer
  std::vector<double> out;                // linear output
};
struct PolicyCache {
  MlpCache mlp;
  std::vector<double> raw_log_std;  // pre-clamp head output
};
struct QCache {
  MlpCache mlp1, mlp2;
  std::vector<double> input;  // [state, action]
};

PolicyOutput policy_forward_cached(const NetworkLayout& lay, const double* theta,
                                   const double* state, PolicyCache& cache);
std::pair<double, double> q_forward_cached(const NetworkLayout& lay, const double* theta,
                                           const double* state, const double* action,
                                           QCache& cache);

// Reverse passes. grad_theta (length n) is accumulated into, never reset.
void policy_backward(const NetworkLayout& lay, const double* theta, const PolicyCache& cache,
                     const double* d_mean, const double* d_log_std, double* grad_theta);
// d_action, when non-null, accumulates dL/d(action input) (length action_dim).
void q_backward(const NetworkLayout& lay, const double* theta, const QCache& cache, double dq1,
                double dq2, double* grad_theta, double* d_action);

// Backprop of (action, log_prob) w.r.t. (mean, log_std) at a fixed z.
// d_mean / d_log_std are accumulated into.
void tanh_gauss_backward(const PolicyOutput& out, const ActionSample& s, const double* d_action,
                         double d_log_prob, double* d_mean, double* d_log_std);

// Twin-Q forward over a detached target block (q1 params then q2 params,
// layout identical to theta's q slots).
std::pair<double, double> q_target_forward(const NetworkLayout& lay, const double* target_block,
                                           const double* state, const double* action);

// target <- (1 - tau) * target + tau * online, 0 < tau <= 1
void soft_update(double* target, const double* online, int count, double tau);

std::vector<double> init_theta(const NetworkLayout& lay, Rng& rng);

}  // namespace taco

#pragma once

#include <vector>

#include "taco/network.hpp"

namespace taco {

// A single task's transition batch, flattened row-major.
struct SacBatch {
  int state_dim = 0;
  int action_dim = 0;
  std::vector<double> states;       // B * state_dim
  std::vector<double> actions;      // B * action_dim
  std::vector<double> rewards;      // B
  std::vector<double> next_states;  // B * state_dim
  std::vector<double> dones;        // B, 0 or 1

  int size() const { return static_cast<int>(rewards.size()); }
};

struct CriticResult {
  double loss = 0.0;
  std::vector<double> grad_theta;  // nonzero only in q slots (target is detached)
};

struct ActorResult {
  double loss = 0.0;
  std::vector<double> grad_theta;  // nonzero only in policy slots (critic params detached)
  double mean_log_prob = 0.0;
};

struct AlphaResult {
  double loss = 0.0;
  double grad_log_alpha = 0.0;
};

// L_q = mean[(q1 - y)^2 + (q2 - y)^2],
// y = r + gamma (1 - done) (min(q1', q2')_target(s', a') - alpha log pi(a'|s')),
// with a' drawn from the current policy via the fixed z_next draws
// (B * action_dim standard normals).
CriticResult critic_loss(const NetworkLayout& lay, const double* theta, const double* target_block,
                         double log_alpha, const SacBatch& batch, const double* z_next,
                         double gamma);

// L_pi = mean[alpha log pi(a|s) - min(q1, q2)(s, a)], a reparameterized with
// the fixed z_actor draws.
ActorResult actor_loss(const NetworkLayout& lay, const double* theta, const SacBatch& batch,
                       const double* z_actor, double log_alpha);

// L_alpha = -log_alpha * mean(log pi + target_entropy), log pi detached.
AlphaResult alpha_loss(double log_alpha, double mean_log_prob, double target_entropy);

struct SacTerms {
  double loss_q = 0.0, loss_pi = 0.0, loss_alpha = 0.0;
  std::vector<double> grad_theta;  // critic + actor gradients over the full flat vector
  double grad_log_alpha = 0.0;
  double mean_log_prob = 0.0;
};

SacTerms sac_losses(const NetworkLayout& lay, const double* theta, const double* target_block,
                    double log_alpha, const SacBatch& batch, const double* z_next,
                    const double* z_actor, double gamma);

}  // namespace taco

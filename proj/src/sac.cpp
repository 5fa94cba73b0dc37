#include "taco/sac.hpp"

#include <cmath>
#include <stdexcept>

namespace taco {

CriticResult critic_loss(const NetworkLayout& lay, const double* theta, const double* target_block,
                         double log_alpha, const SacBatch& batch, const double* z_next,
                         double gamma) {
  const int B = batch.size();
  if (B == 0) throw std::invalid_argument("critic_loss: empty batch");
  const double alpha = std::exp(log_alpha);
  CriticResult res;
  res.grad_theta.assign(lay.n, 0.0);
  for (int i = 0; i < B; ++i) {
    const double* s = batch.states.data() + i * lay.state_dim;
    const double* a = batch.actions.data() + i * lay.action_dim;
    const double* s2 = batch.next_states.data() + i * lay.state_dim;

    // Bellman target, fully detached.
    PolicyOutput out2 = policy_forward(lay, theta, s2);
    std::vector<double> z(z_next + i * lay.action_dim, z_next + (i + 1) * lay.action_dim);
    ActionSample a2 = action_from_z(out2, z);
    auto [q1t, q2t] = q_target_forward(lay, target_block, s2, a2.action.data());
    const double y = batch.rewards[i] +
                     gamma * (1.0 - batch.dones[i]) * (std::min(q1t, q2t) - alpha * a2.log_prob);

    QCache qc;
    auto [q1, q2] = q_forward_cached(lay, theta, s, a, qc);
    const double e1 = q1 - y, e2 = q2 - y;
    res.loss += (e1 * e1 + e2 * e2) / B;
    q_backward(lay, theta, qc, 2.0 * e1 / B, 2.0 * e2 / B, res.grad_theta.data(), nullptr);
  }
  return res;
}

ActorResult actor_loss(const NetworkLayout& lay, const double* theta, const SacBatch& batch,
                       const double* z_actor, double log_alpha) {
  const int B = batch.size();
  if (B == 0) throw std::invalid_argument("actor_loss: empty batch");
  const double alpha = std::exp(log_alpha);
  ActorResult res;
  res.grad_theta.assign(lay.n, 0.0);
  const int d = lay.action_dim;
  for (int i = 0; i < B; ++i) {
    const double* s = batch.states.data() + i * lay.state_dim;
    PolicyCache pc;
    PolicyOutput out = policy_forward_cached(lay, theta, s, pc);
    std::vector<double> z(z_actor + i * d, z_actor + (i + 1) * d);
    ActionSample smp = action_from_z(out, z);

    QCache qc;
    auto [q1, q2] = q_forward_cached(lay, theta, s, smp.action.data(), qc);
    const double qmin = std::min(q1, q2);
    res.loss += (alpha * smp.log_prob - qmin) / B;
    res.mean_log_prob += smp.log_prob / B;

    // dL/da through the chosen critic branch only; critic params are detached.
    std::vector<double> d_action(d, 0.0);
    q_backward(lay, theta, qc, q1 <= q2 ? -1.0 / B : 0.0, q1 <= q2 ? 0.0 : -1.0 / B, nullptr,
               d_action.data());
    std::vector<double> d_mean(d, 0.0), d_log_std(d, 0.0);
    tanh_gauss_backward(out, smp, d_action.data(), alpha / B, d_mean.data(), d_log_std.data());
    policy_backward(lay, theta, pc, d_mean.data(), d_log_std.data(), res.grad_theta.data());
  }
  return res;
}

AlphaResult alpha_loss(double log_alpha, double mean_log_prob, double target_entropy) {
  AlphaResult r;
  r.loss = -log_alpha * (mean_log_prob + target_entropy);
  r.grad_log_alpha = -(mean_log_prob + target_entropy);
  return r;
}

SacTerms sac_losses(const NetworkLayout& lay, const double* theta, const double* target_block,
                    double log_alpha, const SacBatch& batch, const double* z_next,
                    const double* z_actor, double gamma) {
  SacTerms t;
  CriticResult cr = critic_loss(lay, theta, target_block, log_alpha, batch, z_next, gamma);
  ActorResult ar = actor_loss(lay, theta, batch, z_actor, log_alpha);
  AlphaResult al = alpha_loss(log_alpha, ar.mean_log_prob, -static_cast<double>(lay.action_dim));
  t.loss_q = cr.loss;
  t.loss_pi = ar.loss;
  t.loss_alpha = al.loss;
  t.grad_theta = std::move(cr.grad_theta);
  for (int j = 0; j < lay.n; ++j) t.grad_theta[j] += ar.grad_theta[j];
  t.grad_log_alpha = al.grad_log_alpha;
  t.mean_log_prob = ar.mean_log_prob;
  return t;
}

}  // namespace taco

#pragma once

#include "taco/checkpoint.hpp"
#include "taco/trainer.hpp"

namespace taco {

struct TransferConfig {
  TrainConfig train;               // K, lrs, gamma, batch, hidden, seed, ...
  long n_explore = 20000;          // warm-up data collection with pi_explore
  long n_max = 6000000;            // step budget
  double success_threshold = 0.9;  // for the transfer metrics
  bool freeze_phi = false;         // fixed-Phi variant

  void validate() const;
};

// Policy-only transfer init: policy slot ranges copied from Phi*, Q slot
// ranges freshly initialized (seeded).
ParameterSet init_from_pretrained(const ParameterSet& phi_star, const NetworkLayout& layout,
                                  uint64_t layout_hash, Rng& rng);

// Warm-up behavior policy: at each episode reset draws beta uniformly from
// the simplex over the pretrained tasks' columns, then acts with
// pi_{Phi (W* beta)} for that episode.
Eigen::VectorXd explore_w(const CompositionalMatrix& w_star, Rng& rng);

// Algorithm: phase A collects n_explore steps with pi_explore and updates
// only the new-task critics and temperature (policy slots and w_new stay
// bit-unchanged); phase B runs standard SAC on theta_new = Phi w_new with
// Phi and w_new both trained, unless freeze_phi, where Phi is untouched
// end-to-end and a detached critic is trained alongside w_new.
class TransferRunner {
 public:
  TransferRunner(TransferConfig cfg, const Checkpoint& pretrained, TaskSpec new_task);

  RunLog run();

  const NetworkLayout& layout() const { return layout_; }
  const ParameterSet& phi() const { return phi_; }
  const Eigen::VectorXd& w_new() const { return w_new_; }
  double log_alpha() const { return log_alpha_; }
  const std::vector<double>& detached_critic() const { return critic_sep_; }

 private:
  Eigen::VectorXd compose_new() const;  // full working theta
  void gradient_step(bool critic_only);
  void do_eval(long env_step);

  TransferConfig cfg_;
  TaskSpec task_;
  NetworkLayout layout_;
  ParameterSet phi_;
  CompositionalMatrix w_star_;
  Eigen::VectorXd w_new_;
  std::vector<double> critic_sep_;  // freeze_phi mode only (q1|q2)
  std::vector<double> target_;
  double log_alpha_;
  ReplayBuffer buffer_;

  Adam adam_phi_;
  std::vector<double> phi_lrs_;
  Adam adam_w_, adam_alpha_, adam_critic_;

  Rng rng_batch_, rng_grad_, rng_env_, rng_explore_;
  RunLog log_;
  long env_steps_ = 0;
  long eval_count_ = 0;
  double acc_loss_q_ = 0.0, acc_loss_pi_ = 0.0;
  long acc_q_steps_ = 0, acc_pi_steps_ = 0;
  double start_time_ = 0.0;
};

// SAC-scratch baseline: the multi-task trainer with a single task, K = 1
// and w frozen at [1], run under the same eval protocol.
RunLog run_scratch(const TrainConfig& base, const TaskSpec& task, long n_max);
TrainConfig scratch_config(const TrainConfig& base, long n_max);

}  // namespace taco

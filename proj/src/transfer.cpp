#include "taco/transfer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "taco/sac.hpp"

namespace taco {
namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void TransferConfig::validate() const {
  if (!(n_explore >= 0 && n_explore <= n_max))
    throw std::invalid_argument("TransferConfig: need 0 <= n_explore <= n_max");
  if (!(success_threshold > 0.0 && success_threshold <= 1.0))
    throw std::invalid_argument("TransferConfig: threshold must be in (0,1]");
}

ParameterSet init_from_pretrained(const ParameterSet& phi_star, const NetworkLayout& layout,
                                  uint64_t layout_hash, Rng& rng) {
  if (layout.hash() != layout_hash || phi_star.n() != layout.n)
    throw std::runtime_error("init_from_pretrained: incompatible layout (hash mismatch)");
  const std::vector<double> bounds = layout.init_bounds();
  Eigen::MatrixXd data = phi_star.data;
  for (int k = 0; k < phi_star.K(); ++k)
    for (int j = layout.q1.begin; j < layout.q2.end; ++j)
      data(j, k) = rng.uniform(-bounds[j], bounds[j]);
  return ParameterSet(std::move(data));
}

Eigen::VectorXd explore_w(const CompositionalMatrix& w_star, Rng& rng) {
  std::vector<double> beta = sample_simplex(w_star.T(), rng);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(w_star.columns[0].w.size());
  for (int j = 0; j < w_star.T(); ++j) w += beta[j] * w_star.columns[j].w;
  return w;
}

TransferRunner::TransferRunner(TransferConfig cfg, const Checkpoint& pretrained, TaskSpec new_task)
    : cfg_(std::move(cfg)),
      task_(std::move(new_task)),
      w_star_(pretrained.W),
      log_alpha_(cfg_.train.init_log_alpha),
      buffer_(cfg_.train.replay_capacity),
      rng_batch_(fork_seed(cfg_.train.seed, streams::kBatchBase)),
      rng_grad_(fork_seed(cfg_.train.seed, streams::kGradBase)),
      rng_env_(fork_seed(cfg_.train.seed, streams::kEnvBase)),
      rng_explore_(fork_seed(cfg_.train.seed, streams::kExplore)) {
  cfg_.validate();
  cfg_.train.validate(1);
  layout_ = NetworkLayout::make(EnvState::kStateDim, EnvState::kActionDim, cfg_.train.hidden);
  if (layout_.hash() != pretrained.layout.hash())
    throw std::runtime_error("TransferRunner: pretrained checkpoint has a different layout");
  if (pretrained.phi.K() != cfg_.train.K)
    throw std::runtime_error("TransferRunner: K mismatch with checkpoint");

  Rng rng_init = fork(cfg_.train.seed, streams::kTransferInit);
  if (cfg_.freeze_phi) {
    // subspace stays exactly as learned; a detached critic is trained instead
    phi_ = pretrained.phi;
    const std::vector<double> bounds = layout_.init_bounds();
    critic_sep_.resize(layout_.target_size());
    for (int i = 0; i < layout_.target_size(); ++i) {
      const double b = bounds[layout_.q1.begin + i % layout_.q_size()];
      critic_sep_[i] = rng_init.uniform(-b, b);
    }
    adam_critic_.lr = cfg_.train.lr_q;
    adam_critic_.init(critic_sep_.size());
  } else {
    phi_ = init_from_pretrained(pretrained.phi, layout_, pretrained.layout.hash(), rng_init);
  }

  // w_new starts at the subspace centroid of the pretrained tasks
  w_new_ = Eigen::VectorXd::Zero(cfg_.train.K);
  for (const auto& col : w_star_.columns) w_new_ += col.w;
  w_new_ /= static_cast<double>(w_star_.T());

  Eigen::VectorXd theta = compose_new();
  target_.assign(theta.data() + layout_.q1.begin, theta.data() + layout_.q2.end);

  adam_phi_.init(static_cast<size_t>(layout_.n) * cfg_.train.K);
  phi_lrs_.assign(static_cast<size_t>(layout_.n) * cfg_.train.K, cfg_.train.lr_q);
  for (int k = 0; k < cfg_.train.K; ++k)
    for (int j = layout_.policy.begin; j < layout_.policy.end; ++j)
      phi_lrs_[static_cast<size_t>(k) * layout_.n + j] = cfg_.train.lr_policy;
  adam_w_.lr = cfg_.train.lr_w;
  adam_w_.init(cfg_.train.K);
  adam_alpha_.lr = cfg_.train.lr_alpha;
  adam_alpha_.init(1);
}

Eigen::VectorXd TransferRunner::compose_new() const {
  CompositionalVector w{task_.task_id, w_new_};
  Eigen::VectorXd theta = compose(phi_, w);
  if (cfg_.freeze_phi)
    for (int i = 0; i < layout_.target_size(); ++i) theta[layout_.q1.begin + i] = critic_sep_[i];
  return theta;
}

void TransferRunner::gradient_step(bool critic_only) {
  const int B = cfg_.train.batch_size;
  if (buffer_.task_size(task_.task_id) < static_cast<size_t>(B)) return;
  SacBatch batch = buffer_.sample(task_.task_id, B, rng_batch_);
  const int ad = layout_.action_dim;
  std::vector<double> z_next(B * ad), z_actor(B * ad);
  for (double& z : z_next) z = rng_grad_.normal();
  for (double& z : z_actor) z = rng_grad_.normal();

  Eigen::VectorXd theta = compose_new();
  SacTerms terms = sac_losses(layout_, theta.data(), target_.data(), log_alpha_, batch,
                              z_next.data(), z_actor.data(), cfg_.train.gamma);
  if (!std::isfinite(terms.loss_q) || !std::isfinite(terms.loss_pi))
    throw std::runtime_error("TransferRunner: non-finite loss (divergence)");

  // critic gradient lives in q slots only, actor gradient in policy slots
  Eigen::VectorXd g = Eigen::Map<Eigen::VectorXd>(terms.grad_theta.data(), layout_.n);
  if (critic_only)
    for (int j = layout_.policy.begin; j < layout_.policy.end; ++j) g[j] = 0.0;

  CompositionalVector w{task_.task_id, w_new_};
  if (cfg_.freeze_phi) {
    adam_critic_.step(critic_sep_.data(), g.data() + layout_.q1.begin, critic_sep_.size());
    if (!critic_only) {
      Eigen::VectorXd g_policy = g;
      for (int j = layout_.q1.begin; j < layout_.q2.end; ++j) g_policy[j] = 0.0;
      Eigen::VectorXd gw = grad_w(g_policy, phi_);
      adam_w_.step(w_new_.data(), gw.data(), cfg_.train.K);
    }
  } else {
    Eigen::MatrixXd gp = grad_phi(g, w);
    Eigen::VectorXd gw = grad_w(g, phi_);
    adam_phi_.step(phi_.data.data(), gp.data(), phi_lrs_.data(), phi_lrs_.size());
    if (!critic_only) adam_w_.step(w_new_.data(), gw.data(), cfg_.train.K);
  }
  adam_alpha_.step(&log_alpha_, &terms.grad_log_alpha, 1);

  Eigen::VectorXd theta_now = compose_new();
  soft_update(target_.data(), theta_now.data() + layout_.q1.begin, layout_.target_size(),
              cfg_.train.tau);

  acc_loss_q_ += terms.loss_q;
  ++acc_q_steps_;
  if (!critic_only) {
    acc_loss_pi_ += terms.loss_pi;
    ++acc_pi_steps_;
  }
}

void TransferRunner::do_eval(long step) {
  Rng rng = fork(cfg_.train.seed, streams::kEvalBase + static_cast<uint64_t>(eval_count_) * 1009);
  ++eval_count_;
  Eigen::VectorXd theta = compose_new();
  int hits = 0;
  for (int ep = 0; ep < cfg_.train.eval_episodes; ++ep) {
    EnvState st = env_reset(task_, rng);
    bool done = false;
    while (!done) {
      double obs[EnvState::kStateDim];
      st.observe(obs);
      PolicyOutput out = policy_forward(layout_, theta.data(), obs);
      std::vector<double> a = deterministic_action(out);
      StepResult sr = env_step(st, a.data(), task_);
      st = sr.next;
      done = sr.done;
    }
    if (st.success) ++hits;
  }
  EvalRecord rec;
  rec.env_step = step;
  rec.task_success = {static_cast<double>(hits) / cfg_.train.eval_episodes};
  rec.avg_success = rec.task_success[0];
  rec.loss_q = acc_q_steps_ ? acc_loss_q_ / acc_q_steps_ : 0.0;
  rec.loss_pi = acc_pi_steps_ ? acc_loss_pi_ / acc_pi_steps_ : 0.0;
  acc_loss_q_ = acc_loss_pi_ = 0.0;
  acc_q_steps_ = acc_pi_steps_ = 0;
  rec.alpha_mean = std::exp(log_alpha_);
  rec.wall_time_s = now_s() - start_time_;
  log_.records.push_back(rec);
}

RunLog TransferRunner::run() {
  start_time_ = now_s();
  log_.meta = {{"kind", "transfer"},
               {"task", task_.task_id},
               {"seed", cfg_.train.seed},
               {"freeze_phi", cfg_.freeze_phi},
               {"n_explore", cfg_.n_explore},
               {"n_max", cfg_.n_max},
               {"success_threshold", cfg_.success_threshold},
               {"config", cfg_.train.to_json()},
               {"layout_hash", layout_.hash()}};

  struct Slot {
    EnvState st;
    Eigen::VectorXd theta_explore;
    bool need_reset = true;
  };
  std::vector<Slot> slots(cfg_.train.n_parallel_envs);
  std::vector<Rng> rng_slots;
  for (int e = 0; e < cfg_.train.n_parallel_envs; ++e)
    rng_slots.push_back(fork(cfg_.train.seed, streams::kEnvBase + e));

  while (env_steps_ < cfg_.n_max) {
    for (int e = 0; e < cfg_.train.n_parallel_envs && env_steps_ < cfg_.n_max; ++e) {
      Slot& slot = slots[e];
      const bool warmup_phase = env_steps_ < cfg_.n_explore;
      if (slot.need_reset) {
        slot.st = env_reset(task_, rng_slots[e]);
        slot.need_reset = false;
        if (warmup_phase) {
          Eigen::VectorXd wt = explore_w(w_star_, rng_explore_);
          CompositionalVector cv{-1, wt};
          slot.theta_explore = compose(phi_, cv);
        }
      }
      double obs[EnvState::kStateDim];
      slot.st.observe(obs);
      const Eigen::VectorXd theta_act = warmup_phase ? slot.theta_explore : compose_new();
      PolicyOutput out = policy_forward(layout_, theta_act.data(), obs);
      std::vector<double> action = sample_action(out, rng_slots[e]).action;
      StepResult sr = env_step(slot.st, action.data(), task_);

      Transition tr;
      tr.task_id = task_.task_id;
      slot.st.observe(tr.state.data());
      sr.next.observe(tr.next_state.data());
      for (int i = 0; i < layout_.action_dim; ++i) tr.action[i] = action[i];
      tr.reward = sr.reward;
      tr.done = sr.done;
      tr.success = sr.next.success;
      buffer_.add(tr);

      slot.st = sr.next;
      slot.need_reset = sr.done;
      ++env_steps_;

      if (env_steps_ >= cfg_.train.warmup_steps)
        gradient_step(/*critic_only=*/env_steps_ <= cfg_.n_explore);
      if (env_steps_ % cfg_.train.eval_every == 0) do_eval(env_steps_);
    }
  }
  log_.validate();
  return log_;
}

TrainConfig scratch_config(const TrainConfig& base, long n_max) {
  TrainConfig c = base;
  c.K = 1;
  c.freeze_w = true;
  c.maskout_eps = 1e300;  // vanilla SAC has no maskout
  c.total_env_steps = n_max;
  return c;
}

RunLog run_scratch(const TrainConfig& base, const TaskSpec& task, long n_max) {
  MtrlTrainer trainer(scratch_config(base, n_max), {task}, PMode::uniform);
  RunLog log = trainer.run();
  log.meta["kind"] = "scratch";
  log.meta["task"] = task.task_id;
  return log;
}

}  // namespace taco

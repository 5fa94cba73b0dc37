#include "taco/trainer.hpp"

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

void Adam::step(double* params, const double* grad, size_t count) {
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < count; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

void Adam::step(double* params, const double* grad, const double* lrs, size_t count) {
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < count; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lrs[i] * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

void TrainConfig::validate(int num_tasks) const {
  if (num_tasks < 1) throw std::invalid_argument("TrainConfig: empty suite");
  if (batch_size < num_tasks || batch_size % num_tasks != 0)
    throw std::invalid_argument("TrainConfig: batch_size must be divisible by the task count");
  if (n_parallel_envs < 1 || K < 1 || eval_every < 1 || eval_episodes < 1)
    throw std::invalid_argument("TrainConfig: positive counts required");
  if (!(lr_policy > 0 && lr_q > 0 && lr_w > 0 && lr_alpha > 0 && gamma > 0 && tau > 0 &&
        tau <= 1.0 && maskout_eps > 0))
    throw std::invalid_argument("TrainConfig: positive rates required");
  if (hidden.empty()) throw std::invalid_argument("TrainConfig: hidden sizes required");
  if (total_env_steps < 0 || warmup_steps < 0)
    throw std::invalid_argument("TrainConfig: negative step counts");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"n_parallel_envs", n_parallel_envs},
          {"hidden", hidden},
          {"lr_policy", lr_policy},
          {"lr_q", lr_q},
          {"lr_w", lr_w},
          {"lr_alpha", lr_alpha},
          {"gamma", gamma},
          {"warmup_steps", warmup_steps},
          {"replay_capacity", replay_capacity},
          {"maskout_eps", maskout_eps},
          {"K", K},
          {"total_env_steps", total_env_steps},
          {"eval_every", eval_every},
          {"eval_episodes", eval_episodes},
          {"tau", tau},
          {"seed", seed},
          {"freeze_w", freeze_w},
          {"preset_weights", preset_weights},
          {"init_log_alpha", init_log_alpha}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.n_parallel_envs = j.value("n_parallel_envs", c.n_parallel_envs);
  c.hidden = j.value("hidden", c.hidden);
  c.lr_policy = j.value("lr_policy", c.lr_policy);
  c.lr_q = j.value("lr_q", c.lr_q);
  c.lr_w = j.value("lr_w", c.lr_w);
  c.lr_alpha = j.value("lr_alpha", c.lr_alpha);
  c.gamma = j.value("gamma", c.gamma);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
  c.maskout_eps = j.value("maskout_eps", c.maskout_eps);
  c.K = j.value("K", c.K);
  c.total_env_steps = j.value("total_env_steps", c.total_env_steps);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  c.tau = j.value("tau", c.tau);
  c.seed = j.value("seed", c.seed);
  c.freeze_w = j.value("freeze_w", c.freeze_w);
  c.preset_weights = j.value("preset_weights", c.preset_weights);
  c.init_log_alpha = j.value("init_log_alpha", c.init_log_alpha);
  return c;
}

std::string pmode_name(PMode m) {
  switch (m) {
    case PMode::uniform: return "uniform";
    case PMode::preset: return "preset";
    case PMode::online: return "online";
  }
  return "?";
}

MtrlTrainer::MtrlTrainer(TrainConfig cfg, std::vector<TaskSpec> suite, PMode mode)
    : cfg_(std::move(cfg)),
      suite_(std::move(suite)),
      mode_(mode),
      buffer_(cfg_.replay_capacity),
      rng_task_(fork_seed(cfg_.seed, streams::kTask)),
      rng_reset_(fork_seed(cfg_.seed, streams::kReset)) {
  const int T = static_cast<int>(suite_.size());
  cfg_.validate(T);
  layout_ = NetworkLayout::make(EnvState::kStateDim, EnvState::kActionDim, cfg_.hidden);

  Rng rng_init = fork(cfg_.seed, streams::kInit);
  phi_ = init_parameter_set(layout_.init_bounds(), cfg_.K, rng_init);
  for (int t = 0; t < T; ++t) {
    CompositionalVector col;
    col.task_id = suite_[t].task_id;
    if (cfg_.freeze_w) {
      col.w = Eigen::VectorXd::Ones(cfg_.K);
      if (cfg_.K != 1)
        throw std::invalid_argument("MtrlTrainer: freeze_w requires K = 1");
    } else {
      std::vector<double> b = sample_simplex(cfg_.K, rng_init);
      col.w = Eigen::Map<Eigen::VectorXd>(b.data(), cfg_.K);
    }
    W_.columns.push_back(std::move(col));
  }
  best_phi_ = phi_;
  best_W_ = W_;

  log_alpha_.assign(T, cfg_.init_log_alpha);
  targets_.resize(T);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd theta = compose_task(t);
    targets_[t].assign(theta.data() + layout_.q1.begin, theta.data() + layout_.q2.end);
  }

  adam_phi_.lr = cfg_.lr_policy;  // per-index lrs below
  adam_phi_.init(static_cast<size_t>(layout_.n) * cfg_.K);
  phi_lrs_.assign(layout_.n, cfg_.lr_q);
  for (int j = layout_.policy.begin; j < layout_.policy.end; ++j) phi_lrs_[j] = cfg_.lr_policy;
  adam_w_.resize(T);
  adam_alpha_.resize(T);
  for (int t = 0; t < T; ++t) {
    adam_w_[t].lr = cfg_.lr_w;
    adam_w_[t].init(cfg_.K);
    adam_alpha_[t].lr = cfg_.lr_alpha;
    adam_alpha_[t].init(1);
  }

  for (int t = 0; t < T; ++t) {
    rng_batch_.push_back(fork(cfg_.seed, streams::kBatchBase + t));
    rng_grad_.push_back(fork(cfg_.seed, streams::kGradBase + t));
  }
  for (int e = 0; e < cfg_.n_parallel_envs; ++e)
    rng_env_.push_back(fork(cfg_.seed, streams::kEnvBase + e));

  switch (mode_) {
    case PMode::uniform:
      P_.probs.assign(T, 1.0 / T);
      break;
    case PMode::preset:
      P_ = preset_weighted_probs(cfg_.preset_weights);
      if (static_cast<int>(P_.probs.size()) != T)
        throw std::invalid_argument("MtrlTrainer: preset weights size mismatch");
      break;
    case PMode::online:
      P_.probs.assign(T, 1.0 / T);  // adjusted at each eval
      break;
  }
}

Eigen::VectorXd MtrlTrainer::compose_task(int idx) const {
  return compose(phi_, W_.columns[idx]);
}

void MtrlTrainer::set_parameters(const ParameterSet& phi, const CompositionalMatrix& W) {
  if (phi.n() != layout_.n || phi.K() != cfg_.K || W.T() != static_cast<int>(suite_.size()))
    throw std::invalid_argument("set_parameters: shape mismatch");
  phi_ = phi;
  W_ = W;
  for (size_t t = 0; t < suite_.size(); ++t) {
    Eigen::VectorXd theta = compose_task(static_cast<int>(t));
    targets_[t].assign(theta.data() + layout_.q1.begin, theta.data() + layout_.q2.end);
  }
}

StepReport MtrlTrainer::train_step() {
  const int T = static_cast<int>(suite_.size());
  const int per_task = cfg_.batch_size / T;
  const int ad = layout_.action_dim;

  StepReport rep;
  rep.loss_q.assign(T, std::numeric_limits<double>::quiet_NaN());
  rep.loss_pi.assign(T, std::numeric_limits<double>::quiet_NaN());

  std::vector<SacTerms> terms(T);
  std::vector<bool> computed(T, false);
  std::vector<double> critic_losses;  // over computed tasks, suite order
  std::vector<int> computed_idx;

  for (int t = 0; t < T; ++t) {
    if (buffer_.task_size(suite_[t].task_id) < static_cast<size_t>(per_task)) {
      rep.skipped.push_back(t);
      continue;
    }
    SacBatch batch = buffer_.sample(suite_[t].task_id, per_task, rng_batch_[t]);
    std::vector<double> z_next(per_task * ad), z_actor(per_task * ad);
    for (double& z : z_next) z = rng_grad_[t].normal();
    for (double& z : z_actor) z = rng_grad_[t].normal();
    Eigen::VectorXd theta = compose_task(t);
    terms[t] = sac_losses(layout_, theta.data(), targets_[t].data(), log_alpha_[t], batch,
                          z_next.data(), z_actor.data(), cfg_.gamma);
    computed[t] = true;
    computed_idx.push_back(t);
    double lq = terms[t].loss_q;
    if (auto it = loss_override.find(t); it != loss_override.end()) lq = it->second;
    critic_losses.push_back(lq);
    rep.loss_q[t] = terms[t].loss_q;
    rep.loss_pi[t] = terms[t].loss_pi;
  }
  if (computed_idx.empty()) return rep;

  // loss maskout on the critic loss
  MaskResult mask = mask_losses(critic_losses, MaskoutPolicy(cfg_.maskout_eps));
  std::vector<int> valid, invalid;  // suite indices
  for (int v : mask.valid) valid.push_back(computed_idx[v]);
  for (int v : mask.invalid) invalid.push_back(computed_idx[v]);
  rep.masked = invalid;
  if (valid.empty())
    throw std::runtime_error(
        "train_step: every task's critic loss exceeded the maskout threshold; "
        "cannot reset w (empty valid set)");

  // gradients at the pre-update point
  Eigen::MatrixXd g_phi = Eigen::MatrixXd::Zero(layout_.n, cfg_.K);
  std::vector<Eigen::VectorXd> g_w(T);
  for (int t : valid) {
    Eigen::Map<const Eigen::VectorXd> g(terms[t].grad_theta.data(), layout_.n);
    g_phi += grad_phi(g, W_.columns[t]);
    g_w[t] = grad_w(g, phi_);
  }

  // Phi step (per-index lr: policy vs q rows)
  {
    std::vector<double> lrs(static_cast<size_t>(layout_.n) * cfg_.K);
    for (int k = 0; k < cfg_.K; ++k)
      for (int j = 0; j < layout_.n; ++j) lrs[k * layout_.n + j] = phi_lrs_[j];
    adam_phi_.step(phi_.data.data(), g_phi.data(), lrs.data(), lrs.size());
  }

  // per-task w and temperature steps
  for (int t : valid) {
    if (!cfg_.freeze_w) adam_w_[t].step(W_.columns[t].w.data(), g_w[t].data(), cfg_.K);
    adam_alpha_[t].step(&log_alpha_[t], &terms[t].grad_log_alpha, 1);
  }

  // w-reset for masked tasks
  for (int t : invalid) {
    CompositionalVector fresh = reset_w(W_, valid, rng_reset_);
    W_.columns[t].w = fresh.w;
    adam_w_[t].reset();
  }

  // target shadows track the composed critics
  for (int t : computed_idx) {
    Eigen::VectorXd theta = compose_task(t);
    soft_update(targets_[t].data(), theta.data() + layout_.q1.begin, layout_.target_size(),
                cfg_.tau);
  }

  rep.did_update = true;
  for (int t : valid) {
    acc_loss_q_ += terms[t].loss_q;
    acc_loss_pi_ += terms[t].loss_pi;
  }
  acc_steps_ += static_cast<long>(valid.size());
  return rep;
}

std::vector<double> MtrlTrainer::evaluate(uint64_t eval_index) const {
  const int T = static_cast<int>(suite_.size());
  std::vector<double> rates(T, 0.0);
  for (int t = 0; t < T; ++t) {
    Rng rng = fork(cfg_.seed, streams::kEvalBase + eval_index * 1009 + t);
    Eigen::VectorXd theta = compose_task(t);
    int hits = 0;
    for (int ep = 0; ep < cfg_.eval_episodes; ++ep) {
      EnvState st = env_reset(suite_[t], rng);
      bool done = false;
      while (!done) {
        double obs[EnvState::kStateDim];
        st.observe(obs);
        PolicyOutput out = policy_forward(layout_, theta.data(), obs);
        std::vector<double> a = deterministic_action(out);
        StepResult sr = env_step(st, a.data(), suite_[t]);
        st = sr.next;
        done = sr.done;
      }
      if (st.success) ++hits;
    }
    rates[t] = static_cast<double>(hits) / cfg_.eval_episodes;
  }
  return rates;
}

void MtrlTrainer::do_eval(long env_step) {
  std::vector<double> rates = evaluate(static_cast<uint64_t>(eval_count_));
  ++eval_count_;
  EvalRecord rec;
  rec.env_step = env_step;
  rec.task_success = rates;
  double sum = 0.0;
  for (double r : rates) sum += r;
  rec.avg_success = sum / rates.size();
  rec.loss_q = acc_steps_ ? acc_loss_q_ / acc_steps_ : 0.0;
  rec.loss_pi = acc_steps_ ? acc_loss_pi_ / acc_steps_ : 0.0;
  acc_loss_q_ = acc_loss_pi_ = 0.0;
  acc_steps_ = 0;
  double asum = 0.0;
  for (double la : log_alpha_) asum += std::exp(la);
  rec.alpha_mean = asum / log_alpha_.size();
  rec.wall_time_s = now_s() - start_time_;
  log_.records.push_back(rec);

  if (rec.avg_success > best_avg_) {
    best_avg_ = rec.avg_success;
    best_phi_ = phi_;
    best_W_ = W_;
  }
  if (mode_ == PMode::online) {
    auto [grouping, dist] = online_adjust(phi_, W_, layout_);
    grouping_ = std::move(grouping);
    P_ = std::move(dist);
  }
}

RunLog MtrlTrainer::run() {
  start_time_ = now_s();
  log_.meta = {{"kind", "pretrain"},
               {"pmode", pmode_name(mode_)},
               {"seed", cfg_.seed},
               {"config", cfg_.to_json()},
               {"layout_hash", layout_.hash()},
               {"tasks", [&] {
                  std::vector<int> ids;
                  for (const auto& s : suite_) ids.push_back(s.task_id);
                  return ids;
                }()}};

  struct Slot {
    int idx = -1;
    EnvState st;
    bool need_reset = true;
  };
  std::vector<Slot> slots(cfg_.n_parallel_envs);

  while (env_steps_ < cfg_.total_env_steps) {
    for (auto& slot : slots) {
      if (env_steps_ >= cfg_.total_env_steps) break;
      const int e = static_cast<int>(&slot - slots.data());
      if (slot.need_reset) {
        slot.idx = sample_task(P_, rng_task_);
        slot.st = env_reset(suite_[slot.idx], rng_env_[e]);
        slot.need_reset = false;
      }
      double obs[EnvState::kStateDim];
      slot.st.observe(obs);
      std::vector<double> action(layout_.action_dim);
      if (env_steps_ < cfg_.warmup_steps) {
        for (double& a : action) a = rng_env_[e].uniform(-1.0, 1.0);
      } else {
        Eigen::VectorXd theta = compose_task(slot.idx);
        PolicyOutput out = policy_forward(layout_, theta.data(), obs);
        action = sample_action(out, rng_env_[e]).action;
      }
      StepResult sr = env_step(slot.st, action.data(), suite_[slot.idx]);
      if (sr.action_clipped) ++clipped_actions_;

      Transition tr;
      tr.task_id = suite_[slot.idx].task_id;
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

      if (env_steps_ >= cfg_.warmup_steps) train_step();
      if (env_steps_ % cfg_.eval_every == 0) do_eval(env_steps_);
    }
  }
  log_.meta["clipped_actions"] = clipped_actions_;
  log_.validate();
  return log_;
}

}  // namespace taco

#pragma once

#include <limits>
#include <memory>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "taco/network.hpp"
#include "taco/paramspace.hpp"
#include "taco/replay.hpp"
#include "taco/runlog.hpp"
#include "taco/taskdist.hpp"
#include "taco/taskworld.hpp"

namespace taco {

// RNG stream ids, derived from the run seed via fork(). Shared between the
// trainers so paired runs can reproduce individual streams.
namespace streams {
inline constexpr uint64_t kInit = 1;
inline constexpr uint64_t kTask = 2;
inline constexpr uint64_t kReset = 3;
inline constexpr uint64_t kExplore = 4;
inline constexpr uint64_t kTransferInit = 5;
inline constexpr uint64_t kEnvBase = 100;
inline constexpr uint64_t kBatchBase = 10000;
inline constexpr uint64_t kGradBase = 20000;
inline constexpr uint64_t kEvalBase = 1000000;
}  // namespace streams

struct Adam {
  double lr = 3e-4;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  std::vector<double> m, v;

  void init(size_t count) {
    m.assign(count, 0.0);
    v.assign(count, 0.0);
    t = 0;
  }
  void reset() { init(m.size()); }
  void step(double* params, const double* grad, size_t count);
  // per-index learning rates (policy vs q slots)
  void step(double* params, const double* grad, const double* lrs, size_t count);
};

struct TrainConfig {
  int batch_size = 1280;  // total per gradient step, split evenly across tasks
  int n_parallel_envs = 10;
  std::vector<int> hidden = {64, 64};
  double lr_policy = 3e-4;
  double lr_q = 3e-4;
  double lr_w = 3e-4;
  double lr_alpha = 3e-4;
  double gamma = 0.99;
  long warmup_steps = 1500;  // uniform-random exploration, no updates
  size_t replay_capacity = 1000000;
  double maskout_eps = 3e3;  // extreme critic-loss threshold
  int K = 5;
  long total_env_steps = 100000;
  long eval_every = 2000;
  int eval_episodes = 5;
  double tau = 0.005;
  uint64_t seed = 0;
  bool freeze_w = false;                // vanilla single-task SAC mode
  std::vector<double> preset_weights;   // for PMode::preset
  double init_log_alpha = -1.6094379124341003;  // log(0.2)

  void validate(int num_tasks) const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

enum class PMode { uniform, preset, online };
std::string pmode_name(PMode m);

struct StepReport {
  bool did_update = false;
  std::vector<double> loss_q, loss_pi;  // NaN for skipped tasks
  std::vector<int> masked;              // suite indices masked + reset this step
  std::vector<int> skipped;             // suite indices without enough data
};

// Algorithm: per gradient step, compute each sampled task's SAC losses on
// its composed parameters, mask extreme critic losses, update Phi with the
// summed masked gradient, update each valid task's w with its own gradient,
// reset exploded w's as convex combinations of valid ones, then soft-update
// the per-task target shadows.
class MtrlTrainer {
 public:
  MtrlTrainer(TrainConfig cfg, std::vector<TaskSpec> suite, PMode mode);

  StepReport train_step();
  RunLog run();  // full pretraining loop

  // Deterministic evaluation: eval_episodes per task, success-rate each.
  std::vector<double> evaluate(uint64_t eval_index) const;

  const TrainConfig& config() const { return cfg_; }
  const std::vector<TaskSpec>& suite() const { return suite_; }
  const NetworkLayout& layout() const { return layout_; }
  const ParameterSet& phi() const { return phi_; }
  const CompositionalMatrix& W() const { return W_; }
  const ParameterSet& best_phi() const { return best_phi_; }
  const CompositionalMatrix& best_W() const { return best_W_; }
  const std::vector<double>& log_alphas() const { return log_alpha_; }
  const std::vector<std::vector<double>>& targets() const { return targets_; }
  const TaskDistribution& distribution() const { return P_; }
  ReplayBuffer& buffer() { return buffer_; }

  // Warm-start (resume / transfer experiments).
  void set_parameters(const ParameterSet& phi, const CompositionalMatrix& W);

  // Test hook: overrides a task's critic loss for the maskout decision.
  std::unordered_map<int, double> loss_override;

 private:
  Eigen::VectorXd compose_task(int idx) const;
  void do_eval(long env_step);

  TrainConfig cfg_;
  std::vector<TaskSpec> suite_;
  PMode mode_;
  NetworkLayout layout_;
  ParameterSet phi_;
  CompositionalMatrix W_;
  ParameterSet best_phi_;
  CompositionalMatrix best_W_;
  double best_avg_ = -1.0;
  std::vector<double> log_alpha_;
  std::vector<std::vector<double>> targets_;  // per task, q1|q2 shadow
  ReplayBuffer buffer_;
  TaskDistribution P_;
  TaskGrouping grouping_;

  Adam adam_phi_;
  std::vector<double> phi_lrs_;  // per flat index (policy vs q lr)
  std::vector<Adam> adam_w_;
  std::vector<Adam> adam_alpha_;

  std::vector<Rng> rng_batch_, rng_grad_, rng_env_;
  Rng rng_task_, rng_reset_;

  RunLog log_;
  long env_steps_ = 0;
  long eval_count_ = 0;
  double acc_loss_q_ = 0.0, acc_loss_pi_ = 0.0;
  long acc_steps_ = 0;
  long clipped_actions_ = 0;
  double start_time_ = 0.0;
};

}  // namespace taco

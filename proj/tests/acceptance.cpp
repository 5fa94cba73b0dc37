// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.
//
// Fast criteria (1-6, 10) are property/oracle checks; the desk-scale runs
// (7-9) use the budgets committed in configs/acceptance.json.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taco/fpenv.hpp"
#include "taco/metrics.hpp"
#include "taco/taskdist.hpp"
#include "taco/transfer.hpp"

using namespace taco;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

int g_checks = 0, g_failures = 0;

void expect(bool ok, const char* what) {
  ++g_checks;
  if (!ok) {
    ++g_failures;
    std::printf("    check failed: %s\n", what);
  }
}

#define EXPECT(cond) expect((cond), #cond)

bool approx(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// Relative closeness for finite-difference comparisons: tolerant near zero.
bool fd_close(double got, double fd, double rel) {
  const double scale = std::max({std::abs(got), std::abs(fd), 1e-3});
  return std::abs(got - fd) <= rel * scale;
}

nlohmann::json load_budgets() {
  std::ifstream in(std::string(TACO_SOURCE_DIR) + "/configs/acceptance.json");
  if (!in) throw std::runtime_error("missing configs/acceptance.json");
  nlohmann::json j;
  in >> j;
  return j;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Best evaluation average within the run (the budget equals the run length).
double best_avg(const RunLog& log) {
  double best = 0.0;
  for (const auto& r : log.records) best = std::max(best, r.avg_success);
  return best;
}

// ---------------------------------------------------------------------------
// 1. gradient oracles vs central finite differences
// ---------------------------------------------------------------------------

bool criterion_1() {
  auto t0 = clk::now();
  Rng rng(1001);
  const double h = 1e-5;
  int instances = 0;

  // composition gradients: loss L(theta) = sum_j c_j sin(theta_j)
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 5 + static_cast<int>(rng.index(40));
    const int K = 1 + static_cast<int>(rng.index(4));
    Eigen::MatrixXd m(n, K);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < K; ++k) m(j, k) = rng.uniform(-1, 1);
    ParameterSet phi(m);
    CompositionalVector w{0, Eigen::VectorXd::Zero(K)};
    for (int k = 0; k < K; ++k) w.w[k] = rng.uniform(-1, 1);
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c[j] = rng.uniform(-1, 1);
    auto loss = [&](const ParameterSet& p, const CompositionalVector& cv) {
      Eigen::VectorXd theta = compose(p, cv);
      double L = 0;
      for (int j = 0; j < n; ++j) L += c[j] * std::sin(theta[j]);
      return L;
    };
    Eigen::VectorXd theta = compose(phi, w);
    Eigen::VectorXd g(n);
    for (int j = 0; j < n; ++j) g[j] = c[j] * std::cos(theta[j]);
    Eigen::MatrixXd gp = grad_phi(g, w);
    Eigen::VectorXd gw = grad_w(g, phi);
    // spot-check strided entries against FD
    for (int j = 0; j < n; j += 7)
      for (int k = 0; k < K; ++k) {
        ParameterSet pp = phi, pm = phi;
        pp.data(j, k) += h;
        pm.data(j, k) -= h;
        const double fd = (loss(pp, w) - loss(pm, w)) / (2 * h);
        EXPECT(fd_close(gp(j, k), fd, 1e-4));
      }
    for (int k = 0; k < K; ++k) {
      CompositionalVector wp = w, wm = w;
      wp.w[k] += h;
      wm.w[k] -= h;
      const double fd = (loss(phi, wp) - loss(phi, wm)) / (2 * h);
      EXPECT(fd_close(gw[k], fd, 1e-4));
    }
    ++instances;
  }

  // SAC losses on random [8,8] networks (stop-gradient structure included)
  for (int rep = 0; rep < 60; ++rep) {
    NetworkLayout lay = NetworkLayout::make(4 + static_cast<int>(rng.index(3)), 2, {8, 8});
    std::vector<double> theta = init_theta(lay, rng);
    std::vector<double> full = init_theta(lay, rng);
    std::vector<double> tgt(full.begin() + lay.q1.begin, full.begin() + lay.q2.end);
    const double log_alpha = rng.uniform(-2, 0);
    const int B = 2;
    SacBatch b;
    b.state_dim = lay.state_dim;
    b.action_dim = lay.action_dim;
    for (int i = 0; i < B * lay.state_dim; ++i) {
      b.states.push_back(rng.normal());
      b.next_states.push_back(rng.normal());
    }
    for (int i = 0; i < B * lay.action_dim; ++i) b.actions.push_back(rng.uniform(-1, 1));
    for (int i = 0; i < B; ++i) {
      b.rewards.push_back(rng.uniform(-1, 1));
      b.dones.push_back(rng.uniform() < 0.3 ? 1.0 : 0.0);
    }
    std::vector<double> z_next(B * lay.action_dim), z_actor(B * lay.action_dim);
    for (auto& z : z_next) z = rng.normal();
    for (auto& z : z_actor) z = rng.normal();

    CriticResult cr = critic_loss(lay, theta.data(), tgt.data(), log_alpha, b, z_next.data(), 0.99);
    for (int j = lay.policy.begin; j < lay.policy.end; j += 13) EXPECT(cr.grad_theta[j] == 0.0);
    for (int j = lay.q1.begin; j < lay.q2.end; j += 31) {
      std::vector<double> tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const double fd =
          (critic_loss(lay, tp.data(), tgt.data(), log_alpha, b, z_next.data(), 0.99).loss -
           critic_loss(lay, tm.data(), tgt.data(), log_alpha, b, z_next.data(), 0.99).loss) /
          (2 * h);
      EXPECT(fd_close(cr.grad_theta[j], fd, 1e-4));
    }

    ActorResult ar = actor_loss(lay, theta.data(), b, z_actor.data(), log_alpha);
    for (int j = lay.q1.begin; j < lay.q2.end; j += 31) EXPECT(ar.grad_theta[j] == 0.0);
    for (int j = lay.policy.begin; j < lay.policy.end; j += 23) {
      std::vector<double> tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const double fd = (actor_loss(lay, tp.data(), b, z_actor.data(), log_alpha).loss -
                         actor_loss(lay, tm.data(), b, z_actor.data(), log_alpha).loss) /
                        (2 * h);
      EXPECT(fd_close(ar.grad_theta[j], fd, 1e-4));
    }

    AlphaResult al = alpha_loss(log_alpha, ar.mean_log_prob, -2.0);
    const double fd_a = (alpha_loss(log_alpha + h, ar.mean_log_prob, -2.0).loss -
                         alpha_loss(log_alpha - h, ar.mean_log_prob, -2.0).loss) /
                        (2 * h);
    EXPECT(fd_close(al.grad_log_alpha, fd_a, 1e-6));
    ++instances;
  }

  EXPECT(instances >= 100);
  const double secs = seconds_since(t0);
  EXPECT(secs < 60.0);
  std::printf("    (%d instances, %.1f s)\n", instances, secs);
  return true;
}

// ---------------------------------------------------------------------------
// 2. simplex draw statistics
// ---------------------------------------------------------------------------

bool criterion_2() {
  const int N = 10000;
  for (int V : {2, 3, 5, 8}) {
    Rng rng(2000 + V);
    std::vector<double> mean(V, 0.0);
    for (int i = 0; i < N; ++i) {
      std::vector<double> b = sample_simplex(V, rng);
      double sum = 0.0;
      for (int k = 0; k < V; ++k) {
        EXPECT(b[k] >= 0.0);
        sum += b[k];
        mean[k] += b[k];
      }
      EXPECT(std::abs(sum - 1.0) <= 1e-9);
    }
    // Var of a flat-Dirichlet coordinate is (V-1) / (V^2 (V+1))
    const double se = std::sqrt((V - 1.0) / (double(V) * V * (V + 1.0)) / N);
    for (int k = 0; k < V; ++k) EXPECT(std::abs(mean[k] / N - 1.0 / V) <= 3.0 * se);
  }

  // the same property holds through the reset_w and explore_w paths
  Rng rng(2100);
  CompositionalMatrix W;
  for (int t = 0; t < 4; ++t) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(4);
    w[t] = 1.0;  // identity columns: the mixture equals the beta draw
    W.columns.push_back({t, w});
  }
  std::vector<double> mean_r(3, 0.0), mean_e(4, 0.0);
  for (int i = 0; i < N; ++i) {
    CompositionalVector r = reset_w(W, {0, 1, 2}, rng);
    for (int k = 0; k < 3; ++k) mean_r[k] += r.w[k];
    EXPECT(r.w[3] == 0.0);
    Eigen::VectorXd e = explore_w(W, rng);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      EXPECT(e[k] >= 0.0);
      sum += e[k];
      mean_e[k] += e[k];
    }
    EXPECT(std::abs(sum - 1.0) <= 1e-9);
  }
  const double se3 = std::sqrt(2.0 / (9.0 * 4.0) / N);
  for (int k = 0; k < 3; ++k) EXPECT(std::abs(mean_r[k] / N - 1.0 / 3) <= 3.0 * se3);
  const double se4 = std::sqrt(3.0 / (16.0 * 5.0) / N);
  for (int k = 0; k < 4; ++k) EXPECT(std::abs(mean_e[k] / N - 1.0 / 4) <= 3.0 * se4);
  return true;
}

// ---------------------------------------------------------------------------
// 3. maskout / reset exactness (paired run, bitwise)
// ---------------------------------------------------------------------------

Transition random_transition(int task_id, Rng& rng) {
  Transition t;
  t.task_id = task_id;
  for (auto& v : t.state) v = rng.uniform(-1, 1);
  for (auto& v : t.next_state) v = rng.uniform(-1, 1);
  for (auto& v : t.action) v = rng.uniform(-1, 1);
  t.reward = rng.uniform(-1, 1);
  t.done = false;
  return t;
}

bool criterion_3() {
  auto t0 = clk::now();
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.hidden = {8, 8};
  cfg.K = 3;
  cfg.seed = 5;
  std::vector<TaskSpec> suite = make_suite("mt4-toy", 0);
  const int masked_idx = 2;

  MtrlTrainer A(cfg, suite, PMode::uniform);
  MtrlTrainer B(cfg, suite, PMode::uniform);
  // identical replay contents except the masked task's transitions
  Rng fill(1234), fill_b(1234), junk(999);
  for (int t = 0; t < 4; ++t)
    for (int i = 0; i < 10; ++i) {
      A.buffer().add(random_transition(suite[t].task_id, fill));
      Transition tr = random_transition(suite[t].task_id, fill_b);
      if (t == masked_idx) tr = random_transition(suite[t].task_id, junk);
      B.buffer().add(tr);
    }
  A.loss_override[masked_idx] = 1e9;  // force super-threshold critic loss
  B.loss_override[masked_idx] = 1e9;

  StepReport ra = A.train_step();
  StepReport rb = B.train_step();
  EXPECT(ra.did_update && rb.did_update);
  EXPECT(ra.masked == std::vector<int>{masked_idx});

  // the shared update must be bit-identical despite different masked batches
  EXPECT(A.phi().data == B.phi().data);
  for (int t = 0; t < 4; ++t) {
    if (t == masked_idx) continue;
    EXPECT(A.W().columns[t].w == B.W().columns[t].w);
    EXPECT(A.log_alphas()[t] == B.log_alphas()[t]);
  }

  // the masked w became the convex combination drawn from the reset stream
  Rng reset_stream = fork(cfg.seed, streams::kReset);
  std::vector<double> beta = sample_simplex(3, reset_stream);
  Eigen::VectorXd want = Eigen::VectorXd::Zero(cfg.K);
  int bi = 0;
  for (int t = 0; t < 4; ++t)
    if (t != masked_idx) want += beta[bi++] * A.W().columns[t].w;
  EXPECT(A.W().columns[masked_idx].w == want);
  EXPECT(seconds_since(t0) < 10.0);
  return true;
}

// ---------------------------------------------------------------------------
// 4. K=1 frozen-w trainer reduces bit-exactly to plain SAC over 1000 steps
// ---------------------------------------------------------------------------

bool criterion_4() {
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.n_parallel_envs = 3;
  cfg.hidden = {8, 8};
  cfg.K = 1;
  cfg.freeze_w = true;
  cfg.maskout_eps = 1e300;
  cfg.warmup_steps = 100;
  cfg.total_env_steps = 1000;
  cfg.eval_every = 400;
  cfg.eval_episodes = 2;
  cfg.seed = 3;
  TaskSpec task = find_task(0);
  MtrlTrainer trainer(cfg, {task}, PMode::uniform);
  trainer.run();

  // independent plain-SAC loop over the same streams, no Phi/W machinery
  NetworkLayout lay = NetworkLayout::make(EnvState::kStateDim, EnvState::kActionDim, cfg.hidden);
  Rng rng_init = fork(cfg.seed, streams::kInit);
  std::vector<double> theta = init_theta(lay, rng_init);
  std::vector<double> target(theta.begin() + lay.q1.begin, theta.begin() + lay.q2.end);
  double log_alpha = cfg.init_log_alpha;
  ReplayBuffer buffer(cfg.replay_capacity);
  Rng rng_batch = fork(cfg.seed, streams::kBatchBase);
  Rng rng_grad = fork(cfg.seed, streams::kGradBase);
  std::vector<Rng> rng_env;
  for (int e = 0; e < cfg.n_parallel_envs; ++e)
    rng_env.push_back(fork(cfg.seed, streams::kEnvBase + e));
  Adam adam_theta, adam_alpha;
  adam_theta.init(lay.n);
  adam_alpha.lr = cfg.lr_alpha;
  adam_alpha.init(1);
  std::vector<double> lrs(lay.n, cfg.lr_q);
  for (int j = lay.policy.begin; j < lay.policy.end; ++j) lrs[j] = cfg.lr_policy;

  struct Slot {
    EnvState st;
    bool need_reset = true;
  };
  std::vector<Slot> slots(cfg.n_parallel_envs);
  long steps = 0;
  while (steps < cfg.total_env_steps) {
    for (int e = 0; e < cfg.n_parallel_envs && steps < cfg.total_env_steps; ++e) {
      if (slots[e].need_reset) {
        slots[e].st = env_reset(task, rng_env[e]);
        slots[e].need_reset = false;
      }
      double obs[EnvState::kStateDim];
      slots[e].st.observe(obs);
      std::vector<double> action(lay.action_dim);
      if (steps < cfg.warmup_steps) {
        for (double& a : action) a = rng_env[e].uniform(-1.0, 1.0);
      } else {
        PolicyOutput out = policy_forward(lay, theta.data(), obs);
        action = sample_action(out, rng_env[e]).action;
      }
      StepResult sr = env_step(slots[e].st, action.data(), task);
      Transition tr;
      tr.task_id = task.task_id;
      slots[e].st.observe(tr.state.data());
      sr.next.observe(tr.next_state.data());
      for (int i = 0; i < lay.action_dim; ++i) tr.action[i] = action[i];
      tr.reward = sr.reward;
      tr.done = sr.done;
      tr.success = sr.next.success;
      buffer.add(tr);
      slots[e].st = sr.next;
      slots[e].need_reset = sr.done;
      ++steps;
      if (steps >= cfg.warmup_steps &&
          buffer.task_size(task.task_id) >= static_cast<size_t>(cfg.batch_size)) {
        SacBatch batch = buffer.sample(task.task_id, cfg.batch_size, rng_batch);
        std::vector<double> z_next(cfg.batch_size * lay.action_dim),
            z_actor(cfg.batch_size * lay.action_dim);
        for (double& z : z_next) z = rng_grad.normal();
        for (double& z : z_actor) z = rng_grad.normal();
        SacTerms terms = sac_losses(lay, theta.data(), target.data(), log_alpha, batch,
                                    z_next.data(), z_actor.data(), cfg.gamma);
        adam_theta.step(theta.data(), terms.grad_theta.data(), lrs.data(), lay.n);
        adam_alpha.step(&log_alpha, &terms.grad_log_alpha, 1);
        soft_update(target.data(), theta.data() + lay.q1.begin, lay.target_size(), cfg.tau);
      }
    }
  }

  Eigen::VectorXd phi_col = trainer.phi().data.col(0);
  int mismatch = 0;
  for (int j = 0; j < lay.n; ++j)
    if (phi_col[j] != theta[j]) ++mismatch;
  EXPECT(mismatch == 0);
  EXPECT(trainer.log_alphas()[0] == log_alpha);
  EXPECT(trainer.targets()[0] == target);
  return true;
}

// ---------------------------------------------------------------------------
// 5. DBSCAN vs brute-force core-point-expansion oracle
// ---------------------------------------------------------------------------

std::vector<int> dbscan_oracle(const std::vector<std::vector<double>>& pts, double eps,
                               int min_pts) {
  const int N = static_cast<int>(pts.size());
  auto d = [&](int a, int b) {
    double s = 0.0;
    for (size_t i = 0; i < pts[a].size(); ++i) {
      const double v = pts[a][i] - pts[b][i];
      s += v * v;
    }
    return std::sqrt(s);
  };
  std::vector<bool> core(N, false);
  for (int i = 0; i < N; ++i) {
    int cnt = 0;
    for (int j = 0; j < N; ++j)
      if (d(i, j) <= eps) ++cnt;
    core[i] = cnt >= min_pts;
  }
  std::vector<int> parent(N);
  for (int i = 0; i < N; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if (core[i] && core[j] && d(i, j) <= eps) parent[find(i)] = find(j);
  std::vector<int> label(N, -1);
  std::map<int, int> roots;
  for (int i = 0; i < N; ++i)
    if (core[i]) {
      const int r = find(i);
      if (!roots.count(r)) roots[r] = static_cast<int>(roots.size());
      label[i] = roots[r];
    }
  for (int i = 0; i < N; ++i) {
    if (core[i]) continue;
    for (int j = 0; j < N; ++j)
      if (core[j] && d(i, j) <= eps) {
        label[i] = label[j];
        break;
      }
  }
  return label;
}

bool equivalent_labels(const std::vector<int>& a, const std::vector<int>& b,
                       const std::vector<std::vector<double>>& pts, double eps, int min_pts) {
  const int N = static_cast<int>(a.size());
  auto d = [&](int x, int y) {
    double s = 0.0;
    for (size_t i = 0; i < pts[x].size(); ++i) {
      const double v = pts[x][i] - pts[y][i];
      s += v * v;
    }
    return std::sqrt(s);
  };
  std::vector<bool> core(N, false);
  for (int i = 0; i < N; ++i) {
    int cnt = 0;
    for (int j = 0; j < N; ++j)
      if (d(i, j) <= eps) ++cnt;
    core[i] = cnt >= min_pts;
  }
  for (int i = 0; i < N; ++i)
    if ((a[i] < 0) != (b[i] < 0)) return false;
  std::map<int, int> fwd, bwd;
  for (int i = 0; i < N; ++i) {
    if (!core[i] || a[i] < 0) continue;
    if (fwd.count(a[i]) && fwd[a[i]] != b[i]) return false;
    if (bwd.count(b[i]) && bwd[b[i]] != a[i]) return false;
    fwd[a[i]] = b[i];
    bwd[b[i]] = a[i];
  }
  // border points may attach to any adjacent cluster, but must attach to one
  // that owns a core point within eps
  for (int i = 0; i < N; ++i) {
    if (core[i] || a[i] < 0) continue;
    bool ok_a = false, ok_b = false;
    for (int j = 0; j < N; ++j) {
      if (!core[j] || d(i, j) > eps) continue;
      if (a[j] == a[i]) ok_a = true;
      if (b[j] == b[i]) ok_b = true;
    }
    if (!ok_a || !ok_b) return false;
  }
  return true;
}

bool criterion_5() {
  Rng rng(5001);
  for (int rep = 0; rep < 100; ++rep) {
    const int N = 2 + static_cast<int>(rng.index(49));
    const int dim = 1 + static_cast<int>(rng.index(3));
    std::vector<std::vector<double>> pts(N, std::vector<double>(dim));
    for (auto& p : pts)
      for (double& v : p) v = rng.uniform(-1.0, 1.0);
    const double eps = rng.uniform(0.05, 0.8);
    const int min_pts = 1 + static_cast<int>(rng.index(5));
    std::vector<int> got = dbscan(pts, eps, min_pts);
    std::vector<int> want = dbscan_oracle(pts, eps, min_pts);
    EXPECT(equivalent_labels(got, want, pts, eps, min_pts));
  }
  return true;
}

// ---------------------------------------------------------------------------
// 6. metric exactness + golden report CSV
// ---------------------------------------------------------------------------

RunLog ramp_log(long at, long every, long last, double level = 0.9) {
  RunLog log;
  for (long s = every; s <= last; s += every) {
    EvalRecord r;
    r.env_step = s;
    r.avg_success = s >= at ? level : level * 0.5 * double(s) / double(at);
    r.task_success = {r.avg_success};
    log.records.push_back(r);
  }
  return log;
}

RunLog flat_log(long every, long last, double level) {
  RunLog log;
  for (long s = every; s <= last; s += every) {
    EvalRecord r;
    r.env_step = s;
    r.avg_success = level;
    r.task_success = {level};
    log.records.push_back(r);
  }
  return log;
}

bool criterion_6() {
  EXPECT(approx(*relative_cost(1e6, 1.0, 2e6, 1.0), 0.5, 1e-12));
  EXPECT(approx(*relative_cost(3e6, 0.5, 3e6, 1.0), 2.0, 1e-12));
  EXPECT(!relative_cost(1e6, 0.0, 2e6, 1.0).has_value());
  EXPECT(!relative_cost(1e6, 1.0, 2e6, 0.0).has_value());

  RunLog log = ramp_log(6000, 2000, 10000);
  EXPECT(required_steps(log, 0.9, 10000) == std::optional<long>(6000));
  EXPECT(required_steps(flat_log(2000, 10000, 0.5), 0.9, 10000) == std::nullopt);
  RunLog cross = flat_log(2000, 10000, 0.0);
  cross.records[3].avg_success = 0.95;  // step 8000
  EXPECT(required_steps(cross, 0.9, 10000) == std::optional<long>(8000));
  EXPECT(required_steps(cross, 0.9, 7000) == std::nullopt);

  // golden CSV byte-for-byte (same fixture construction as the unit test)
  const long n_max = 10000, every = 2000;
  std::vector<std::pair<uint64_t, RunLog>> tr100 = {{0, ramp_log(2000, every, n_max)},
                                                    {1, ramp_log(4000, every, n_max)},
                                                    {2, flat_log(every, n_max, 0.0)},
                                                    {3, ramp_log(2000, every, n_max)},
                                                    {4, ramp_log(4000, every, n_max)}};
  std::vector<std::pair<uint64_t, RunLog>> sc100 = {{0, ramp_log(8000, every, n_max)},
                                                    {1, flat_log(every, n_max, 0.2)},
                                                    {2, flat_log(every, n_max, 0.4)},
                                                    {3, ramp_log(8000, every, n_max)},
                                                    {4, ramp_log(6000, every, n_max)}};
  std::vector<std::pair<uint64_t, RunLog>> tr200 = {{0, flat_log(every, n_max, 0.1)},
                                                    {1, flat_log(every, n_max, 0.1)}};
  std::vector<std::pair<uint64_t, RunLog>> sc200 = {{0, ramp_log(5000, 1000, n_max)},
                                                    {1, flat_log(every, n_max, 0.1)}};
  std::vector<TransferReport> reports = {make_transfer_report("100", tr100, sc100, 0.9, n_max),
                                         make_transfer_report("200", tr200, sc200, 0.9, n_max)};
  const std::string csv = report_csv(reports);
  std::ifstream in(std::string(TACO_SOURCE_DIR) + "/tests/fixtures/golden_report.csv");
  EXPECT(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT(csv == ss.str());
  return true;
}

// ---------------------------------------------------------------------------
// 7. desk-scale single-task sanity (scratch SAC on the toy reach task)
// ---------------------------------------------------------------------------

TrainConfig desk_config(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.hidden = j.at("hidden").get<std::vector<int>>();
  cfg.warmup_steps = j.at("warmup_steps").get<long>();
  cfg.eval_every = j.at("eval_every").get<long>();
  cfg.eval_episodes = j.at("eval_episodes").get<int>();
  if (j.contains("lr")) {
    const double lr = j.at("lr").get<double>();
    cfg.lr_policy = cfg.lr_q = cfg.lr_w = cfg.lr_alpha = lr;
  }
  return cfg;
}

bool criterion_7(const nlohmann::json& budgets) {
  auto t0 = clk::now();
  const auto& b = budgets.at("single_task");
  const long steps = b.at("steps").get<long>();
  std::vector<double> best;
  for (uint64_t seed : {0, 1, 2}) {
    TrainConfig cfg = desk_config(b);
    cfg.seed = seed;
    RunLog log = run_scratch(cfg, find_task(0), steps);
    best.push_back(best_avg(log));
    std::printf("    seed %llu: best eval %.2f\n", (unsigned long long)seed, best.back());
  }
  EXPECT(median(best) >= 0.9);
  const double secs = seconds_since(t0);
  EXPECT(secs < 900.0);
  std::printf("    (%.0f s)\n", secs);
  return true;
}

// ---------------------------------------------------------------------------
// 8. desk-scale MTRL analogue on mt4-toy (uniform vs group-balanced online)
// ---------------------------------------------------------------------------

struct Mt4Result {
  std::vector<double> best;            // per seed
  Checkpoint best_ckpt;                // seed 0, for criterion 9
};

Mt4Result run_mt4(const nlohmann::json& b, PMode mode) {
  Mt4Result res;
  std::vector<TaskSpec> suite = make_suite("mt4-toy", 0);
  for (uint64_t seed : {0, 1, 2}) {
    TrainConfig cfg = desk_config(b);
    cfg.K = b.at("K").get<int>();
    cfg.total_env_steps = b.at("steps").get<long>();
    cfg.seed = seed;
    MtrlTrainer trainer(cfg, suite, mode);
    RunLog log = trainer.run();
    res.best.push_back(best_avg(log));
    std::printf("    %s seed %llu: best eval %.2f\n", pmode_name(mode).c_str(),
                (unsigned long long)seed, res.best.back());
    if (seed == 0) {
      res.best_ckpt.layout = trainer.layout();
      res.best_ckpt.phi = trainer.best_phi();
      res.best_ckpt.W = trainer.best_W();
    }
  }
  return res;
}

bool criterion_8(const nlohmann::json& budgets, Checkpoint& ckpt_out) {
  const auto& b = budgets.at("mt4");
  Mt4Result uni = run_mt4(b, PMode::uniform);
  Mt4Result online = run_mt4(b, PMode::online);
  const double m_uni = median(uni.best), m_online = median(online.best);
  std::printf("    median uniform %.2f, online %.2f\n", m_uni, m_online);
  EXPECT(std::max(m_uni, m_online) >= 0.8);
  EXPECT(m_online >= m_uni - 0.05);
  ckpt_out = online.best_ckpt;
  return true;
}

// ---------------------------------------------------------------------------
// 9. desk-scale transfer analogue (paired compare + fixed-Phi variant)
// ---------------------------------------------------------------------------

bool criterion_9(const nlohmann::json& budgets, const Checkpoint& ckpt) {
  const auto& b = budgets.at("transfer");
  const long n_max = b.at("n_max").get<long>();
  const long n_explore = b.at("n_explore").get<long>();
  const double threshold = b.at("threshold").get<double>();

  // paired transfer-vs-scratch on the related held-out reach task
  TaskSpec task = find_task(b.at("related_task").get<int>());
  std::vector<double> costs;
  for (uint64_t seed : {0, 1, 2, 3, 4}) {
    TransferConfig tcfg;
    tcfg.train = desk_config(b);
    tcfg.train.K = ckpt.phi.K();
    tcfg.train.seed = seed;
    tcfg.n_explore = n_explore;
    tcfg.n_max = n_max;
    tcfg.success_threshold = threshold;
    TransferRunner runner(tcfg, ckpt, task);
    RunLog tlog = runner.run();

    TrainConfig scfg = desk_config(b);
    scfg.seed = seed;
    RunLog slog = run_scratch(scfg, task, n_max);

    auto nt = required_steps(tlog, threshold, n_max);
    auto ns = required_steps(slog, threshold, n_max);
    // per-seed cost with the budget standing in for unreached runs
    const double cost = double(nt.value_or(n_max)) / double(ns.value_or(n_max));
    costs.push_back(cost);
    std::printf("    seed %llu: transfer %s, scratch %s, cost %.3f\n", (unsigned long long)seed,
                nt ? std::to_string(*nt).c_str() : "not reached",
                ns ? std::to_string(*ns).c_str() : "not reached", cost);
  }
  EXPECT(median(costs) < 1.0);

  // fixed-Phi variant on the near-duplicate extension task
  TaskSpec near = find_task(b.at("near_duplicate_task").get<int>());
  std::vector<double> fixed_best;
  for (uint64_t seed : {0, 1, 2}) {
    TransferConfig tcfg;
    tcfg.train = desk_config(b);
    tcfg.train.K = ckpt.phi.K();
    tcfg.train.seed = seed;
    tcfg.n_explore = n_explore;
    tcfg.n_max = b.at("fixed_phi_steps").get<long>();
    tcfg.freeze_phi = true;
    TransferRunner runner(tcfg, ckpt, near);
    RunLog log = runner.run();
    fixed_best.push_back(best_avg(log));
    std::printf("    fixed-phi seed %llu: best eval %.2f\n", (unsigned long long)seed,
                fixed_best.back());
  }
  EXPECT(median(fixed_best) >= 0.7);
  return true;
}

// ---------------------------------------------------------------------------
// 10. transfer freeze contracts (bitwise)
// ---------------------------------------------------------------------------

Checkpoint fake_pretrained(const TrainConfig& cfg, int tasks, uint64_t seed) {
  Checkpoint c;
  c.layout = NetworkLayout::make(EnvState::kStateDim, EnvState::kActionDim, cfg.hidden);
  Rng rng(seed);
  c.phi = init_parameter_set(c.layout.init_bounds(), cfg.K, rng);
  for (int id = 0; id < tasks; ++id) {
    std::vector<double> b = sample_simplex(cfg.K, rng);
    c.W.columns.push_back({id, Eigen::Map<Eigen::VectorXd>(b.data(), cfg.K)});
  }
  return c;
}

bool criterion_10() {
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.n_parallel_envs = 2;
  cfg.hidden = {8, 8};
  cfg.K = 3;
  cfg.warmup_steps = 100;
  cfg.eval_every = 200;
  cfg.eval_episodes = 2;
  cfg.seed = 17;
  Checkpoint ckpt = fake_pretrained(cfg, 3, 9);
  const NetworkLayout lay = ckpt.layout;

  // warm-up: the whole run stays in the exploration phase
  {
    TransferConfig tcfg;
    tcfg.train = cfg;
    tcfg.n_explore = 600;
    tcfg.n_max = 600;
    TransferRunner runner(tcfg, ckpt, find_task(100));
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(cfg.K);
    for (const auto& col : ckpt.W.columns) centroid += col.w;
    centroid /= 3.0;
    Rng rng_init = fork(cfg.seed, streams::kTransferInit);
    ParameterSet phi0 = init_from_pretrained(ckpt.phi, lay, lay.hash(), rng_init);
    runner.run();
    int policy_mismatch = 0, q_moved = 0;
    for (int k = 0; k < cfg.K; ++k) {
      for (int j = lay.policy.begin; j < lay.policy.end; ++j)
        if (runner.phi().data(j, k) != ckpt.phi.data(j, k)) ++policy_mismatch;
      for (int j = lay.q1.begin; j < lay.q2.end; ++j)
        if (runner.phi().data(j, k) != phi0.data(j, k)) ++q_moved;
    }
    EXPECT(policy_mismatch == 0);
    EXPECT(runner.w_new() == centroid);
    EXPECT(q_moved > 0);  // the critics did train during warm-up
  }

  // freeze_phi: the full parameter set stays bit-unchanged end-to-end
  {
    TransferConfig tcfg;
    tcfg.train = cfg;
    tcfg.n_explore = 200;
    tcfg.n_max = 600;
    tcfg.freeze_phi = true;
    TransferRunner runner(tcfg, ckpt, find_task(101));
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(cfg.K);
    for (const auto& col : ckpt.W.columns) centroid += col.w;
    centroid /= 3.0;
    runner.run();
    EXPECT(runner.phi().data == ckpt.phi.data);
    EXPECT(runner.w_new() != centroid);
    EXPECT(!runner.detached_critic().empty());
  }
  return true;
}

bool run_criterion(int id, const char* name, const std::function<bool()>& fn) {
  const int before = g_failures;
  bool threw = false;
  try {
    fn();
  } catch (const std::exception& e) {
    threw = true;
    std::printf("    exception: %s\n", e.what());
  }
  const bool pass = !threw && g_failures == before;
  std::printf("criterion %2d [%s]: %s\n", id, name, pass ? "PASS" : "FAIL");
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main() {
  enable_flush_denormals();
  nlohmann::json budgets = load_budgets();
  Checkpoint mt4_ckpt;
  bool all = true;
  all &= run_criterion(1, "gradient oracles vs finite differences", criterion_1);
  all &= run_criterion(2, "simplex draw statistics", criterion_2);
  all &= run_criterion(3, "maskout/reset exactness", criterion_3);
  all &= run_criterion(4, "reduction to plain SAC", criterion_4);
  all &= run_criterion(5, "DBSCAN equivalence", criterion_5);
  all &= run_criterion(6, "metric exactness + golden CSV", criterion_6);
  all &= run_criterion(7, "single-task desk-scale sanity",
                       [&] { return criterion_7(budgets); });
  all &= run_criterion(8, "mt4-toy MTRL analogue",
                       [&] { return criterion_8(budgets, mt4_ckpt); });
  all &= run_criterion(9, "transfer analogue",
                       [&] { return criterion_9(budgets, mt4_ckpt); });
  all &= run_criterion(10, "transfer freeze contracts", criterion_10);
  std::printf("%d checks, %d failures\n", g_checks, g_failures);
  return all ? 0 : 1;
}

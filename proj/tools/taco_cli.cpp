// Experiment runner: pretrain / transfer / scratch / compare / analyze / report.
// Exit codes: 0 ok, 1 usage or invalid config, 2 runtime divergence.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "taco/checkpoint.hpp"
#include "taco/fpenv.hpp"
#include "taco/metrics.hpp"
#include "taco/taskdist.hpp"
#include "taco/trainer.hpp"
#include "taco/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taco;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;

struct Diverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path run_root() {
  if (const char* env = std::getenv("TACO_RUN_ROOT")) return env;
  return "runs";
}

fs::path make_run_dir(const std::string& name) {
  fs::path dir = run_root() / name;
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Config file first, then flags override (flags were already parsed into cfg
// defaults by CLI11, so apply the file under the flags CLI11 did not see).
TrainConfig load_train_config(const std::string& config_path, const CLI::App& cmd,
                              TrainConfig flags_cfg) {
  if (config_path.empty()) return flags_cfg;
  std::ifstream in(config_path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + config_path);
  json j = json::parse(in);
  TrainConfig cfg = TrainConfig::from_json(j);
  // flags explicitly given on the command line win over the file
  auto given = [&cmd](const std::string& flag) { return cmd.count(flag) > 0; };
  if (given("--batch-size")) cfg.batch_size = flags_cfg.batch_size;
  if (given("--envs")) cfg.n_parallel_envs = flags_cfg.n_parallel_envs;
  if (given("--hidden")) cfg.hidden = flags_cfg.hidden;
  if (given("--lr-policy")) cfg.lr_policy = flags_cfg.lr_policy;
  if (given("--lr-q")) cfg.lr_q = flags_cfg.lr_q;
  if (given("--lr-w")) cfg.lr_w = flags_cfg.lr_w;
  if (given("--lr-alpha")) cfg.lr_alpha = flags_cfg.lr_alpha;
  if (given("--gamma")) cfg.gamma = flags_cfg.gamma;
  if (given("--warmup")) cfg.warmup_steps = flags_cfg.warmup_steps;
  if (given("--replay-capacity")) cfg.replay_capacity = flags_cfg.replay_capacity;
  if (given("--maskout-eps")) cfg.maskout_eps = flags_cfg.maskout_eps;
  if (given("--param-sets")) cfg.K = flags_cfg.K;
  if (given("--steps")) cfg.total_env_steps = flags_cfg.total_env_steps;
  if (given("--eval-every")) cfg.eval_every = flags_cfg.eval_every;
  if (given("--eval-episodes")) cfg.eval_episodes = flags_cfg.eval_episodes;
  if (given("--tau")) cfg.tau = flags_cfg.tau;
  if (given("--seed")) cfg.seed = flags_cfg.seed;
  return cfg;
}

void add_train_flags(CLI::App* cmd, TrainConfig& cfg) {
  cmd->add_option("--batch-size", cfg.batch_size);
  cmd->add_option("--envs", cfg.n_parallel_envs);
  cmd->add_option("--hidden", cfg.hidden);
  cmd->add_option("--lr-policy", cfg.lr_policy);
  cmd->add_option("--lr-q", cfg.lr_q);
  cmd->add_option("--lr-w", cfg.lr_w);
  cmd->add_option("--lr-alpha", cfg.lr_alpha);
  cmd->add_option("--gamma", cfg.gamma);
  cmd->add_option("--warmup", cfg.warmup_steps);
  cmd->add_option("--replay-capacity", cfg.replay_capacity);
  cmd->add_option("--maskout-eps", cfg.maskout_eps);
  cmd->add_option("--param-sets,-K", cfg.K);
  cmd->add_option("--steps", cfg.total_env_steps);
  cmd->add_option("--eval-every", cfg.eval_every);
  cmd->add_option("--eval-episodes", cfg.eval_episodes);
  cmd->add_option("--tau", cfg.tau);
  cmd->add_option("--seed", cfg.seed);
}

Checkpoint trainer_checkpoint(const MtrlTrainer& t, bool best) {
  Checkpoint c;
  c.layout = t.layout();
  c.phi = best ? t.best_phi() : t.phi();
  c.W = best ? t.best_W() : t.W();
  return c;
}

void save_run(const fs::path& dir, const json& config, const RunLog& log) {
  write_text(dir / "config.json", config.dump(2) + "\n");
  log.save_jsonl((dir / "runlog.jsonl").string());
}

RunLog do_transfer(const TransferConfig& tcfg, const Checkpoint& ckpt, const TaskSpec& task,
                   const fs::path& dir) {
  TransferRunner runner(tcfg, ckpt, task);
  RunLog log = runner.run();
  Checkpoint out;
  out.layout = runner.layout();
  out.phi = runner.phi();
  out.W.columns.push_back({task.task_id, runner.w_new()});
  save_checkpoint((dir / "checkpoint.bin").string(), out);
  log.save_jsonl((dir / "runlog.jsonl").string());
  return log;
}

int cmd_pretrain(const std::string& config_path, const CLI::App& cmd, TrainConfig flags_cfg,
                 const std::string& suite_name, const std::string& mode_name,
                 std::vector<double> preset, const std::string& out_name,
                 const std::string& resume) {
  TrainConfig cfg = load_train_config(config_path, cmd, flags_cfg);
  cfg.preset_weights = std::move(preset);
  PMode mode;
  if (mode_name == "uniform")
    mode = PMode::uniform;
  else if (mode_name == "preset")
    mode = PMode::preset;
  else if (mode_name == "online")
    mode = PMode::online;
  else
    throw CLI::ValidationError("--mode", "must be uniform, preset or online");

  std::vector<TaskSpec> suite = make_suite(suite_name, cfg.seed);
  MtrlTrainer trainer(cfg, suite, mode);
  if (!resume.empty()) {
    Checkpoint ckpt = load_checkpoint(resume);
    trainer.set_parameters(ckpt.phi, ckpt.W);
  }
  fs::path dir = make_run_dir(out_name.empty() ? "pretrain-" + suite_name + "-" + mode_name +
                                                     "-s" + std::to_string(cfg.seed)
                                               : out_name);
  RunLog log;
  try {
    log = trainer.run();
  } catch (const std::runtime_error& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  }
  json config = cfg.to_json();
  config["suite"] = suite_name;
  config["mode"] = mode_name;
  save_run(dir, config, log);
  save_checkpoint((dir / "checkpoint.bin").string(), trainer_checkpoint(trainer, false));
  save_checkpoint((dir / "checkpoint_best.bin").string(), trainer_checkpoint(trainer, true));
  std::cout << dir.string() << "\n";
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& dirs, double threshold, long n_max,
               const std::string& out_path) {
  // group runlogs by task: meta.kind selects the transfer/scratch column
  std::map<std::string, std::vector<std::pair<uint64_t, RunLog>>> transfers, scratches;
  for (const auto& d : dirs) {
    for (const auto& entry : fs::recursive_directory_iterator(d)) {
      if (entry.path().filename() != "runlog.jsonl" && entry.path().extension() != ".jsonl")
        continue;
      RunLog log = RunLog::load_jsonl(entry.path().string());
      if (!log.meta.contains("kind") || !log.meta.contains("task")) continue;
      const std::string kind = log.meta["kind"];
      const std::string task = std::to_string(log.meta["task"].get<int>());
      const auto seed = log.meta.value("seed", log.meta.value("config", json::object())
                                                   .value("seed", uint64_t{0}));
      if (kind == "transfer")
        transfers[task].emplace_back(seed, std::move(log));
      else if (kind == "scratch")
        scratches[task].emplace_back(seed, std::move(log));
    }
  }
  std::vector<TransferReport> reports;
  for (auto& [task, runs] : transfers) {
    std::sort(runs.begin(), runs.end(), [](auto& a, auto& b) { return a.first < b.first; });
    auto& sruns = scratches[task];
    std::sort(sruns.begin(), sruns.end(), [](auto& a, auto& b) { return a.first < b.first; });
    reports.push_back(make_transfer_report(task, runs, sruns, threshold, n_max));
  }
  std::string csv = report_csv(reports);
  if (out_path.empty())
    std::cout << csv;
  else
    write_text(out_path, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  enable_flush_denormals();
  CLI::App app{"Parameter-compositional multi-task RL on the toy point suite"};
  app.require_subcommand(1);

  // ---- pretrain ----
  auto* pre = app.add_subcommand("pretrain", "multi-task pretraining on a suite");
  TrainConfig pre_cfg;
  std::string pre_config, pre_suite = "mt4-toy", pre_mode = "uniform", pre_out, pre_resume;
  std::vector<double> pre_preset;
  pre->add_option("--config", pre_config, "JSON config file (flags override)");
  add_train_flags(pre, pre_cfg);
  pre->add_option("--suite", pre_suite)->check(CLI::IsMember(suite_names()));
  pre->add_option("--mode", pre_mode, "uniform | preset | online");
  pre->add_option("--preset-weights", pre_preset);
  pre->add_option("--out", pre_out, "run directory name");
  pre->add_option("--resume", pre_resume, "warm-start from a checkpoint");

  // ---- transfer / scratch ----
  auto* tr = app.add_subcommand("transfer", "transfer a pretrained set to a new task");
  TrainConfig tr_cfg;
  std::string tr_config, tr_ckpt, tr_out;
  int tr_task = 100;
  TransferConfig tr_tcfg;
  bool tr_freeze = false;
  tr->add_option("--config", tr_config);
  add_train_flags(tr, tr_cfg);
  tr->add_option("--checkpoint", tr_ckpt)->required();
  tr->add_option("--task", tr_task, "held-out task id");
  tr->add_option("--n-explore", tr_tcfg.n_explore);
  tr->add_option("--n-max", tr_tcfg.n_max);
  tr->add_option("--threshold", tr_tcfg.success_threshold);
  tr->add_flag("--freeze-phi", tr_freeze);
  tr->add_option("--out", tr_out);

  auto* sc = app.add_subcommand("scratch", "single-task SAC baseline");
  TrainConfig sc_cfg;
  std::string sc_config, sc_out;
  int sc_task = 100;
  long sc_nmax = 6000000;
  sc->add_option("--config", sc_config);
  add_train_flags(sc, sc_cfg);
  sc->add_option("--task", sc_task);
  auto* sc_nmax_opt = sc->add_option("--n-max", sc_nmax, "step budget (default: --steps)");
  sc->add_option("--out", sc_out);

  // ---- compare ----
  auto* cp = app.add_subcommand("compare", "paired transfer vs scratch over seeds");
  TrainConfig cp_cfg;
  std::string cp_config, cp_ckpt, cp_out;
  int cp_task = 100;
  TransferConfig cp_tcfg;
  bool cp_freeze = false;
  std::vector<uint64_t> cp_seeds = {0, 1, 2, 3, 4};
  cp->add_option("--config", cp_config);
  add_train_flags(cp, cp_cfg);
  cp->add_option("--checkpoint", cp_ckpt)->required();
  cp->add_option("--task", cp_task);
  cp->add_option("--n-explore", cp_tcfg.n_explore);
  cp->add_option("--n-max", cp_tcfg.n_max);
  cp->add_option("--threshold", cp_tcfg.success_threshold);
  cp->add_flag("--freeze-phi", cp_freeze);
  cp->add_option("--seeds", cp_seeds, "seed list for the repeated protocol");
  cp->add_option("--out", cp_out);

  // ---- analyze ----
  auto* an = app.add_subcommand("analyze", "PCA projection + online grouping of a checkpoint");
  std::string an_ckpt, an_out;
  double an_eps = -1.0;
  an->add_option("--checkpoint", an_ckpt)->required();
  an->add_option("--eps", an_eps, "DBSCAN radius (<=0: auto)");
  an->add_option("--out", an_out, "CSV output path (default stdout)");

  // ---- report ----
  auto* rp = app.add_subcommand("report", "aggregate runlogs into the cost/success CSV");
  std::vector<std::string> rp_dirs;
  double rp_threshold = 0.9;
  long rp_nmax = 6000000;
  std::string rp_out;
  rp->add_option("dirs", rp_dirs, "run directories to scan")->required();
  rp->add_option("--threshold", rp_threshold);
  rp->add_option("--n-max", rp_nmax);
  rp->add_option("--out", rp_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*pre)
      return cmd_pretrain(pre_config, *pre, pre_cfg, pre_suite, pre_mode, pre_preset, pre_out,
                          pre_resume);

    if (*tr) {
      tr_tcfg.train = load_train_config(tr_config, *tr, tr_cfg);
      tr_tcfg.freeze_phi = tr_freeze;
      Checkpoint ckpt = load_checkpoint(tr_ckpt);
      TaskSpec task = find_task(tr_task);
      fs::path dir = make_run_dir(tr_out.empty() ? "transfer-t" + std::to_string(tr_task) + "-s" +
                                                       std::to_string(tr_tcfg.train.seed)
                                                 : tr_out);
      json config = tr_tcfg.train.to_json();
      config["task"] = tr_task;
      config["n_explore"] = tr_tcfg.n_explore;
      config["n_max"] = tr_tcfg.n_max;
      config["freeze_phi"] = tr_tcfg.freeze_phi;
      write_text(dir / "config.json", config.dump(2) + "\n");
      try {
        do_transfer(tr_tcfg, ckpt, task, dir);
      } catch (const std::runtime_error& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kExitDiverged;
      }
      std::cout << dir.string() << "\n";
      return kExitOk;
    }

    if (*sc) {
      TrainConfig base = load_train_config(sc_config, *sc, sc_cfg);
      if (sc_nmax_opt->count() == 0) sc_nmax = base.total_env_steps;
      TaskSpec task = find_task(sc_task);
      fs::path dir = make_run_dir(sc_out.empty() ? "scratch-t" + std::to_string(sc_task) + "-s" +
                                                       std::to_string(base.seed)
                                                 : sc_out);
      RunLog log;
      try {
        log = run_scratch(base, task, sc_nmax);
      } catch (const std::runtime_error& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kExitDiverged;
      }
      save_run(dir, scratch_config(base, sc_nmax).to_json(), log);
      std::cout << dir.string() << "\n";
      return kExitOk;
    }

    if (*cp) {
      TrainConfig base = load_train_config(cp_config, *cp, cp_cfg);
      cp_tcfg.freeze_phi = cp_freeze;
      Checkpoint ckpt = load_checkpoint(cp_ckpt);
      TaskSpec task = find_task(cp_task);
      fs::path dir = make_run_dir(cp_out.empty() ? "compare-t" + std::to_string(cp_task) : cp_out);
      std::vector<std::pair<uint64_t, RunLog>> transfer_runs, scratch_runs;
      for (uint64_t seed : cp_seeds) {
        TransferConfig tcfg = cp_tcfg;
        tcfg.train = base;
        tcfg.train.seed = seed;
        fs::path tdir = dir / ("transfer-s" + std::to_string(seed));
        fs::create_directories(tdir);
        try {
          transfer_runs.emplace_back(seed, do_transfer(tcfg, ckpt, task, tdir));
        } catch (const std::runtime_error& e) {
          std::cerr << "diverged (transfer seed " << seed << "): " << e.what() << "\n";
          return kExitDiverged;
        }
        TrainConfig scfg = base;
        scfg.seed = seed;
        fs::path sdir = dir / ("scratch-s" + std::to_string(seed));
        fs::create_directories(sdir);
        try {
          RunLog slog = run_scratch(scfg, task, cp_tcfg.n_max);
          slog.save_jsonl((sdir / "runlog.jsonl").string());
          scratch_runs.emplace_back(seed, std::move(slog));
        } catch (const std::runtime_error& e) {
          std::cerr << "diverged (scratch seed " << seed << "): " << e.what() << "\n";
          return kExitDiverged;
        }
      }
      TransferReport report =
          make_transfer_report(std::to_string(cp_task), transfer_runs, scratch_runs,
                               cp_tcfg.success_threshold, cp_tcfg.n_max);
      std::string csv = report_csv({report});
      write_text(dir / "report.csv", csv);
      std::cout << csv;
      return kExitOk;
    }

    if (*an) {
      Checkpoint ckpt = load_checkpoint(an_ckpt);
      auto [grouping, dist] = online_adjust(ckpt.phi, ckpt.W, ckpt.layout, an_eps);
      Eigen::MatrixXd proj = pca_project(ckpt.W, std::min(2, ckpt.phi.K()));
      std::ostringstream csv;
      csv << "task_id,group,p,pc1,pc2\n";
      std::vector<int> group_of(ckpt.W.T(), -1);
      for (size_t g = 0; g < grouping.groups.size(); ++g)
        for (int idx : grouping.groups[g]) group_of[idx] = static_cast<int>(g);
      for (int t = 0; t < ckpt.W.T(); ++t) {
        csv << ckpt.W.columns[t].task_id << "," << group_of[t] << "," << dist.probs[t] << ","
            << proj(t, 0) << "," << (proj.cols() > 1 ? proj(t, 1) : 0.0) << "\n";
      }
      if (an_out.empty())
        std::cout << csv.str();
      else
        write_text(an_out, csv.str());
      return kExitOk;
    }

    if (*rp) return cmd_report(rp_dirs, rp_threshold, rp_nmax, rp_out);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

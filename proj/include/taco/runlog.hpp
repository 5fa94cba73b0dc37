#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace taco {

struct EvalRecord {
  long env_step = 0;
  std::vector<double> task_success;  // per task, in suite order
  double avg_success = 0.0;
  double loss_q = 0.0;   // mean critic loss since the previous eval
  double loss_pi = 0.0;  // mean actor loss since the previous eval
  double alpha_mean = 0.0;
  double wall_time_s = 0.0;  // informational; excluded from determinism checks
};

// Append-only training record. One JSON object per line; the first line is
// the metadata (config snapshot, seed, artifact hash).
struct RunLog {
  nlohmann::json meta;
  std::vector<EvalRecord> records;

  void save_jsonl(const std::string& path) const;
  static RunLog load_jsonl(const std::string& path);

  // env_step strictly increasing, success rates within [0, 1]
  void validate() const;

  // True when every deterministic field matches (wall time ignored).
  bool same_records(const RunLog& other) const;
};

}  // namespace taco

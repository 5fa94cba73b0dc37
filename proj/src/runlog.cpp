#include "taco/runlog.hpp"

#include <fstream>
#include <stdexcept>

namespace taco {

void RunLog::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RunLog: cannot write " + path);
  nlohmann::json head = {{"meta", meta}};
  out << head.dump() << "\n";
  for (const auto& r : records) {
    nlohmann::json j = {{"env_step", r.env_step},     {"task_success", r.task_success},
                        {"avg_success", r.avg_success}, {"loss_q", r.loss_q},
                        {"loss_pi", r.loss_pi},         {"alpha_mean", r.alpha_mean},
                        {"wall_time_s", r.wall_time_s}};
    out << j.dump() << "\n";
  }
}

RunLog RunLog::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("RunLog: cannot read " + path);
  RunLog log;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (first && j.contains("meta")) {
      log.meta = j["meta"];
      first = false;
      continue;
    }
    first = false;
    EvalRecord r;
    r.env_step = j.at("env_step").get<long>();
    r.task_success = j.at("task_success").get<std::vector<double>>();
    r.avg_success = j.at("avg_success").get<double>();
    r.loss_q = j.value("loss_q", 0.0);
    r.loss_pi = j.value("loss_pi", 0.0);
    r.alpha_mean = j.value("alpha_mean", 0.0);
    r.wall_time_s = j.value("wall_time_s", 0.0);
    log.records.push_back(std::move(r));
  }
  return log;
}

void RunLog::validate() const {
  long prev = -1;
  for (const auto& r : records) {
    if (r.env_step <= prev) throw std::runtime_error("RunLog: env_step not strictly increasing");
    prev = r.env_step;
    for (double s : r.task_success)
      if (s < 0.0 || s > 1.0) throw std::runtime_error("RunLog: success rate out of [0,1]");
  }
}

bool RunLog::same_records(const RunLog& other) const {
  if (records.size() != other.records.size()) return false;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& a = records[i];
    const auto& b = other.records[i];
    if (a.env_step != b.env_step || a.task_success != b.task_success ||
        a.avg_success != b.avg_success || a.loss_q != b.loss_q || a.loss_pi != b.loss_pi ||
        a.alpha_mean != b.alpha_mean)
      return false;
  }
  return true;
}

}  // namespace taco

#include "taco/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace taco {

std::optional<long> required_steps(const RunLog& log, double threshold, long n_max) {
  for (const auto& r : log.records) {
    if (r.env_step > n_max) break;
    if (r.avg_success >= threshold) return r.env_step;
  }
  return std::nullopt;
}

double transfer_success(const std::vector<RunLog>& seed_logs, double threshold, long n_max) {
  if (seed_logs.empty()) throw std::invalid_argument("transfer_success: no runs");
  int reached = 0;
  for (const auto& log : seed_logs)
    if (required_steps(log, threshold, n_max)) ++reached;
  return static_cast<double>(reached) / static_cast<double>(seed_logs.size());
}

std::optional<double> relative_cost(double n_transfer, double alpha_transfer, double n_scratch,
                                    double alpha_scratch) {
  if (alpha_transfer <= 0.0 || alpha_scratch <= 0.0) return std::nullopt;
  return (n_transfer / alpha_transfer) / (n_scratch / alpha_scratch);
}

TransferReport make_transfer_report(const std::string& task,
                                    const std::vector<std::pair<uint64_t, RunLog>>& transfer_runs,
                                    const std::vector<std::pair<uint64_t, RunLog>>& scratch_runs,
                                    double threshold, long n_max) {
  if (transfer_runs.size() != scratch_runs.size() || transfer_runs.empty())
    throw std::invalid_argument("make_transfer_report: need matched nonempty run sets");
  TransferReport rep;
  rep.task = task;
  double sum_t = 0.0, sum_s = 0.0;
  int hit_t = 0, hit_s = 0;
  for (size_t i = 0; i < transfer_runs.size(); ++i) {
    TransferReport::SeedRow row;
    row.seed = transfer_runs[i].first;
    row.n_transfer = required_steps(transfer_runs[i].second, threshold, n_max);
    row.n_scratch = required_steps(scratch_runs[i].second, threshold, n_max);
    if (row.n_transfer) {
      sum_t += static_cast<double>(*row.n_transfer);
      ++hit_t;
    }
    if (row.n_scratch) {
      sum_s += static_cast<double>(*row.n_scratch);
      ++hit_s;
    }
    rep.seeds.push_back(row);
  }
  const double count = static_cast<double>(transfer_runs.size());
  rep.alpha_transfer = hit_t / count;
  rep.alpha_scratch = hit_s / count;
  // mean over successful seeds only; n_max stands in when no seed succeeded
  rep.n_transfer = hit_t ? sum_t / hit_t : static_cast<double>(n_max);
  rep.n_scratch = hit_s ? sum_s / hit_s : static_cast<double>(n_max);
  rep.cost = relative_cost(rep.n_transfer, rep.alpha_transfer, rep.n_scratch, rep.alpha_scratch);
  return rep;
}

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}
}  // namespace

std::string report_csv(const std::vector<TransferReport>& reports) {
  std::string out = "task,n_transfer,alpha_transfer,n_scratch,alpha_scratch,relative_cost\n";
  for (const auto& r : reports) {
    out += r.task + "," + fmt(r.n_transfer) + "," + fmt(r.alpha_transfer) + "," +
           fmt(r.n_scratch) + "," + fmt(r.alpha_scratch) + ",";
    out += r.cost ? fmt(*r.cost) : std::string("undefined");
    out += "\n";
  }
  return out;
}

}  // namespace taco

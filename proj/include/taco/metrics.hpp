#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taco/runlog.hpp"

namespace taco {

// First eval step whose average success reached the threshold, or nullopt
// ("not reached") when none exists before n_max. No interpolation.
std::optional<long> required_steps(const RunLog& log, double threshold, long n_max);

// Fraction of seeds whose run reached the threshold before n_max.
double transfer_success(const std::vector<RunLog>& seed_logs, double threshold, long n_max);

// (n_t / a_t) / (n_s / a_s); undefined (nullopt) when either success rate
// is zero.
std::optional<double> relative_cost(double n_transfer, double alpha_transfer, double n_scratch,
                                    double alpha_scratch);

struct TransferReport {
  std::string task;
  double n_transfer = 0.0;  // mean required steps over successful seeds
  double alpha_transfer = 0.0;
  double n_scratch = 0.0;
  double alpha_scratch = 0.0;
  std::optional<double> cost;

  struct SeedRow {
    uint64_t seed = 0;
    std::optional<long> n_transfer;
    std::optional<long> n_scratch;
  };
  std::vector<SeedRow> seeds;
};

TransferReport make_transfer_report(const std::string& task,
                                    const std::vector<std::pair<uint64_t, RunLog>>& transfer_runs,
                                    const std::vector<std::pair<uint64_t, RunLog>>& scratch_runs,
                                    double threshold, long n_max);

// Stable CSV: one row per report, cost/success pairs as in the result
// tables; undefined costs printed as "undefined".
std::string report_csv(const std::vector<TransferReport>& reports);

}  // namespace taco

#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "taco/network.hpp"
#include "taco/paramspace.hpp"
#include "taco/rng.hpp"

namespace taco {

// Partition of task indices (0..T-1) into disjoint groups.
struct TaskGrouping {
  std::vector<std::vector<int>> groups;

  int task_count() const;
  void validate(int T) const;  // disjoint, union covers 0..T-1
};

struct TaskDistribution {
  std::vector<double> probs;  // p_tau >= 0, sums to 1
};

// p_tau = 1 / (|G| |g_i|): equal mass per group, uniform inside.
TaskDistribution group_balanced_probs(const TaskGrouping& g);

// Normalized positive weights.
TaskDistribution preset_weighted_probs(const std::vector<double>& weights);

int sample_task(const TaskDistribution& p, Rng& rng);

// Classic density-based clustering, Euclidean metric. Returns one label per
// point: cluster ids 0,1,... or -1 for noise.
std::vector<int> dbscan(const std::vector<std::vector<double>>& points, double eps, int min_pts);

// Clusters the policy slice of each task's composed parameters
// (L2-normalized per vector) and derives a group-balanced distribution.
// eps <= 0 selects the default: half the median pairwise distance.
// Noise points become singleton groups.
std::pair<TaskGrouping, TaskDistribution> online_adjust(const ParameterSet& phi,
                                                        const CompositionalMatrix& W,
                                                        const NetworkLayout& layout,
                                                        double eps = -1.0, int min_pts = 1);

// Mean-centered projection of the w vectors onto the top principal
// directions (one row per task). Components ordered by descending variance;
// each direction's largest-magnitude coordinate is made positive.
Eigen::MatrixXd pca_project(const CompositionalMatrix& W, int dims = 2);

}  // namespace taco

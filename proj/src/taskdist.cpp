#include "taco/taskdist.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace taco {

int TaskGrouping::task_count() const {
  int c = 0;
  for (const auto& g : groups) c += static_cast<int>(g.size());
  return c;
}

void TaskGrouping::validate(int T) const {
  std::vector<int> seen(T, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("TaskGrouping: empty group");
    for (int t : g) {
      if (t < 0 || t >= T || seen[t]++) throw std::invalid_argument("TaskGrouping: bad partition");
    }
  }
  for (int t = 0; t < T; ++t)
    if (!seen[t]) throw std::invalid_argument("TaskGrouping: task missing from partition");
}

TaskDistribution group_balanced_probs(const TaskGrouping& g) {
  const int T = g.task_count();
  g.validate(T);
  TaskDistribution p;
  p.probs.assign(T, 0.0);
  const double per_group = 1.0 / static_cast<double>(g.groups.size());
  for (const auto& grp : g.groups) {
    const double v = per_group / static_cast<double>(grp.size());
    for (int t : grp) p.probs[t] = v;
  }
  return p;
}

TaskDistribution preset_weighted_probs(const std::vector<double>& weights) {
  if (weights.empty()) throw std::invalid_argument("preset_weighted_probs: empty");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("preset_weighted_probs: weights must be > 0");
    sum += w;
  }
  TaskDistribution p;
  p.probs.reserve(weights.size());
  for (double w : weights) p.probs.push_back(w / sum);
  return p;
}

int sample_task(const TaskDistribution& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < p.probs.size(); ++i) {
    acc += p.probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.probs.size()) - 1;
}

std::vector<int> dbscan(const std::vector<std::vector<double>>& points, double eps, int min_pts) {
  if (!(eps > 0.0) || min_pts < 1) throw std::invalid_argument("dbscan: bad eps/min_pts");
  const int N = static_cast<int>(points.size());
  auto dist = [&](int a, int b) {
    double s = 0.0;
    for (size_t d = 0; d < points[a].size(); ++d) {
      const double v = points[a][d] - points[b][d];
      s += v * v;
    }
    return std::sqrt(s);
  };
  auto neighbors = [&](int i) {
    std::vector<int> nb;
    for (int j = 0; j < N; ++j)
      if (dist(i, j) <= eps) nb.push_back(j);  // includes i itself
    return nb;
  };

  constexpr int kUnvisited = -2, kNoise = -1;
  std::vector<int> label(N, kUnvisited);
  int cluster = 0;
  for (int i = 0; i < N; ++i) {
    if (label[i] != kUnvisited) continue;
    std::vector<int> nb = neighbors(i);
    if (static_cast<int>(nb.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    std::deque<int> seeds(nb.begin(), nb.end());
    while (!seeds.empty()) {
      const int j = seeds.front();
      seeds.pop_front();
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      std::vector<int> nb2 = neighbors(j);
      if (static_cast<int>(nb2.size()) >= min_pts)
        seeds.insert(seeds.end(), nb2.begin(), nb2.end());
    }
    ++cluster;
  }
  return label;
}

std::pair<TaskGrouping, TaskDistribution> online_adjust(const ParameterSet& phi,
                                                        const CompositionalMatrix& W,
                                                        const NetworkLayout& layout,
                                                        double eps, int min_pts) {
  const int T = W.T();
  Eigen::MatrixXd theta = compose_all(phi, W);
  std::vector<std::vector<double>> pts(T);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd slice = theta.col(t).segment(layout.policy.begin, layout.policy.size());
    const double norm = slice.norm();
    if (norm > 0.0) slice /= norm;
    pts[t].assign(slice.data(), slice.data() + slice.size());
  }
  if (eps <= 0.0) {
    std::vector<double> dists;
    for (int a = 0; a < T; ++a)
      for (int b = a + 1; b < T; ++b) {
        double s = 0.0;
        for (size_t d = 0; d < pts[a].size(); ++d) {
          const double v = pts[a][d] - pts[b][d];
          s += v * v;
        }
        dists.push_back(std::sqrt(s));
      }
    if (dists.empty()) {
      eps = 1.0;  // single task
    } else {
      std::sort(dists.begin(), dists.end());
      const double median = dists[dists.size() / 2];
      eps = 0.5 * median;
      if (!(eps > 0.0)) eps = 1e-12;  // identical points collapse to one cluster
    }
  }
  std::vector<int> labels = dbscan(pts, eps, min_pts);

  TaskGrouping g;
  std::vector<int> cluster_to_group;
  for (int t = 0; t < T; ++t) {
    if (labels[t] < 0) {
      g.groups.push_back({t});  // noise -> singleton group
      continue;
    }
    while (static_cast<int>(cluster_to_group.size()) <= labels[t]) cluster_to_group.push_back(-1);
    if (cluster_to_group[labels[t]] < 0) {
      cluster_to_group[labels[t]] = static_cast<int>(g.groups.size());
      g.groups.push_back({});
    }
    g.groups[cluster_to_group[labels[t]]].push_back(t);
  }
  return {g, group_balanced_probs(g)};
}

Eigen::MatrixXd pca_project(const CompositionalMatrix& W, int dims) {
  const int T = W.T();
  if (T < 2) throw std::invalid_argument("pca_project: need at least 2 tasks");
  Eigen::MatrixXd X = W.as_matrix().transpose();  // T x K
  const int K = static_cast<int>(X.cols());
  dims = std::min(dims, K);
  Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(T - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  // eigenvalues ascending; take the top `dims` in descending order
  Eigen::MatrixXd dirs(K, dims);
  for (int d = 0; d < dims; ++d) {
    Eigen::VectorXd v = es.eigenvectors().col(K - 1 - d);
    int imax = 0;
    for (int i = 1; i < K; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0) v = -v;
    dirs.col(d) = v;
  }
  return X * dirs;  // T x dims
}

}  // namespace taco

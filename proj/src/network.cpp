#include "taco/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace taco {
namespace {

// Dense MLP over a flat parameter block: per layer, a row-major weight
// matrix (out x in) followed by the bias vector. Hidden layers use tanh,
// the output layer is linear.
struct MlpSpec {
  std::vector<int> sizes;  // [in, h..., out]

  int param_count() const {
    int c = 0;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) c += sizes[l + 1] * (sizes[l] + 1);
    return c;
  }
};

void mlp_forward(const MlpSpec& spec, const double* theta, const double* input, MlpCache* cache,
                 double* output) {
  const int layers = static_cast<int>(spec.sizes.size()) - 1;
  std::vector<double> cur(input, input + spec.sizes[0]);
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(cur);
  }
  int off = 0;
  for (int l = 0; l < layers; ++l) {
    const int in = spec.sizes[l], out = spec.sizes[l + 1];
    std::vector<double> next(out);
    for (int o = 0; o < out; ++o) {
      const double* w = theta + off + o * in;
      double acc = theta[off + out * in + o];  // bias
      for (int i = 0; i < in; ++i) acc += w[i] * cur[i];
      next[o] = (l + 1 < layers) ? std::tanh(acc) : acc;
    }
    off += out * (in + 1);
    cur = std::move(next);
    if (cache && l + 1 < layers) cache->acts.push_back(cur);
  }
  if (cache) cache->out = cur;
  std::copy(cur.begin(), cur.end(), output);
}

// d_out: gradient at the linear output. Accumulates parameter gradients
// into grad (same flat block as theta) and, if d_input is non-null,
// accumulates the gradient w.r.t. the network input.
void mlp_backward(const MlpSpec& spec, const double* theta, const MlpCache& cache,
                  const double* d_out, double* grad, double* d_input) {
  const int layers = static_cast<int>(spec.sizes.size()) - 1;
  // per-layer parameter offsets
  std::vector<int> offs(layers);
  {
    int off = 0;
    for (int l = 0; l < layers; ++l) {
      offs[l] = off;
      off += spec.sizes[l + 1] * (spec.sizes[l] + 1);
    }
  }
  std::vector<double> delta(d_out, d_out + spec.sizes.back());
  for (int l = layers - 1; l >= 0; --l) {
    const int in = spec.sizes[l], out = spec.sizes[l + 1];
    const std::vector<double>& act_in = cache.acts[l];
    // hidden layers were squashed; fold tanh' into delta first
    if (l + 1 < layers) {
      const std::vector<double>& act_out = cache.acts[l + 1];
      for (int o = 0; o < out; ++o) delta[o] *= 1.0 - act_out[o] * act_out[o];
    }
    if (grad) {
      for (int o = 0; o < out; ++o) {
        double* gw = grad + offs[l] + o * in;
        const double d = delta[o];
        for (int i = 0; i < in; ++i) gw[i] += d * act_in[i];
        grad[offs[l] + out * in + o] += d;  // bias
      }
    }
    if (l > 0 || d_input) {
      std::vector<double> prev(in, 0.0);
      for (int o = 0; o < out; ++o) {
        const double* w = theta + offs[l] + o * in;
        const double d = delta[o];
        for (int i = 0; i < in; ++i) prev[i] += d * w[i];
      }
      if (l == 0) {
        for (int i = 0; i < in; ++i) d_input[i] += prev[i];
        break;
      }
      delta = std::move(prev);
    }
  }
}

MlpSpec policy_spec(const NetworkLayout& lay) {
  MlpSpec s;
  s.sizes.push_back(lay.state_dim);
  for (int h : lay.hidden) s.sizes.push_back(h);
  s.sizes.push_back(2 * lay.action_dim);  // mean, raw log_std
  return s;
}

MlpSpec q_spec(const NetworkLayout& lay) {
  MlpSpec s;
  s.sizes.push_back(lay.state_dim + lay.action_dim);
  for (int h : lay.hidden) s.sizes.push_back(h);
  s.sizes.push_back(1);
  return s;
}

void append_bounds(const MlpSpec& spec, std::vector<double>& out) {
  for (size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    const double b = 1.0 / std::sqrt(static_cast<double>(spec.sizes[l]));
    const int count = spec.sizes[l + 1] * (spec.sizes[l] + 1);
    for (int i = 0; i < count; ++i) out.push_back(b);
  }
}

}  // namespace

NetworkLayout NetworkLayout::make(int state_dim, int action_dim, std::vector<int> hidden) {
  if (state_dim < 1 || action_dim < 1 || hidden.empty())
    throw std::invalid_argument("NetworkLayout: bad dimensions");
  NetworkLayout lay;
  lay.state_dim = state_dim;
  lay.action_dim = action_dim;
  lay.hidden = std::move(hidden);
  const int p = policy_spec(lay).param_count();
  const int q = q_spec(lay).param_count();
  lay.policy = {0, p};
  lay.q1 = {p, p + q};
  lay.q2 = {p + q, p + 2 * q};
  lay.n = p + 2 * q;
  return lay;
}

uint64_t NetworkLayout::hash() const {
  // FNV-1a over the canonical layout description
  std::string desc = "sac-v1:" + std::to_string(state_dim) + ":" + std::to_string(action_dim);
  for (int h : hidden) desc += ":" + std::to_string(h);
  desc += "|" + std::to_string(policy.end) + "," + std::to_string(q1.end) + "," +
          std::to_string(q2.end);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : desc) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> NetworkLayout::init_bounds() const {
  std::vector<double> b;
  b.reserve(n);
  append_bounds(policy_spec(*this), b);
  append_bounds(q_spec(*this), b);
  append_bounds(q_spec(*this), b);
  return b;
}

PolicyOutput policy_forward(const NetworkLayout& lay, const double* theta, const double* state) {
  PolicyCache cache;
  return policy_forward_cached(lay, theta, state, cache);
}

PolicyOutput policy_forward_cached(const NetworkLayout& lay, const double* theta,
                                   const double* state, PolicyCache& cache) {
  const MlpSpec spec = policy_spec(lay);
  std::vector<double> out(2 * lay.action_dim);
  mlp_forward(spec, theta + lay.policy.begin, state, &cache.mlp, out.data());
  PolicyOutput po;
  po.mean.assign(out.begin(), out.begin() + lay.action_dim);
  cache.raw_log_std.assign(out.begin() + lay.action_dim, out.end());
  po.log_std.resize(lay.action_dim);
  for (int d = 0; d < lay.action_dim; ++d)
    po.log_std[d] = std::clamp(cache.raw_log_std[d], kLogStdMin, kLogStdMax);
  return po;
}

std::pair<double, double> q_forward(const NetworkLayout& lay, const double* theta,
                                    const double* state, const double* action) {
  QCache cache;
  return q_forward_cached(lay, theta, state, action, cache);
}

std::pair<double, double> q_forward_cached(const NetworkLayout& lay, const double* theta,
                                           const double* state, const double* action,
                                           QCache& cache) {
  const MlpSpec spec = q_spec(lay);
  cache.input.assign(state, state + lay.state_dim);
  cache.input.insert(cache.input.end(), action, action + lay.action_dim);
  double q1 = 0.0, q2 = 0.0;
  mlp_forward(spec, theta + lay.q1.begin, cache.input.data(), &cache.mlp1, &q1);
  mlp_forward(spec, theta + lay.q2.begin, cache.input.data(), &cache.mlp2, &q2);
  return {q1, q2};
}

ActionSample sample_action(const PolicyOutput& out, Rng& rng) {
  std::vector<double> z(out.mean.size());
  for (double& v : z) v = rng.normal();
  return action_from_z(out, z);
}

ActionSample action_from_z(const PolicyOutput& out, const std::vector<double>& z) {
  const int d = static_cast<int>(out.mean.size());
  ActionSample s;
  s.z = z;
  s.action.resize(d);
  s.log_prob = 0.0;
  for (int i = 0; i < d; ++i) {
    const double std = std::exp(out.log_std[i]);
    const double u = out.mean[i] + std * z[i];
    const double a = std::tanh(u);
    s.action[i] = a;
    s.log_prob += -0.5 * z[i] * z[i] - 0.5 * std::log(2.0 * M_PI) - out.log_std[i] -
                  std::log(1.0 - a * a + kTanhEps);
  }
  return s;
}

std::vector<double> deterministic_action(const PolicyOutput& out) {
  std::vector<double> a(out.mean.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] = std::tanh(out.mean[i]);
  return a;
}

void policy_backward(const NetworkLayout& lay, const double* theta, const PolicyCache& cache,
                     const double* d_mean, const double* d_log_std, double* grad_theta) {
  const int d = lay.action_dim;
  std::vector<double> d_out(2 * d, 0.0);
  for (int i = 0; i < d; ++i) {
    d_out[i] = d_mean ? d_mean[i] : 0.0;
    // hard clamp: no gradient outside the bounds
    const double raw = cache.raw_log_std[i];
    if (d_log_std && raw > kLogStdMin && raw < kLogStdMax) d_out[d + i] = d_log_std[i];
  }
  mlp_backward(policy_spec(lay), theta + lay.policy.begin, cache.mlp, d_out.data(),
               grad_theta + lay.policy.begin, nullptr);
}

void q_backward(const NetworkLayout& lay, const double* theta, const QCache& cache, double dq1,
                double dq2, double* grad_theta, double* d_action) {
  const MlpSpec spec = q_spec(lay);
  std::vector<double> d_input(lay.state_dim + lay.action_dim, 0.0);
  if (dq1 != 0.0)
    mlp_backward(spec, theta + lay.q1.begin, cache.mlp1, &dq1,
                 grad_theta ? grad_theta + lay.q1.begin : nullptr,
                 d_action ? d_input.data() : nullptr);
  if (dq2 != 0.0)
    mlp_backward(spec, theta + lay.q2.begin, cache.mlp2, &dq2,
                 grad_theta ? grad_theta + lay.q2.begin : nullptr,
                 d_action ? d_input.data() : nullptr);
  if (d_action)
    for (int i = 0; i < lay.action_dim; ++i) d_action[i] += d_input[lay.state_dim + i];
}

void tanh_gauss_backward(const PolicyOutput& out, const ActionSample& s, const double* d_action,
                         double d_log_prob, double* d_mean, double* d_log_std) {
  const int d = static_cast<int>(out.mean.size());
  for (int i = 0; i < d; ++i) {
    const double a = s.action[i];
    const double std = std::exp(out.log_std[i]);
    const double dadu = 1.0 - a * a;
    // log_prob terms: -log_std directly, and 2a(1-a^2)/(1-a^2+eps) through u
    const double dlogp_du = 2.0 * a * dadu / (dadu + kTanhEps);
    double du = d_log_prob * dlogp_du;
    if (d_action) du += d_action[i] * dadu;
    d_mean[i] += du;
    d_log_std[i] += du * std * s.z[i] - d_log_prob;
  }
}

std::pair<double, double> q_target_forward(const NetworkLayout& lay, const double* target_block,
                                           const double* state, const double* action) {
  const MlpSpec spec = q_spec(lay);
  std::vector<double> input(state, state + lay.state_dim);
  input.insert(input.end(), action, action + lay.action_dim);
  double q1 = 0.0, q2 = 0.0;
  mlp_forward(spec, target_block, input.data(), nullptr, &q1);
  mlp_forward(spec, target_block + lay.q_size(), input.data(), nullptr, &q2);
  return {q1, q2};
}

void soft_update(double* target, const double* online, int count, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must be in (0,1]");
  for (int i = 0; i < count; ++i) target[i] = (1.0 - tau) * target[i] + tau * online[i];
}

std::vector<double> init_theta(const NetworkLayout& lay, Rng& rng) {
  const std::vector<double> bounds = lay.init_bounds();
  std::vector<double> theta(lay.n);
  for (int i = 0; i < lay.n; ++i) theta[i] = rng.uniform(-bounds[i], bounds[i]);
  return theta;
}

}  // namespace taco

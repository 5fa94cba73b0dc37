#include "taco/taskworld.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace taco {
namespace {

double dist2d(const double* a, const double* b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

bool has_object(Skill s) { return s == Skill::push || s == Skill::pull; }

// Fixed object start per skill (small noise added at reset).
void object_start(Skill s, double* p) {
  if (s == Skill::push) {
    p[0] = 0.3;
    p[1] = 0.1;
  } else if (s == Skill::pull) {
    p[0] = 0.3;
    p[1] = 0.3;
  } else {
    p[0] = p[1] = 0.0;
  }
}

// reach-avoid obstacle disk
constexpr double kObstacleCenter[2] = {0.35, 0.35};
constexpr double kObstacleRadius = 0.12;
// gap-pass wall at x = kWallX, open for y in [kGapLo, kGapHi]
constexpr double kWallX = 0.5;
constexpr double kGapLo = 0.15;
constexpr double kGapHi = 0.45;

TaskSpec mk(int id, Skill s, Box2 goal, Difficulty d) {
  TaskSpec t;
  t.task_id = id;
  t.skill = s;
  t.goal_region = goal;
  t.difficulty = d;
  return t;
}

const std::vector<TaskSpec>& registry_mt4() {
  static const std::vector<TaskSpec> v = {
      mk(0, Skill::reach, {{0.3, 0.3}, {0.7, 0.7}}, Difficulty::easy),
      mk(1, Skill::reach_far, {{1.2, 1.2}, {1.8, 1.8}}, Difficulty::medium),
      mk(2, Skill::push, {{0.7, -0.1}, {1.1, 0.3}}, Difficulty::medium),
      mk(3, Skill::pull, {{-0.3, -0.3}, {0.1, 0.1}}, Difficulty::medium),
  };
  return v;
}

const std::vector<TaskSpec>& registry_mt8() {
  static const std::vector<TaskSpec> v = [] {
    std::vector<TaskSpec> r = registry_mt4();
    r.push_back(mk(4, Skill::reach_avoid, {{0.5, 0.5}, {0.9, 0.9}}, Difficulty::hard));
    r.push_back(mk(5, Skill::gap_pass, {{0.8, 0.1}, {1.2, 0.5}}, Difficulty::hard));
    r.push_back(mk(6, Skill::reach, {{-0.7, 0.3}, {-0.3, 0.7}}, Difficulty::easy));
    r.push_back(mk(7, Skill::push, {{0.7, 0.5}, {1.1, 0.9}}, Difficulty::medium));
    return r;
  }();
  return v;
}

const std::vector<TaskSpec>& registry_heldout() {
  static const std::vector<TaskSpec> v = {
      // related to mt4 reach: same skill family, shifted goal region
      mk(100, Skill::reach, {{0.4, -0.1}, {0.8, 0.3}}, Difficulty::easy),
      // near-duplicate extension of mt4 reach (fixed-Phi target)
      mk(101, Skill::reach, {{0.35, 0.35}, {0.75, 0.75}}, Difficulty::easy),
      // related push variant
      mk(102, Skill::push, {{0.6, 0.1}, {1.0, 0.5}}, Difficulty::medium),
  };
  return v;
}

}  // namespace

std::string skill_name(Skill s) {
  switch (s) {
    case Skill::reach: return "reach";
    case Skill::push: return "push";
    case Skill::reach_avoid: return "reach-avoid";
    case Skill::gap_pass: return "gap-pass";
    case Skill::pull: return "pull";
    case Skill::reach_far: return "reach-far";
  }
  return "?";
}

std::string difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
  }
  return "?";
}

void EnvState::observe(double* out) const {
  out[0] = agent_pos[0];
  out[1] = agent_pos[1];
  out[2] = agent_vel[0];
  out[3] = agent_vel[1];
  out[4] = object_pos[0];
  out[5] = object_pos[1];
  out[6] = goal[0];
  out[7] = goal[1];
}

std::vector<std::string> suite_names() { return {"mt4-toy", "mt8-toy", "heldout-toy"}; }

std::vector<TaskSpec> make_suite(const std::string& name, uint64_t /*seed*/) {
  if (name == "mt4-toy") return registry_mt4();
  if (name == "mt8-toy") return registry_mt8();
  if (name == "heldout-toy") return registry_heldout();
  throw std::invalid_argument("make_suite: unknown suite '" + name + "'");
}

TaskSpec find_task(int task_id) {
  for (const auto& name : suite_names())
    for (const auto& t : make_suite(name, 0))
      if (t.task_id == task_id) return t;
  throw std::invalid_argument("find_task: unknown task id " + std::to_string(task_id));
}

EnvState env_reset(const TaskSpec& spec, Rng& rng) {
  EnvState s;
  s.agent_pos[0] = rng.uniform(-0.1, 0.1);
  s.agent_pos[1] = rng.uniform(-0.1, 0.1);
  s.goal[0] = rng.uniform(spec.goal_region.lo[0], spec.goal_region.hi[0]);
  s.goal[1] = rng.uniform(spec.goal_region.lo[1], spec.goal_region.hi[1]);
  if (has_object(spec.skill)) {
    object_start(spec.skill, s.object_pos);
    s.object_pos[0] += rng.uniform(-0.05, 0.05);
    s.object_pos[1] += rng.uniform(-0.05, 0.05);
  }
  return s;
}

StepResult env_step(const EnvState& state, const double* action, const TaskSpec& spec) {
  StepResult r;
  r.next = state;
  EnvState& s = r.next;

  double a[2];
  for (int i = 0; i < 2; ++i) {
    a[i] = action[i];
    if (a[i] < -1.0 || a[i] > 1.0) {
      a[i] = std::clamp(a[i], -1.0, 1.0);
      r.action_clipped = true;
    }
  }

  const bool carried =
      has_object(spec.skill) && dist2d(state.agent_pos, state.object_pos) < kContactRadius;

  s.agent_vel[0] = a[0] * kVelClamp;
  s.agent_vel[1] = a[1] * kVelClamp;
  double new_pos[2];
  for (int i = 0; i < 2; ++i)
    new_pos[i] = std::clamp(state.agent_pos[i] + s.agent_vel[i] * kDt, -kArenaHalf, kArenaHalf);

  // gap-pass wall: crossing x = kWallX outside the gap is blocked
  if (spec.skill == Skill::gap_pass) {
    const bool crosses = (state.agent_pos[0] - kWallX) * (new_pos[0] - kWallX) < 0.0;
    const double y_mid = 0.5 * (state.agent_pos[1] + new_pos[1]);
    if (crosses && (y_mid < kGapLo || y_mid > kGapHi)) new_pos[0] = state.agent_pos[0];
  }
  s.agent_pos[0] = new_pos[0];
  s.agent_pos[1] = new_pos[1];
  if (carried) {
    // a carried object tracks the agent exactly (no contact dynamics)
    s.object_pos[0] = s.agent_pos[0];
    s.object_pos[1] = s.agent_pos[1];
  }
  s.t = state.t + 1;

  // success predicate per skill
  bool hit = false;
  switch (spec.skill) {
    case Skill::reach:
    case Skill::reach_far:
    case Skill::reach_avoid:
    case Skill::gap_pass:
      hit = dist2d(s.agent_pos, s.goal) < kGoalRadius;
      break;
    case Skill::push:
    case Skill::pull:
      hit = dist2d(s.object_pos, s.goal) < kGoalRadius;
      break;
  }
  const bool newly = hit && !state.success;
  s.success = state.success || hit;
  r.success = s.success;

  // reward: dense shaping for easy/medium skills, bonus-only for hard ones
  double reward = 0.0;
  switch (spec.skill) {
    case Skill::reach:
    case Skill::reach_far:
      reward = -dist2d(s.agent_pos, s.goal);
      break;
    case Skill::push:
    case Skill::pull:
      reward = -dist2d(s.agent_pos, s.object_pos) - dist2d(s.object_pos, s.goal);
      break;
    case Skill::reach_avoid: {
      const double d = std::hypot(s.agent_pos[0] - kObstacleCenter[0],
                                  s.agent_pos[1] - kObstacleCenter[1]);
      if (d < kObstacleRadius) reward -= 0.5;
      break;
    }
    case Skill::gap_pass:
      break;
  }
  if (newly) reward += kSuccessBonus;
  r.reward = reward;

  r.done = s.success || s.t >= spec.max_episode_steps;
  return r;
}

double reward_bound(Skill s) {
  const double dmax = 2.0 * kArenaHalf * std::sqrt(2.0);  // arena diameter
  switch (s) {
    case Skill::reach:
    case Skill::reach_far:
      return dmax + kSuccessBonus;
    case Skill::push:
    case Skill::pull:
      return 2.0 * dmax + kSuccessBonus;
    case Skill::reach_avoid:
      return 0.5 + kSuccessBonus;
    case Skill::gap_pass:
      return kSuccessBonus;
  }
  return 2.0 * dmax + kSuccessBonus;
}

std::string suite_registry_json() {
  nlohmann::json root;
  for (const auto& name : suite_names()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : make_suite(name, 0)) {
      arr.push_back({{"task_id", t.task_id},
                     {"skill", skill_name(t.skill)},
                     {"goal_region", {t.goal_region.lo[0], t.goal_region.lo[1],
                                      t.goal_region.hi[0], t.goal_region.hi[1]}},
                     {"difficulty", difficulty_name(t.difficulty)},
                     {"max_episode_steps", t.max_episode_steps}});
    }
    root[name] = arr;
  }
  return root.dump(2) + "\n";
}

}  // namespace taco

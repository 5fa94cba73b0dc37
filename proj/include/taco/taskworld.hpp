#pragma once

#include <array>
#include <string>
#include <vector>

#include "taco/rng.hpp"

namespace taco {

enum class Skill { reach, push, reach_avoid, gap_pass, pull, reach_far };
enum class Difficulty { easy, medium, hard };

std::string skill_name(Skill s);
std::string difficulty_name(Difficulty d);

struct Box2 {
  double lo[2];
  double hi[2];
  bool contains(const double* p) const {
    return p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1];
  }
  void center(double* c) const {
    c[0] = 0.5 * (lo[0] + hi[0]);
    c[1] = 0.5 * (lo[1] + hi[1]);
  }
};

struct TaskSpec {
  int task_id = -1;
  Skill skill = Skill::reach;
  Box2 goal_region{{0, 0}, {0, 0}};
  Difficulty difficulty = Difficulty::easy;
  int max_episode_steps = 150;
};

// 2D velocity-controlled point mass. All tasks share the same 8-dim state:
// [agent pos (2), agent vel (2), object pos (2, zero for objectless skills),
// goal (2)] and a 2-dim action in [-1, 1]^2.
struct EnvState {
  static constexpr int kStateDim = 8;
  static constexpr int kActionDim = 2;

  double agent_pos[2] = {0, 0};
  double agent_vel[2] = {0, 0};
  double object_pos[2] = {0, 0};
  double goal[2] = {0, 0};
  bool success = false;  // latched
  int t = 0;

  void observe(double* out) const;  // writes kStateDim doubles
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  bool action_clipped = false;
};

// Replay record.
struct Transition {
  std::array<double, EnvState::kStateDim> state{};
  std::array<double, EnvState::kActionDim> action{};
  double reward = 0.0;
  std::array<double, EnvState::kStateDim> next_state{};
  bool done = false;
  bool success = false;
  int task_id = -1;
};

inline constexpr double kDt = 0.05;
inline constexpr double kVelClamp = 1.0;
inline constexpr double kArenaHalf = 2.0;
inline constexpr double kGoalRadius = 0.05;
inline constexpr double kContactRadius = 0.12;
inline constexpr double kSuccessBonus = 5.0;

// Known suites: "mt4-toy", "mt8-toy", "heldout-toy". The spec list is a
// fixed registry (identical for any seed). Unknown names throw.
std::vector<TaskSpec> make_suite(const std::string& name, uint64_t seed);
std::vector<std::string> suite_names();
TaskSpec find_task(int task_id);  // searches all suites

EnvState env_reset(const TaskSpec& spec, Rng& rng);
StepResult env_step(const EnvState& state, const double* action, const TaskSpec& spec);

// Documented per-skill reward magnitude bound.
double reward_bound(Skill s);

// JSON text of the full suite registry (committed to the repo as
// data/suites.json for auditability).
std::string suite_registry_json();

}  // namespace taco

#pragma once

#include <unordered_map>
#include <vector>

#include "taco/rng.hpp"
#include "taco/sac.hpp"
#include "taco/taskworld.hpp"

namespace taco {

// Ring buffer of transitions with per-task index lists, so each task's
// batches are drawn only from its own transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void add(const Transition& t);
  size_t size() const { return full_ ? capacity_ : next_; }
  size_t capacity() const { return capacity_; }
  size_t task_size(int task_id) const;

  // Uniform draw with replacement from the task's live entries.
  SacBatch sample(int task_id, int batch, Rng& rng) const;

 private:
  size_t capacity_;
  std::vector<Transition> data_;
  size_t next_ = 0;
  bool full_ = false;
  std::unordered_map<int, std::vector<size_t>> task_slots_;
  std::vector<std::pair<int, size_t>> slot_pos_;  // slot -> (task_id, index in its list)
};

}  // namespace taco

#include "taco/replay.hpp"

#include <stdexcept>

namespace taco {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
  data_.resize(capacity);
  slot_pos_.assign(capacity, {-1, 0});
}

void ReplayBuffer::add(const Transition& t) {
  const size_t slot = next_;
  if (full_) {
    // evict: unlink the old entry from its task list (swap-remove)
    auto [old_task, pos] = slot_pos_[slot];
    auto& list = task_slots_[old_task];
    const size_t moved_slot = list.back();
    list[pos] = moved_slot;
    slot_pos_[moved_slot].second = pos;
    list.pop_back();
  }
  data_[slot] = t;
  auto& list = task_slots_[t.task_id];
  slot_pos_[slot] = {t.task_id, list.size()};
  list.push_back(slot);
  next_ = (next_ + 1) % capacity_;
  if (next_ == 0) full_ = true;
}

size_t ReplayBuffer::task_size(int task_id) const {
  auto it = task_slots_.find(task_id);
  return it == task_slots_.end() ? 0 : it->second.size();
}

SacBatch ReplayBuffer::sample(int task_id, int batch, Rng& rng) const {
  auto it = task_slots_.find(task_id);
  if (it == task_slots_.end() || it->second.empty())
    throw std::runtime_error("ReplayBuffer: no transitions for task " + std::to_string(task_id));
  const auto& list = it->second;
  SacBatch b;
  b.state_dim = EnvState::kStateDim;
  b.action_dim = EnvState::kActionDim;
  b.states.reserve(batch * b.state_dim);
  b.next_states.reserve(batch * b.state_dim);
  b.actions.reserve(batch * b.action_dim);
  b.rewards.reserve(batch);
  b.dones.reserve(batch);
  for (int i = 0; i < batch; ++i) {
    const Transition& t = data_[list[rng.index(list.size())]];
    b.states.insert(b.states.end(), t.state.begin(), t.state.end());
    b.next_states.insert(b.next_states.end(), t.next_state.begin(), t.next_state.end());
    b.actions.insert(b.actions.end(), t.action.begin(), t.action.end());
    b.rewards.push_back(t.reward);
    // timeout terminations still bootstrap; only success-latch ends the MDP
    b.dones.push_back(t.done && t.success ? 1.0 : 0.0);
  }
  return b;
}

}  // namespace taco

#include "guide/tracker.hpp"

#include <cmath>
#include <string>

namespace guide {

void TrackerConfig::validate() const {
  if (!(slot_duration_s > 0.0)) throw ValidationError("slot_duration_s must be > 0");
  if (!(energy_target_j > 0.0)) throw ValidationError("energy_target_j must be > 0");
  if (!(poll_interval_s > 0.0)) throw ValidationError("poll_interval_s must be > 0");
  if (poll_interval_s > slot_duration_s) {
    throw ValidationError("poll_interval_s must not exceed slot_duration_s");
  }
  if (!(ema_weight > 0.0) || ema_weight > 1.0) {
    throw ValidationError("ema_weight must be in (0,1]");
  }
  const double ratio = slot_duration_s / poll_interval_s;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw ValidationError("slot_duration_s must be an integer multiple of poll_interval_s");
  }
}

int TrackerConfig::polls_per_slot() const {
  return static_cast<int>(std::llround(slot_duration_s / poll_interval_s));
}

EnergyBudgetTracker::EnergyBudgetTracker(TrackerConfig config, Mode mode)
    : config_(config), mode_(mode) {
  config_.validate();
  state_.last_estimate = estimate_at(0, config_.slot_duration_s);
}

BudgetEstimate EnergyBudgetTracker::estimate_at(int poll_index, double time_remaining_s) const {
  BudgetEstimate est;
  est.slot_index = state_.slot_index;
  est.poll_index = poll_index;
  est.time_remaining_s = time_remaining_s;
  est.predicted_remaining_j = state_.power_ema_w * time_remaining_s;
  est.predicted_total_j = state_.energy_used_j + est.predicted_remaining_j;
  est.usable_j = std::max(0.0, config_.energy_target_j - est.predicted_total_j);
  return est;
}

BudgetEstimate EnergyBudgetTracker::ingest(const EnergySample& sample) {
  if (sample.energy_delta_j < 0.0) {
    throw MonotonicityError("negative energy delta (" + std::to_string(sample.energy_delta_j) +
                            " J): meter reading went backwards");
  }
  if (!(sample.interval_s > 0.0)) {
    throw ValidationError("sample interval must be > 0");
  }
  if (mode_ == Mode::Simulation &&
      std::abs(sample.interval_s - config_.poll_interval_s) > 1e-9 * config_.poll_interval_s) {
    throw ValidationError("sample interval " + std::to_string(sample.interval_s) +
                          " does not match configured poll interval in simulation mode");
  }

  const double instantaneous_power_w = sample.energy_delta_j / sample.interval_s;
  state_.power_ema_w = config_.ema_weight * instantaneous_power_w +
                       (1.0 - config_.ema_weight) * state_.power_ema_w;
  state_.energy_used_j += sample.energy_delta_j;
  state_.poll_index_in_slot += 1;

  bool slot_done = false;
  double time_remaining_s = 0.0;
  if (mode_ == Mode::Simulation) {
    time_remaining_s =
        (config_.polls_per_slot() - state_.poll_index_in_slot) * config_.poll_interval_s;
    slot_done = state_.poll_index_in_slot >= config_.polls_per_slot();
  } else {
    slot_elapsed_s_ += sample.interval_s;
    time_remaining_s = std::max(0.0, config_.slot_duration_s - slot_elapsed_s_);
    slot_done = slot_elapsed_s_ >= config_.slot_duration_s - 1e-12;
  }

  const BudgetEstimate poll_estimate = estimate_at(state_.poll_index_in_slot, time_remaining_s);
  state_.last_estimate = poll_estimate;
  if (slot_done) close_slot();
  return poll_estimate;
}

void EnergyBudgetTracker::close_slot() {
  slot_log_.push_back({state_.slot_index, state_.energy_used_j});
  state_.slot_index += 1;
  state_.poll_index_in_slot = 0;
  state_.energy_used_j = 0.0;
  if (!config_.ema_persists_across_slots) state_.power_ema_w = 0.0;
  slot_elapsed_s_ = 0.0;
  // Refresh the snapshot so a pull at the slot boundary sees the new slot's
  // untouched budget instead of the closed slot's final estimate.
  state_.last_estimate = estimate_at(0, config_.slot_duration_s);
}

}  // namespace guide

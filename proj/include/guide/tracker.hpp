#pragma once

#include <cstdint>
#include <vector>

#include "guide/errors.hpp"

namespace guide {

/// Slot-based energy accounting parameters. The GPU timeline is split into
/// fixed slots of slot_duration_s; the tracker polls an energy meter every
/// poll_interval_s and smooths instantaneous power with an EMA of weight
/// ema_weight to forecast the slot's remaining consumption.
struct TrackerConfig {
  double slot_duration_s = 2.0;
  double energy_target_j = 150.0;  // soft per-slot cap the budget is measured against
  double poll_interval_s = 0.1;
  double ema_weight = 0.3;  // in (0,1]; 1 degenerates to "last sample wins"
  bool ema_persists_across_slots = false;

  /// Throws ValidationError on out-of-range values or when slot_duration_s is
  /// not an integer multiple of poll_interval_s.
  void validate() const;
  int polls_per_slot() const;
};

/// One polled meter reading: joules consumed since the previous poll.
struct EnergySample {
  double energy_delta_j = 0.0;
  double interval_s = 0.0;
};

/// Snapshot of the budget forecast as of one poll.
struct BudgetEstimate {
  double usable_j = 0.0;               // max(0, target - predicted slot total)
  double predicted_remaining_j = 0.0;  // power EMA times remaining slot time
  double predicted_total_j = 0.0;      // energy used + predicted remaining
  double time_remaining_s = 0.0;
  long long slot_index = 0;
  int poll_index = 0;
};

struct TrackerState {
  long long slot_index = 0;
  int poll_index_in_slot = 0;
  double energy_used_j = 0.0;
  double power_ema_w = 0.0;
  BudgetEstimate last_estimate;
};

struct SlotEnergy {
  long long slot_index = 0;
  double energy_j = 0.0;  // sum of the slot's sample deltas
};

/// Rolling per-slot energy budget tracker.
///
/// Every ingested sample refreshes the budget estimate eagerly, so reads are
/// O(1) snapshots. One writer (the polling loop) mutates state; in simulation
/// everything runs on a single deterministic virtual-clock loop. A live
/// deployment would put the estimate behind a seqlock so readers never block
/// the poller; that backend is out of scope here.
class EnergyBudgetTracker {
 public:
  enum class Mode {
    Simulation,  // fixed poll intervals, slot closes after exactly S/dt polls
    Live,        // jittery measured intervals, slot closes once accumulated time >= S
  };

  explicit EnergyBudgetTracker(TrackerConfig config, Mode mode = Mode::Simulation);

  /// Folds one meter sample into the slot accounting and returns the estimate
  /// computed at this poll. Rejects negative deltas (meter misbehavior) with
  /// MonotonicityError. In simulation mode the sample interval must equal the
  /// configured poll interval within 1e-9 relative.
  BudgetEstimate ingest(const EnergySample& sample);

  /// Latest estimate without mutating state. Before the first sample of a
  /// slot this reflects the untouched slot: usable equals the full target
  /// minus whatever a persisted EMA forecasts.
  const BudgetEstimate& usable_budget() const { return state_.last_estimate; }

  const TrackerState& state() const { return state_; }
  const TrackerConfig& config() const { return config_; }

  /// Realized energy of every completed slot, in slot order.
  const std::vector<SlotEnergy>& slot_energy_log() const { return slot_log_; }

 private:
  BudgetEstimate estimate_at(int poll_index, double time_remaining_s) const;
  void close_slot();

  TrackerConfig config_;
  Mode mode_;
  TrackerState state_;
  double slot_elapsed_s_ = 0.0;  // live mode only
  std::vector<SlotEnergy> slot_log_;
};

}  // namespace guide

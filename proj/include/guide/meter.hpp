#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "guide/errors.hpp"
#include "guide/tracker.hpp"

namespace guide {

/// Read contract every energy source must satisfy: successive reads at
/// non-decreasing times partition the timeline, each delta being the energy
/// consumed over (previous read, now]. A live GPU telemetry backend would
/// implement this against wall-clock time; the simulated meter below runs on
/// a virtual clock.
class EnergyMeter {
 public:
  virtual ~EnergyMeter() = default;
  virtual EnergySample read_energy_delta(double now_s) = 0;
};

/// Piecewise-constant power signal: each breakpoint holds until the next one.
/// Power is zero before the first breakpoint; the last value persists.
struct PowerTrace {
  struct Point {
    double timestamp_s = 0.0;
    double power_w = 0.0;
  };
  std::vector<Point> points;

  /// Parses "timestamp_s,power_w" lines; '#' starts a comment. Timestamps
  /// must be strictly increasing, power non-negative.
  static PowerTrace parse(std::istream& in);
  static PowerTrace load_file(const std::string& path);

  void validate() const;
};

struct SimMeterConfig {
  double base_draw_w = 45.0;        // idle GPU draw
  double base_draw_jitter_w = 0.0;  // uniform half-range added per read; 0 for pinned runs
  std::uint64_t seed = 0;

  void validate() const;
};

/// One model execution drawn as constant added power energy_j/duration_s over
/// [start_s, start_s + duration_s).
struct ScheduledExecution {
  std::string model_id;
  double start_s = 0.0;
  double duration_s = 0.0;
  double energy_j = 0.0;
};

/// Deterministic simulated meter: base draw + scheduled executions + optional
/// trace replay. Reads integrate total power exactly over the read interval,
/// so arbitrary read partitions conserve energy.
class SimulatedMeter : public EnergyMeter {
 public:
  explicit SimulatedMeter(SimMeterConfig config, std::optional<PowerTrace> trace = std::nullopt);

  /// Throws SchedulingError if the execution overlaps a previous one or
  /// starts before the last read (its energy could no longer be observed).
  void schedule_execution(const ScheduledExecution& exec);

  EnergySample read_energy_delta(double now_s) override;

  /// Exact integral of base + executions + trace over (0, upto_s], excluding
  /// jitter. With jitter disabled this equals the sum of all read deltas.
  double analytic_total_energy(double upto_s) const;

  /// Sum of every delta handed out so far (includes jitter).
  double realized_total_energy() const { return realized_total_j_; }

  double last_read_time_s() const;

 private:
  struct ExecSpan {
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;
    double energy_j = 0.0;
    std::string model_id;
  };

  // jitter-free; first_exec skips executions known to end before from_ns
  double integrate_ns(std::int64_t from_ns, std::int64_t until_ns,
                      std::size_t first_exec = 0) const;
  double trace_integral_ns(std::int64_t from_ns, std::int64_t until_ns) const;

  SimMeterConfig config_;
  std::optional<PowerTrace> trace_;
  std::vector<ExecSpan> executions_;  // kept sorted by start
  std::size_t read_cursor_ = 0;       // first execution not ended by last_read_ns_
  std::int64_t last_read_ns_ = 0;
  double realized_total_j_ = 0.0;
  std::mt19937_64 rng_;
};

}  // namespace guide

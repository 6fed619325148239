#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "guide/meter.hpp"
#include "guide/registry.hpp"
#include "guide/selector.hpp"
#include "guide/tracker.hpp"

namespace guide {

struct WorkloadRequest {
  double arrival_s = 0.0;
  TaskType task;
  std::string request_id;
};

/// Parses "arrival_s,task,request_id" lines; '#' comments and blank lines are
/// skipped. Arrivals must be non-decreasing.
std::vector<WorkloadRequest> load_workload(std::istream& in);
std::vector<WorkloadRequest> load_workload_file(const std::string& path);

/// count requests of one task, arriving every interval_s starting at start_s.
std::vector<WorkloadRequest> make_uniform_workload(const TaskType& task, int count,
                                                   double interval_s, double start_s = 0.0);

/// Per-task model-selection distribution: model id -> weight, weights summing
/// to 1 within 1e-9. Models this policy picks do not have to match the task
/// it picks them for; observed selection data includes such mistakes.
using SelectionDistribution = std::map<TaskType, std::vector<std::pair<std::string, double>>>;

struct Policy {
  enum class Kind {
    Guide,       // budget-aware Pareto selection
    Popularity,  // most likes per task, tie by id
    NameOnly,    // seeded draw from a configured per-task distribution
    Fixed,       // always the configured model
  };

  Kind kind = Kind::Guide;
  std::string name;  // report label, e.g. "guide-150"
  SelectorConfig selector;                // Guide only
  SelectionDistribution distribution;     // NameOnly only
  std::string fixed_model_id;             // Fixed only

  static Policy guide(SelectorConfig selector = {}, std::string name = "guide");
  static Policy popularity();
  static Policy name_only(SelectionDistribution distribution, std::string name = "name-only");
  static Policy fixed(std::string model_id);

  /// Checks distribution weights and that referenced model ids exist.
  void validate(const ModelRegistry& registry) const;
};

/// Reads a distributions file mapping policy name -> task -> model -> weight
/// and returns the named entry, models sorted by id for deterministic draws.
SelectionDistribution load_distribution(const std::string& path, const std::string& policy_name);

std::string baseline_choose(const Policy& policy, const TaskType& task,
                            const ModelRegistry& registry, std::mt19937_64& rng);

struct TaskStats {
  long long requests = 0;
  long long completed = 0;
  long long starved = 0;  // budget starvation
  long long failed = 0;   // unknown task / configuration errors
  double mean_accuracy = 0.0;     // fraction; over completed requests
  double mean_energy_j = 0.0;     // per-request model energy, base draw excluded
  double acc_per_joule = 0.0;     // mean_accuracy / mean_energy_j
  double pareto_rate = 0.0;       // completed picks on the task's profiled frontier; 1 if none completed
  std::map<std::string, long long> selection_histogram;
};

struct SimulationReport {
  std::string policy_name;
  std::uint64_t seed = 0;
  TrackerConfig tracker;
  SimMeterConfig meter;
  SelectorConfig selector;
  std::uint64_t workload_fingerprint = 0;
  long long request_count = 0;

  std::map<TaskType, TaskStats> per_task;
  std::vector<double> per_slot_energy_j;  // realized, base draw included
  double violation_rate = 0.0;            // slots whose realized energy exceeds the target

  double slot_energy_sum_j = 0.0;   // sum of per_slot_energy_j
  double meter_analytic_j = 0.0;    // meter's analytic integral over the run
  double meter_realized_j = 0.0;    // sum of all deltas the tracker ingested

  /// Canonical machine-readable form. Byte-identical for identical inputs
  /// and seed; deliberately excludes wall-clock measurements.
  nlohmann::ordered_json to_json() const;
  static SimulationReport from_json(const nlohmann::json& j);

  std::string to_table() const;
};

std::uint64_t workload_fingerprint(const std::vector<WorkloadRequest>& workload);

/// Replays the workload under one policy on a deterministic virtual clock:
/// requests run one at a time in arrival order, the meter accrues base draw
/// plus each scheduled execution (plus an optional replayed power trace), and
/// the tracker polls throughout. Per-slot energy and violations are judged
/// over every slot from time zero through the end of the last busy slot.
/// Per-request selection errors are recorded in the report, not thrown.
SimulationReport run_simulation(const ModelRegistry& registry,
                                const std::vector<WorkloadRequest>& workload,
                                const Policy& policy, const TrackerConfig& tracker_config,
                                const SimMeterConfig& meter_config, std::uint64_t seed,
                                std::optional<PowerTrace> trace = std::nullopt);

struct ComparisonRow {
  TaskType task;
  std::string policy;
  double accuracy_pct = 0.0;
  double energy_j = 0.0;
  double acc_per_joule_pct = 0.0;  // %/J
};

/// Per-task rows sorted by Acc/J descending within each task (ties by policy
/// name). All reports must describe the same workload.
std::vector<ComparisonRow> compare_policies(const std::vector<SimulationReport>& reports);
std::string comparison_table(const std::vector<ComparisonRow>& rows);

}  // namespace guide

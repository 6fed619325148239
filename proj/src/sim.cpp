#include "guide/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace guide {
namespace {

std::int64_t to_ns(double seconds) { return std::llround(seconds * 1e9); }

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double parse_csv_double(const std::string& text, int lineno, const char* field) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("not a number: '" + text + "'", lineno, field);
  }
  return out;
}

std::string trim(const std::string& text) {
  std::size_t b = text.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = text.find_last_not_of(" \t\r");
  return text.substr(b, e - b + 1);
}

}  // namespace

std::vector<WorkloadRequest> load_workload(std::istream& in) {
  std::vector<WorkloadRequest> workload;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;

    std::size_t c1 = line.find(',');
    std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw ParseError("expected 'arrival_s,task,request_id'", lineno);
    }
    WorkloadRequest req;
    req.arrival_s = parse_csv_double(trim(line.substr(0, c1)), lineno, "arrival_s");
    req.task = trim(line.substr(c1 + 1, c2 - c1 - 1));
    req.request_id = trim(line.substr(c2 + 1));
    if (req.arrival_s < 0.0) throw ParseError("arrival must be >= 0", lineno, "arrival_s");
    if (req.task.empty()) throw ParseError("empty task", lineno, "task");
    if (req.request_id.empty()) throw ParseError("empty request id", lineno, "request_id");
    if (!workload.empty() && req.arrival_s < workload.back().arrival_s) {
      throw ParseError("arrivals must be non-decreasing", lineno, "arrival_s");
    }
    workload.push_back(std::move(req));
  }
  return workload;
}

std::vector<WorkloadRequest> load_workload_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open workload file: " + path);
  return load_workload(in);
}

std::vector<WorkloadRequest> make_uniform_workload(const TaskType& task, int count,
                                                   double interval_s, double start_s) {
  if (count < 0) throw ValidationError("workload request count must be >= 0");
  if (interval_s < 0.0) throw ValidationError("workload interval must be >= 0");
  std::vector<WorkloadRequest> workload;
  workload.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    WorkloadRequest req;
    req.arrival_s = start_s + interval_s * i;
    req.task = task;
    char buf[16];
    std::snprintf(buf, sizeof buf, "r%04d", i);
    req.request_id = buf;
    workload.push_back(std::move(req));
  }
  return workload;
}

Policy Policy::guide(SelectorConfig selector, std::string name) {
  Policy p;
  p.kind = Kind::Guide;
  p.selector = selector;
  p.name = std::move(name);
  return p;
}

Policy Policy::popularity() {
  Policy p;
  p.kind = Kind::Popularity;
  p.name = "popularity";
  return p;
}

Policy Policy::name_only(SelectionDistribution distribution, std::string name) {
  Policy p;
  p.kind = Kind::NameOnly;
  p.distribution = std::move(distribution);
  p.name = std::move(name);
  return p;
}

Policy Policy::fixed(std::string model_id) {
  Policy p;
  p.kind = Kind::Fixed;
  p.fixed_model_id = std::move(model_id);
  p.name = "fixed:" + p.fixed_model_id;
  return p;
}

void Policy::validate(const ModelRegistry& registry) const {
  switch (kind) {
    case Kind::Guide:
      selector.validate();
      break;
    case Kind::Popularity:
      break;
    case Kind::NameOnly: {
      if (distribution.empty()) {
        throw ConfigError("name-only policy requires a selection distribution");
      }
      for (const auto& [task, weights] : distribution) {
        double sum = 0.0;
        for (const auto& [model_id, weight] : weights) {
          if (!(weight > 0.0)) {
            throw ConfigError("distribution weight for '" + model_id + "' must be > 0");
          }
          if (!registry.find(model_id)) {
            throw ConfigError("distribution for task '" + task + "' references unknown model '" +
                              model_id + "'");
          }
          sum += weight;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
          throw ConfigError("distribution weights for task '" + task + "' sum to " +
                            std::to_string(sum) + ", expected 1");
        }
      }
      break;
    }
    case Kind::Fixed:
      if (!registry.find(fixed_model_id)) {
        throw ConfigError("fixed policy references unknown model '" + fixed_model_id + "'");
      }
      break;
  }
}

SelectionDistribution load_distribution(const std::string& path, const std::string& policy_name) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open distributions file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid distributions JSON: ") + e.what());
  }
  if (!doc.contains(policy_name)) {
    throw ConfigError("distributions file has no entry '" + policy_name + "'");
  }
  SelectionDistribution out;
  for (const auto& [task, weights] : doc.at(policy_name).items()) {
    std::vector<std::pair<std::string, double>> entries;
    for (const auto& [model_id, weight] : weights.items()) {
      entries.emplace_back(model_id, weight.get<double>());
    }
    std::sort(entries.begin(), entries.end());  // deterministic draw order
    out.emplace(task, std::move(entries));
  }
  return out;
}

std::string baseline_choose(const Policy& policy, const TaskType& task,
                            const ModelRegistry& registry, std::mt19937_64& rng) {
  switch (policy.kind) {
    case Policy::Kind::Popularity: {
      const auto candidates = registry.by_task(task);
      if (candidates.empty()) {
        throw UnknownTaskError("no model for task '" + task + "'");
      }
      const ModelProfile* best = &candidates.front();
      for (const auto& m : candidates) {
        if (m.likes > best->likes || (m.likes == best->likes && m.id < best->id)) best = &m;
      }
      return best->id;
    }
    case Policy::Kind::NameOnly: {
      auto it = policy.distribution.find(task);
      if (it == policy.distribution.end()) {
        throw ConfigError("no selection distribution configured for task '" + task + "'");
      }
      const double u = uniform01(rng);
      double cumulative = 0.0;
      for (const auto& [model_id, weight] : it->second) {
        cumulative += weight;
        if (u < cumulative) return model_id;
      }
      return it->second.back().first;  // u landed in the rounding gap at the top
    }
    case Policy::Kind::Fixed:
      return policy.fixed_model_id;
    case Policy::Kind::Guide:
      break;
  }
  throw std::logic_error("baseline_choose called with a non-baseline policy");
}

std::uint64_t workload_fingerprint(const std::vector<WorkloadRequest>& workload) {
  // FNV-1a over the canonical request tuples.
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&hash](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ull;
    }
  };
  for (const auto& req : workload) {
    const std::int64_t arrival_ns = to_ns(req.arrival_s);
    mix(&arrival_ns, sizeof arrival_ns);
    mix(req.task.data(), req.task.size());
    mix("|", 1);
    mix(req.request_id.data(), req.request_id.size());
    mix("\n", 1);
  }
  return hash;
}

SimulationReport run_simulation(const ModelRegistry& registry,
                                const std::vector<WorkloadRequest>& workload,
                                const Policy& policy, const TrackerConfig& tracker_config,
                                const SimMeterConfig& meter_config, std::uint64_t seed,
                                std::optional<PowerTrace> trace) {
  if (workload.empty()) throw ValidationError("workload must be non-empty");
  for (std::size_t i = 1; i < workload.size(); ++i) {
    if (workload[i].arrival_s < workload[i - 1].arrival_s) {
      throw ValidationError("workload arrivals must be non-decreasing");
    }
  }
  for (const auto& req : workload) {
    if (registry.by_task(req.task).empty()) {
      throw ValidationError("workload task '" + req.task + "' is absent from the registry");
    }
  }
  policy.validate(registry);

  EnergyBudgetTracker tracker(tracker_config);
  SimulatedMeter meter(meter_config, std::move(trace));
  std::mt19937_64 rng(seed);

  const std::int64_t poll_ns = to_ns(tracker_config.poll_interval_s);
  const std::int64_t slot_ns = poll_ns * tracker_config.polls_per_slot();
  std::int64_t next_poll_ns = poll_ns;
  auto pump_polls_until = [&](std::int64_t upto_ns) {
    while (next_poll_ns <= upto_ns) {
      tracker.ingest(meter.read_energy_delta(static_cast<double>(next_poll_ns) * 1e-9));
      next_poll_ns += poll_ns;
    }
  };

  struct Accumulator {
    TaskStats stats;
    double accuracy_sum = 0.0;
    double energy_sum = 0.0;
    long long pareto_hits = 0;
  };
  std::map<TaskType, Accumulator> per_task;
  std::map<TaskType, std::set<std::string>> frontier_ids;
  auto task_frontier = [&](const TaskType& task) -> const std::set<std::string>& {
    auto it = frontier_ids.find(task);
    if (it == frontier_ids.end()) {
      std::set<std::string> ids;
      for (const auto& m : pareto_frontier(registry.profiled_by_task(task))) ids.insert(m.id);
      it = frontier_ids.emplace(task, std::move(ids)).first;
    }
    return it->second;
  };

  std::int64_t now_ns = 0;
  std::int64_t busy_until_ns = 0;
  for (const auto& req : workload) {
    auto& acc = per_task[req.task];
    acc.stats.requests += 1;

    now_ns = std::max(to_ns(req.arrival_s), busy_until_ns);
    pump_polls_until(now_ns);
    try {
      std::string chosen;
      if (policy.kind == Policy::Kind::Guide) {
        CallbackBudgetSource source([&] { return tracker.usable_budget(); },
                                    [&](double seconds) {
                                      now_ns += to_ns(seconds);
                                      pump_polls_until(now_ns);
                                    });
        chosen = select(req.task, registry, source, policy.selector).chosen;
      } else {
        chosen = baseline_choose(policy, req.task, registry, rng);
      }

      const ModelProfile* profile = registry.find(chosen);
      if (!profile) throw ConfigError("selected model '" + chosen + "' is not in the registry");
      meter.schedule_execution({chosen, static_cast<double>(now_ns) * 1e-9,
                                profile->latency_avg_s, profile->energy_avg_j});
      busy_until_ns = now_ns + to_ns(profile->latency_avg_s);

      acc.stats.completed += 1;
      acc.accuracy_sum += profile->accuracy;
      acc.energy_sum += profile->energy_avg_j;
      acc.stats.selection_histogram[chosen] += 1;
      if (task_frontier(req.task).count(chosen)) acc.pareto_hits += 1;
    } catch (const BudgetStarvationError&) {
      acc.stats.starved += 1;
      busy_until_ns = std::max(busy_until_ns, now_ns);
    } catch (const UnknownTaskError&) {
      acc.stats.failed += 1;
      busy_until_ns = std::max(busy_until_ns, now_ns);
    } catch (const ConfigError&) {
      acc.stats.failed += 1;
      busy_until_ns = std::max(busy_until_ns, now_ns);
    }
  }

  // Run the tracker through the end of the last touched slot so compliance is
  // judged over completed slots only.
  std::int64_t end_ns = std::max(now_ns, busy_until_ns);
  end_ns = ((end_ns + slot_ns - 1) / slot_ns) * slot_ns;
  if (end_ns == 0) end_ns = slot_ns;
  pump_polls_until(end_ns);

  SimulationReport report;
  report.policy_name = policy.name;
  report.seed = seed;
  report.tracker = tracker_config;
  report.meter = meter_config;
  report.selector = policy.selector;
  report.workload_fingerprint = workload_fingerprint(workload);
  report.request_count = static_cast<long long>(workload.size());

  for (auto& [task, acc] : per_task) {
    TaskStats stats = acc.stats;
    if (stats.completed > 0) {
      stats.mean_accuracy = acc.accuracy_sum / static_cast<double>(stats.completed);
      stats.mean_energy_j = acc.energy_sum / static_cast<double>(stats.completed);
      stats.acc_per_joule =
          stats.mean_energy_j > 0.0 ? stats.mean_accuracy / stats.mean_energy_j : 0.0;
      stats.pareto_rate =
          static_cast<double>(acc.pareto_hits) / static_cast<double>(stats.completed);
    } else {
      stats.pareto_rate = 1.0;  // vacuously: no selection was off the frontier
    }
    report.per_task.emplace(task, std::move(stats));
  }

  long long violations = 0;
  for (const auto& slot : tracker.slot_energy_log()) {
    report.per_slot_energy_j.push_back(slot.energy_j);
    report.slot_energy_sum_j += slot.energy_j;
    if (slot.energy_j > tracker_config.energy_target_j) violations += 1;
  }
  report.violation_rate =
      report.per_slot_energy_j.empty()
          ? 0.0
          : static_cast<double>(violations) / static_cast<double>(report.per_slot_energy_j.size());
  report.meter_analytic_j = meter.analytic_total_energy(static_cast<double>(end_ns) * 1e-9);
  report.meter_realized_j = meter.realized_total_energy();
  return report;
}

}  // namespace guide

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "guide/sim.hpp"

namespace guide {
namespace {

std::string fixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string hex64(std::uint64_t value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace

nlohmann::ordered_json SimulationReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "guide-report-v1";
  j["policy"] = policy_name;
  j["seed"] = seed;
  j["workload"] = {{"fingerprint", hex64(workload_fingerprint)}, {"requests", request_count}};
  j["config"]["tracker"] = {{"slot_duration_s", tracker.slot_duration_s},
                            {"energy_target_j", tracker.energy_target_j},
                            {"poll_interval_s", tracker.poll_interval_s},
                            {"ema_weight", tracker.ema_weight},
                            {"ema_persists_across_slots", tracker.ema_persists_across_slots}};
  j["config"]["meter"] = {{"base_draw_w", meter.base_draw_w},
                          {"base_draw_jitter_w", meter.base_draw_jitter_w},
                          {"seed", meter.seed}};
  j["config"]["selector"] = {{"retry_interval_s", selector.retry_interval_s},
                             {"max_retries", selector.max_retries}};

  nlohmann::ordered_json tasks = nlohmann::ordered_json::object();
  for (const auto& [task, stats] : per_task) {
    nlohmann::ordered_json t;
    t["requests"] = stats.requests;
    t["completed"] = stats.completed;
    t["starved"] = stats.starved;
    t["failed"] = stats.failed;
    t["mean_accuracy"] = stats.mean_accuracy;
    t["mean_energy_j"] = stats.mean_energy_j;
    t["acc_per_joule"] = stats.acc_per_joule;
    t["pareto_rate"] = stats.pareto_rate;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [model_id, count] : stats.selection_histogram) hist[model_id] = count;
    t["selection_histogram"] = std::move(hist);
    tasks[task] = std::move(t);
  }
  j["per_task"] = std::move(tasks);

  j["slots"] = {{"count", per_slot_energy_j.size()},
                {"energy_target_j", tracker.energy_target_j},
                {"violation_rate", violation_rate},
                {"energy_j", per_slot_energy_j}};
  j["totals"] = {{"slot_energy_sum_j", slot_energy_sum_j},
                 {"meter_analytic_j", meter_analytic_j},
                 {"meter_realized_j", meter_realized_j}};
  return j;
}

SimulationReport SimulationReport::from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "guide-report-v1") {
    throw ParseError("not a guide-report-v1 document");
  }
  SimulationReport report;
  report.policy_name = j.at("policy").get<std::string>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.workload_fingerprint =
      std::stoull(j.at("workload").at("fingerprint").get<std::string>(), nullptr, 16);
  report.request_count = j.at("workload").at("requests").get<long long>();

  const auto& tracker = j.at("config").at("tracker");
  report.tracker.slot_duration_s = tracker.at("slot_duration_s").get<double>();
  report.tracker.energy_target_j = tracker.at("energy_target_j").get<double>();
  report.tracker.poll_interval_s = tracker.at("poll_interval_s").get<double>();
  report.tracker.ema_weight = tracker.at("ema_weight").get<double>();
  report.tracker.ema_persists_across_slots = tracker.at("ema_persists_across_slots").get<bool>();
  const auto& meter = j.at("config").at("meter");
  report.meter.base_draw_w = meter.at("base_draw_w").get<double>();
  report.meter.base_draw_jitter_w = meter.at("base_draw_jitter_w").get<double>();
  report.meter.seed = meter.at("seed").get<std::uint64_t>();
  const auto& selector = j.at("config").at("selector");
  report.selector.retry_interval_s = selector.at("retry_interval_s").get<double>();
  report.selector.max_retries = selector.at("max_retries").get<int>();

  for (const auto& [task, t] : j.at("per_task").items()) {
    TaskStats stats;
    stats.requests = t.at("requests").get<long long>();
    stats.completed = t.at("completed").get<long long>();
    stats.starved = t.at("starved").get<long long>();
    stats.failed = t.at("failed").get<long long>();
    stats.mean_accuracy = t.at("mean_accuracy").get<double>();
    stats.mean_energy_j = t.at("mean_energy_j").get<double>();
    stats.acc_per_joule = t.at("acc_per_joule").get<double>();
    stats.pareto_rate = t.at("pareto_rate").get<double>();
    for (const auto& [model_id, count] : t.at("selection_histogram").items()) {
      stats.selection_histogram[model_id] = count.get<long long>();
    }
    report.per_task.emplace(task, std::move(stats));
  }

  report.per_slot_energy_j = j.at("slots").at("energy_j").get<std::vector<double>>();
  report.violation_rate = j.at("slots").at("violation_rate").get<double>();
  const auto& totals = j.at("totals");
  report.slot_energy_sum_j = totals.at("slot_energy_sum_j").get<double>();
  report.meter_analytic_j = totals.at("meter_analytic_j").get<double>();
  report.meter_realized_j = totals.at("meter_realized_j").get<double>();
  return report;
}

std::string SimulationReport::to_table() const {
  std::ostringstream out;
  out << "policy: " << policy_name << "  seed: " << seed << "  requests: " << request_count
      << "\n";
  out << "task        req   ok  starved  failed   acc(%)  energy(J)  acc/J(%/J)  pareto\n";
  for (const auto& [task, stats] : per_task) {
    char row[160];
    std::snprintf(row, sizeof row, "%-10s %4lld %4lld  %7lld  %6lld  %7.2f  %9.2f  %10.2f  %6.3f\n",
                  task.c_str(), stats.requests, stats.completed, stats.starved, stats.failed,
                  stats.mean_accuracy * 100.0, stats.mean_energy_j,
                  stats.acc_per_joule * 100.0, stats.pareto_rate);
    out << row;
  }
  out << "slots: " << per_slot_energy_j.size() << "  target: " << fixed2(tracker.energy_target_j)
      << " J  violation rate: " << fixed2(violation_rate * 100.0) << "%\n";
  for (const auto& [task, stats] : per_task) {
    out << "selections[" << task << "]:";
    for (const auto& [model_id, count] : stats.selection_histogram) {
      out << " " << model_id << " x" << count;
    }
    out << "\n";
  }
  return out.str();
}

std::vector<ComparisonRow> compare_policies(const std::vector<SimulationReport>& reports) {
  if (reports.empty()) return {};
  for (const auto& report : reports) {
    if (report.workload_fingerprint != reports.front().workload_fingerprint ||
        report.request_count != reports.front().request_count) {
      throw ValidationError("reports describe different workloads ('" + report.policy_name +
                            "' vs '" + reports.front().policy_name + "')");
    }
  }
  std::vector<ComparisonRow> rows;
  for (const auto& report : reports) {
    for (const auto& [task, stats] : report.per_task) {
      ComparisonRow row;
      row.task = task;
      row.policy = report.policy_name;
      row.accuracy_pct = stats.mean_accuracy * 100.0;
      row.energy_j = stats.mean_energy_j;
      row.acc_per_joule_pct = stats.acc_per_joule * 100.0;
      rows.push_back(std::move(row));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.task != b.task) return a.task < b.task;
    if (a.acc_per_joule_pct != b.acc_per_joule_pct) return a.acc_per_joule_pct > b.acc_per_joule_pct;
    return a.policy < b.policy;
  });
  return rows;
}

std::string comparison_table(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  TaskType current_task;
  for (const auto& row : rows) {
    if (row.task != current_task) {
      current_task = row.task;
      out << current_task << "\n";
      out << "  policy                acc(%)  energy(J)  acc/J(%/J)\n";
    }
    char line[160];
    std::snprintf(line, sizeof line, "  %-20s %7.2f  %9.2f  %10.2f\n", row.policy.c_str(),
                  row.accuracy_pct, row.energy_j, row.acc_per_joule_pct);
    out << line;
  }
  return out.str();
}

}  // namespace guide

#include "guide/selector.hpp"

#include <chrono>

namespace guide {

void SelectorConfig::validate() const {
  if (!(retry_interval_s > 0.0)) throw ValidationError("retry_interval_s must be > 0");
  if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
}

SelectionDecision select(const TaskType& task, const ModelRegistry& registry,
                         BudgetSource& budget_source, const SelectorConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  // Task filtering is loop-invariant for an immutable registry, so it happens
  // once up front.
  const std::vector<ModelProfile> task_candidates = registry.profiled_by_task(task);
  if (task_candidates.empty()) {
    throw UnknownTaskError("no profiled model for task '" + task + "'");
  }

  SelectionDecision decision;
  decision.task = task;
  for (const auto& m : task_candidates) decision.candidates_task.push_back(m.id);

  BudgetEstimate budget;
  std::vector<ModelProfile> affordable;
  for (;;) {
    budget = budget_source.pull();
    affordable.clear();
    for (const auto& m : task_candidates) {
      if (m.energy_avg_j <= budget.usable_j) affordable.push_back(m);
    }
    if (!affordable.empty()) break;
    if (decision.retries >= config.max_retries) {
      throw BudgetStarvationError(task, budget, decision.retries);
    }
    budget_source.wait(config.retry_interval_s);
    decision.retries += 1;
  }

  decision.budget_at_decision_j = budget.usable_j;
  for (const auto& m : affordable) decision.candidates_budget.push_back(m.id);

  const std::vector<ModelProfile> frontier = pareto_frontier(affordable);
  for (const auto& m : frontier) decision.pareto_subset.push_back(m.id);

  const ModelProfile* best = &frontier.front();
  for (const auto& m : frontier) {
    if (m.accuracy > best->accuracy ||
        (m.accuracy == best->accuracy &&
         (m.energy_avg_j < best->energy_avg_j ||
          (m.energy_avg_j == best->energy_avg_j && m.id < best->id)))) {
      best = &m;
    }
  }
  decision.chosen = best->id;
  decision.decision_latency_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return decision;
}

}  // namespace guide

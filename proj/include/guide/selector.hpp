#pragma once

#include <functional>
#include <string>
#include <vector>

#include "guide/errors.hpp"
#include "guide/registry.hpp"
#include "guide/tracker.hpp"

namespace guide {

struct SelectorConfig {
  double retry_interval_s = 0.5;  // wait between budget re-pulls when nothing fits
  int max_retries = 20;           // waits before giving up (~10 s at the default interval)

  void validate() const;
};

/// Where the selector pulls budget snapshots from and how it waits between
/// retries. In simulation, wait() advances the virtual clock (the tracker
/// keeps polling meanwhile); a live deployment would sleep.
class BudgetSource {
 public:
  virtual ~BudgetSource() = default;
  virtual BudgetEstimate pull() = 0;
  virtual void wait(double seconds) = 0;
};

/// Constant budget, no-op waits. Used by the CLI's one-shot select command
/// and by tests.
class FixedBudgetSource final : public BudgetSource {
 public:
  explicit FixedBudgetSource(double usable_j) { estimate_.usable_j = usable_j; }
  BudgetEstimate pull() override { return estimate_; }
  void wait(double) override {}

 private:
  BudgetEstimate estimate_;
};

class CallbackBudgetSource final : public BudgetSource {
 public:
  CallbackBudgetSource(std::function<BudgetEstimate()> pull_fn,
                       std::function<void(double)> wait_fn)
      : pull_fn_(std::move(pull_fn)), wait_fn_(std::move(wait_fn)) {}
  BudgetEstimate pull() override { return pull_fn_(); }
  void wait(double seconds) override { wait_fn_(seconds); }

 private:
  std::function<BudgetEstimate()> pull_fn_;
  std::function<void(double)> wait_fn_;
};

/// No candidate fit the usable budget within the retry bound.
class BudgetStarvationError : public Error {
 public:
  BudgetStarvationError(const TaskType& task, BudgetEstimate last_budget, int retries)
      : Error("budget starvation for task '" + task + "': no model fits " +
              std::to_string(last_budget.usable_j) + " J after " + std::to_string(retries) +
              " retries"),
        last_budget_(last_budget),
        retries_(retries) {}

  const BudgetEstimate& last_budget() const { return last_budget_; }
  int retries() const { return retries_; }

 private:
  BudgetEstimate last_budget_;
  int retries_;
};

/// Full audit trail of one selection: the candidate set after each filter
/// stage plus the pick itself. chosen is always a member of pareto_subset,
/// which is contained in candidates_budget, contained in candidates_task.
struct SelectionDecision {
  std::string chosen;
  TaskType task;
  double budget_at_decision_j = 0.0;       // snapshot used by the successful iteration
  std::vector<std::string> candidates_task;    // profiled models of the task
  std::vector<std::string> candidates_budget;  // after the budget filter
  std::vector<std::string> pareto_subset;      // frontier, ascending energy
  int retries = 0;
  double decision_latency_s = 0.0;  // wall-clock compute cost of this call
};

/// Budget-aware accuracy-maximizing selection. Filters the task's profiled
/// candidates by a freshly pulled usable budget (re-pulled every retry),
/// keeps the Pareto-efficient subset, and picks the highest accuracy; ties go
/// to lower energy, then lexicographic id.
///
/// Throws UnknownTaskError when the registry has no profiled model for the
/// task, BudgetStarvationError when max_retries waits never produce a fit.
SelectionDecision select(const TaskType& task, const ModelRegistry& registry,
                         BudgetSource& budget_source, const SelectorConfig& config = {});

}  // namespace guide

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guide/errors.hpp"

namespace guide {

// Task labels are open-ended, case-sensitive strings. These constants cover
// the task vocabulary of the shipped registry.
using TaskType = std::string;

namespace tasks {
inline const TaskType kImageCaptioning = "ICapt";
inline const TaskType kVisualQA = "VQA";
inline const TaskType kObjectDetection = "OD";
inline const TaskType kImageGeneration = "IGen";
inline const TaskType kDocumentQA = "DocVQA";
inline const TaskType kImageClassification = "IClass";
}  // namespace tasks

/// One candidate model's measured serving characteristics plus the metadata
/// the popularity/name-driven baselines key on.
struct ModelProfile {
  std::string id;
  TaskType task;
  double energy_avg_j = 0.0;   // mean forward-pass energy per request
  double accuracy = 0.0;       // task-appropriate quality metric, fraction in [0,1]
  double latency_avg_s = 0.0;  // mean seconds per request
  long long likes = 0;         // hub popularity count; baseline policies only
  std::string description;     // free text; baseline policies only
  std::optional<double> lifecycle_energy_j;  // load+infer+unload; ignored by selection
  bool unprofiled = false;     // placeholder row without measured accuracy/energy
};

/// Immutable, ordered collection of model profiles. Iteration order is file
/// order, which keeps every downstream tie-break deterministic. Safe to share
/// read-only across threads once constructed.
class ModelRegistry {
 public:
  ModelRegistry() = default;
  explicit ModelRegistry(std::vector<ModelProfile> models);

  /// Parses the line-oriented registry format (see docs/file-formats.md).
  /// Throws ParseError / ValidationError with line and field context.
  static ModelRegistry load(std::istream& in);
  static ModelRegistry load_file(const std::string& path);

  const std::vector<ModelProfile>& models() const { return models_; }
  std::size_t size() const { return models_.size(); }
  bool empty() const { return models_.empty(); }

  const ModelProfile* find(std::string_view id) const;

  /// All profiles of `task`, in registry order. Empty result is legal.
  std::vector<ModelProfile> by_task(const TaskType& task) const;

  /// Like by_task but excludes placeholder rows. Data-driven selection can
  /// only rank models that actually carry measurements.
  std::vector<ModelProfile> profiled_by_task(const TaskType& task) const;

  /// Distinct task labels in first-seen order.
  std::vector<TaskType> task_vocabulary() const;

 private:
  std::vector<ModelProfile> models_;
};

/// Models not strictly dominated on (accuracy up, energy down). m' dominates m
/// only when energy(m') < energy(m) AND accuracy(m') > accuracy(m), so a model
/// that merely ties another in accuracy stays on the frontier. Output sorted
/// by ascending energy, ties by id. All inputs must share one task.
std::vector<ModelProfile> pareto_frontier(std::vector<ModelProfile> models);

}  // namespace guide

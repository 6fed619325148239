#pragma once

#include <cstdint>
#include <string>

#include "guide/meter.hpp"
#include "guide/selector.hpp"
#include "guide/tracker.hpp"

namespace guide {

/// Bundle of runtime configuration shared by the CLI and the simulation
/// harness. Resolution precedence is flags > environment > file > defaults;
/// this type holds the file-and-defaults layer, env overrides are applied by
/// apply_env_overrides, and the CLI applies flags last.
struct AppConfig {
  TrackerConfig tracker;
  SimMeterConfig meter;
  SelectorConfig selector;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Loads a JSON config file. All sections and keys are optional; missing ones
/// keep their defaults. Unknown keys are rejected so typos fail loudly.
AppConfig load_app_config(const std::string& path);

/// Applies GUIDE_* environment variables (see README for the full list).
void apply_env_overrides(AppConfig& config);

}  // namespace guide

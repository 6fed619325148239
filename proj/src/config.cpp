#include "guide/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

namespace guide {
namespace {

void expect_keys(const nlohmann::json& section, const char* name,
                 std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : section.items()) {
    (void)value;
    bool known = false;
    for (const char* candidate : allowed) {
      if (key == candidate) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string("unknown key '") + key + "' in config section '" + name + "'");
    }
  }
}

double env_double(const char* name, double fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  double out = 0.0;
  std::string text(raw);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(name) + " is not a number: '" + text + "'");
  }
  return out;
}

long long env_integer(const char* name, long long fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  long long out = 0;
  std::string text(raw);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(name) + " is not an integer: '" + text + "'");
  }
  return out;
}

bool env_bool(const char* name, bool fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  std::string text(raw);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(std::string(name) + " must be true/false/1/0, got '" + text + "'");
}

}  // namespace

void AppConfig::validate() const {
  tracker.validate();
  meter.validate();
  selector.validate();
}

AppConfig load_app_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
  expect_keys(doc, "(root)", {"tracker", "meter", "selector", "seed"});

  AppConfig config;
  if (doc.contains("tracker")) {
    const auto& t = doc["tracker"];
    expect_keys(t, "tracker",
                {"slot_duration_s", "energy_target_j", "poll_interval_s", "ema_weight",
                 "ema_persists_across_slots"});
    config.tracker.slot_duration_s = t.value("slot_duration_s", config.tracker.slot_duration_s);
    config.tracker.energy_target_j = t.value("energy_target_j", config.tracker.energy_target_j);
    config.tracker.poll_interval_s = t.value("poll_interval_s", config.tracker.poll_interval_s);
    config.tracker.ema_weight = t.value("ema_weight", config.tracker.ema_weight);
    config.tracker.ema_persists_across_slots =
        t.value("ema_persists_across_slots", config.tracker.ema_persists_across_slots);
  }
  if (doc.contains("meter")) {
    const auto& m = doc["meter"];
    expect_keys(m, "meter", {"base_draw_w", "base_draw_jitter_w", "seed"});
    config.meter.base_draw_w = m.value("base_draw_w", config.meter.base_draw_w);
    config.meter.base_draw_jitter_w = m.value("base_draw_jitter_w", config.meter.base_draw_jitter_w);
    config.meter.seed = m.value("seed", config.meter.seed);
  }
  if (doc.contains("selector")) {
    const auto& s = doc["selector"];
    expect_keys(s, "selector", {"retry_interval_s", "max_retries"});
    config.selector.retry_interval_s = s.value("retry_interval_s", config.selector.retry_interval_s);
    config.selector.max_retries = s.value("max_retries", config.selector.max_retries);
  }
  config.seed = doc.value("seed", config.seed);
  return config;
}

void apply_env_overrides(AppConfig& config) {
  config.tracker.slot_duration_s = env_double("GUIDE_SLOT_DURATION_S", config.tracker.slot_duration_s);
  config.tracker.energy_target_j = env_double("GUIDE_ENERGY_TARGET_J", config.tracker.energy_target_j);
  config.tracker.poll_interval_s = env_double("GUIDE_POLL_INTERVAL_S", config.tracker.poll_interval_s);
  config.tracker.ema_weight = env_double("GUIDE_EMA_WEIGHT", config.tracker.ema_weight);
  config.tracker.ema_persists_across_slots =
      env_bool("GUIDE_EMA_PERSISTS", config.tracker.ema_persists_across_slots);
  config.meter.base_draw_w = env_double("GUIDE_BASE_DRAW_W", config.meter.base_draw_w);
  config.meter.base_draw_jitter_w =
      env_double("GUIDE_BASE_DRAW_JITTER_W", config.meter.base_draw_jitter_w);
  config.meter.seed = static_cast<std::uint64_t>(env_integer(
      "GUIDE_METER_SEED", static_cast<long long>(config.meter.seed)));
  config.selector.retry_interval_s =
      env_double("GUIDE_RETRY_INTERVAL_S", config.selector.retry_interval_s);
  config.selector.max_retries = static_cast<int>(env_integer("GUIDE_MAX_RETRIES",
                                                             config.selector.max_retries));
  config.seed = static_cast<std::uint64_t>(env_integer("GUIDE_SEED",
                                                       static_cast<long long>(config.seed)));
}

}  // namespace guide

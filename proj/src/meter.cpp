#include "guide/meter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace guide {
namespace {

constexpr double kNsPerSecond = 1e9;

std::int64_t to_ns(double seconds) { return std::llround(seconds * kNsPerSecond); }
double to_seconds(std::int64_t ns) { return static_cast<double>(ns) * 1e-9; }

// Uniform in [0,1) built directly from the generator's top bits, so the draw
// sequence is identical across standard library implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PowerTrace PowerTrace::parse(std::istream& in) {
  PowerTrace trace;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;

    std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("expected 'timestamp_s,power_w'", lineno);
    }
    auto parse_field = [&](std::string text, const char* field) {
      // trim
      std::size_t b = text.find_first_not_of(" \t\r");
      std::size_t e = text.find_last_not_of(" \t\r");
      if (b == std::string::npos) throw ParseError("empty value", lineno, field);
      text = text.substr(b, e - b + 1);
      double out = 0.0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError("not a number: '" + text + "'", lineno, field);
      }
      return out;
    };
    Point point;
    point.timestamp_s = parse_field(line.substr(0, comma), "timestamp_s");
    point.power_w = parse_field(line.substr(comma + 1), "power_w");
    if (!trace.points.empty() && point.timestamp_s <= trace.points.back().timestamp_s) {
      throw ParseError("timestamps must be strictly increasing", lineno, "timestamp_s");
    }
    if (point.power_w < 0.0) {
      throw ParseError("power must be >= 0", lineno, "power_w");
    }
    trace.points.push_back(point);
  }
  return trace;
}

PowerTrace PowerTrace::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file: " + path);
  return parse(in);
}

void PowerTrace::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].power_w < 0.0) throw ValidationError("trace power must be >= 0");
    if (i > 0 && points[i].timestamp_s <= points[i - 1].timestamp_s) {
      throw ValidationError("trace timestamps must be strictly increasing");
    }
  }
}

void SimMeterConfig::validate() const {
  if (base_draw_w < 0.0) throw ValidationError("base_draw_w must be >= 0");
  if (base_draw_jitter_w < 0.0 || base_draw_jitter_w > base_draw_w) {
    throw ValidationError("base_draw_jitter_w must be within [0, base_draw_w]");
  }
}

SimulatedMeter::SimulatedMeter(SimMeterConfig config, std::optional<PowerTrace> trace)
    : config_(config), trace_(std::move(trace)), rng_(config.seed) {
  config_.validate();
  if (trace_) trace_->validate();
}

void SimulatedMeter::schedule_execution(const ScheduledExecution& exec) {
  if (!(exec.duration_s > 0.0)) throw ValidationError("execution duration must be > 0");
  if (exec.energy_j < 0.0) throw ValidationError("execution energy must be >= 0");
  ExecSpan span;
  span.start_ns = to_ns(exec.start_s);
  span.end_ns = span.start_ns + to_ns(exec.duration_s);
  span.energy_j = exec.energy_j;
  span.model_id = exec.model_id;
  if (span.start_ns < last_read_ns_) {
    throw SchedulingError("execution of '" + exec.model_id +
                          "' starts before the last meter read; its energy would be lost");
  }
  // Executions never overlap, so the list stays sorted by start (and end) and
  // only the two neighbors of the insertion point can conflict.
  auto pos = std::upper_bound(
      executions_.begin(), executions_.end(), span,
      [](const ExecSpan& a, const ExecSpan& b) { return a.start_ns < b.start_ns; });
  if (pos != executions_.begin()) {
    const ExecSpan& before = *(pos - 1);
    if (span.start_ns < before.end_ns) {
      throw SchedulingError("execution of '" + exec.model_id + "' overlaps '" + before.model_id +
                            "' on the single simulated GPU");
    }
  }
  if (pos != executions_.end() && pos->start_ns < span.end_ns) {
    throw SchedulingError("execution of '" + exec.model_id + "' overlaps '" + pos->model_id +
                          "' on the single simulated GPU");
  }
  executions_.insert(pos, std::move(span));
}

EnergySample SimulatedMeter::read_energy_delta(double now_s) {
  const std::int64_t now_ns = to_ns(now_s);
  if (now_ns < last_read_ns_) {
    throw TimeRegressionError("meter read at " + std::to_string(now_s) +
                              " s precedes previous read at " +
                              std::to_string(to_seconds(last_read_ns_)) + " s");
  }
  // Reads are monotone, so executions that ended before this window stay dead.
  while (read_cursor_ < executions_.size() &&
         executions_[read_cursor_].end_ns <= last_read_ns_) {
    ++read_cursor_;
  }
  EnergySample sample;
  sample.interval_s = to_seconds(now_ns - last_read_ns_);
  sample.energy_delta_j = integrate_ns(last_read_ns_, now_ns, read_cursor_);
  if (config_.base_draw_jitter_w > 0.0 && now_ns > last_read_ns_) {
    const double jitter_w = (2.0 * uniform01(rng_) - 1.0) * config_.base_draw_jitter_w;
    sample.energy_delta_j += jitter_w * sample.interval_s;
  }
  last_read_ns_ = now_ns;
  realized_total_j_ += sample.energy_delta_j;
  return sample;
}

double SimulatedMeter::integrate_ns(std::int64_t from_ns, std::int64_t until_ns,
                                    std::size_t first_exec) const {
  if (until_ns <= from_ns) return 0.0;
  const double dt_s = to_seconds(until_ns - from_ns);
  double energy = config_.base_draw_w * dt_s;
  for (std::size_t i = first_exec; i < executions_.size(); ++i) {
    const ExecSpan& exec = executions_[i];
    if (exec.start_ns >= until_ns) break;
    const std::int64_t lo = std::max(exec.start_ns, from_ns);
    const std::int64_t hi = std::min(exec.end_ns, until_ns);
    if (hi > lo) {
      const double fraction =
          static_cast<double>(hi - lo) / static_cast<double>(exec.end_ns - exec.start_ns);
      energy += exec.energy_j * fraction;
    }
  }
  if (trace_) energy += trace_integral_ns(from_ns, until_ns);
  return energy;
}

double SimulatedMeter::trace_integral_ns(std::int64_t from_ns, std::int64_t until_ns) const {
  const auto& points = trace_->points;
  if (points.empty() || until_ns <= from_ns) return 0.0;
  double energy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::int64_t seg_start = to_ns(points[i].timestamp_s);
    const std::int64_t seg_end =
        (i + 1 < points.size()) ? to_ns(points[i + 1].timestamp_s) : until_ns;
    if (seg_start >= until_ns) break;
    const std::int64_t lo = std::max(seg_start, from_ns);
    const std::int64_t hi = std::min(seg_end, until_ns);
    if (hi > lo) energy += points[i].power_w * to_seconds(hi - lo);
  }
  return energy;
}

double SimulatedMeter::analytic_total_energy(double upto_s) const {
  return integrate_ns(0, to_ns(upto_s));
}

double SimulatedMeter::last_read_time_s() const { return to_seconds(last_read_ns_); }

}  // namespace guide

#include "guide/registry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace guide {
namespace {

struct Token {
  std::string key;
  std::string value;
};

// Splits one record line into key=value tokens. Values containing spaces are
// double-quoted; quotes carry no escape sequences.
std::vector<Token> tokenize_line(const std::string& line, int lineno) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t eq = line.find('=', i);
    if (eq == std::string::npos || eq == i) {
      throw ParseError("expected key=value token, got '" + line.substr(i) + "'", lineno);
    }
    Token tok;
    tok.key = line.substr(i, eq - i);
    i = eq + 1;
    if (i < line.size() && line[i] == '"') {
      std::size_t close = line.find('"', i + 1);
      if (close == std::string::npos) {
        throw ParseError("unterminated quoted value", lineno, tok.key);
      }
      tok.value = line.substr(i + 1, close - i - 1);
      i = close + 1;
    } else {
      std::size_t end = i;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      tok.value = line.substr(i, end - i);
      i = end;
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

double parse_double(const std::string& value, int lineno, const std::string& field) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("not a number: '" + value + "'", lineno, field);
  }
  return out;
}

long long parse_integer(const std::string& value, int lineno, const std::string& field) {
  long long out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("not an integer: '" + value + "'", lineno, field);
  }
  return out;
}

bool parse_bool(const std::string& value, int lineno, const std::string& field) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ParseError("expected true or false, got '" + value + "'", lineno, field);
}

void validate_profile(const ModelProfile& profile, int lineno) {
  auto fail = [&](const std::string& field, const std::string& message) {
    throw ParseError(message, lineno, field);
  };
  if (profile.id.empty()) fail("id", "must be non-empty");
  if (profile.task.empty()) fail("task", "must be non-empty");
  if (!(profile.energy_avg_j > 0.0)) fail("energy_avg_j", "must be > 0");
  if (!(profile.latency_avg_s > 0.0)) fail("latency_s", "must be > 0");
  if (profile.accuracy < 0.0 || profile.accuracy > 1.0) fail("accuracy", "must be within [0,1]");
  if (profile.likes < 0) fail("likes", "must be >= 0");
  if (profile.lifecycle_energy_j && *profile.lifecycle_energy_j < 0.0) {
    fail("lifecycle_energy_j", "must be >= 0");
  }
}

}  // namespace

ModelRegistry::ModelRegistry(std::vector<ModelProfile> models) : models_(std::move(models)) {
  std::unordered_set<std::string_view> ids;
  for (const auto& m : models_) {
    validate_profile(m, -1);
    if (!ids.insert(m.id).second) {
      throw ValidationError("duplicate model id '" + m.id + "'");
    }
  }
}

ModelRegistry ModelRegistry::load(std::istream& in) {
  std::vector<ModelProfile> models;
  std::unordered_map<std::string, int> seen;  // id -> first line
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;

    ModelProfile profile;
    std::unordered_set<std::string> present;
    for (const auto& tok : tokenize_line(line, lineno)) {
      if (!present.insert(tok.key).second) {
        throw ParseError("duplicate field", lineno, tok.key);
      }
      if (tok.key == "id") {
        profile.id = tok.value;
      } else if (tok.key == "task") {
        profile.task = tok.value;
      } else if (tok.key == "energy_avg_j") {
        profile.energy_avg_j = parse_double(tok.value, lineno, tok.key);
      } else if (tok.key == "accuracy") {
        profile.accuracy = parse_double(tok.value, lineno, tok.key);
      } else if (tok.key == "latency_s") {
        profile.latency_avg_s = parse_double(tok.value, lineno, tok.key);
      } else if (tok.key == "likes") {
        profile.likes = parse_integer(tok.value, lineno, tok.key);
      } else if (tok.key == "description") {
        profile.description = tok.value;
      } else if (tok.key == "lifecycle_energy_j") {
        profile.lifecycle_energy_j = parse_double(tok.value, lineno, tok.key);
      } else if (tok.key == "unprofiled") {
        profile.unprofiled = parse_bool(tok.value, lineno, tok.key);
      } else {
        throw ParseError("unknown field", lineno, tok.key);
      }
    }
    for (const char* required : {"id", "task", "energy_avg_j", "accuracy", "latency_s"}) {
      if (!present.count(required)) {
        throw ParseError("missing required field", lineno, required);
      }
    }
    validate_profile(profile, lineno);
    auto [it, inserted] = seen.emplace(profile.id, lineno);
    if (!inserted) {
      throw ParseError(
          "duplicate model id '" + profile.id + "' (first seen on line " +
              std::to_string(it->second) + ")",
          lineno, "id");
    }
    models.push_back(std::move(profile));
  }
  ModelRegistry registry;
  registry.models_ = std::move(models);
  return registry;
}

ModelRegistry ModelRegistry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open registry file: " + path);
  }
  try {
    return load(in);
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " [" + path + "]");
  }
}

const ModelProfile* ModelRegistry::find(std::string_view id) const {
  for (const auto& m : models_) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

std::vector<ModelProfile> ModelRegistry::by_task(const TaskType& task) const {
  std::vector<ModelProfile> out;
  for (const auto& m : models_) {
    if (m.task == task) out.push_back(m);
  }
  return out;
}

std::vector<ModelProfile> ModelRegistry::profiled_by_task(const TaskType& task) const {
  std::vector<ModelProfile> out;
  for (const auto& m : models_) {
    if (m.task == task && !m.unprofiled) out.push_back(m);
  }
  return out;
}

std::vector<TaskType> ModelRegistry::task_vocabulary() const {
  std::vector<TaskType> out;
  for (const auto& m : models_) {
    if (std::find(out.begin(), out.end(), m.task) == out.end()) out.push_back(m.task);
  }
  return out;
}

std::vector<ModelProfile> pareto_frontier(std::vector<ModelProfile> models) {
  if (models.empty()) return models;
  for (const auto& m : models) {
    if (m.task != models.front().task) {
      throw ValidationError("pareto_frontier requires a single-task candidate set (got '" +
                            models.front().task + "' and '" + m.task + "')");
    }
  }

  // Sweep in ascending energy order. A model is dominated iff some model with
  // strictly lower energy has strictly higher accuracy, so within an
  // equal-energy group only accuracies seen in earlier groups can dominate.
  std::sort(models.begin(), models.end(), [](const ModelProfile& a, const ModelProfile& b) {
    if (a.energy_avg_j != b.energy_avg_j) return a.energy_avg_j < b.energy_avg_j;
    return a.id < b.id;
  });

  std::vector<ModelProfile> frontier;
  double best_acc_before_group = -1.0;
  std::size_t i = 0;
  while (i < models.size()) {
    std::size_t j = i;
    double group_max_acc = -1.0;
    while (j < models.size() && models[j].energy_avg_j == models[i].energy_avg_j) {
      // Dominance needs strictly higher accuracy at strictly lower energy, so
      // a model that merely ties the best cheaper accuracy survives.
      if (models[j].accuracy >= best_acc_before_group) frontier.push_back(models[j]);
      group_max_acc = std::max(group_max_acc, models[j].accuracy);
      ++j;
    }
    best_acc_before_group = std::max(best_acc_before_group, group_max_acc);
    i = j;
  }
  return frontier;
}

}  // namespace guide

// guide: command-line surface over the registry, selector, and simulation
// harness. Data goes to stdout or --out files; diagnostics go to stderr.
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "guide/config.hpp"
#include "guide/sim.hpp"

namespace {

constexpr const char* kDefaultRegistry = "data/models.registry";
constexpr const char* kDefaultDistributions = "data/selection_distributions.json";

// Exit codes: 1 bad input/config, 2 unknown task, 3 budget starvation, 4 I/O.
int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const guide::UnknownTaskError*>(&e)) return 2;
  if (dynamic_cast<const guide::BudgetStarvationError*>(&e)) return 3;
  if (dynamic_cast<const guide::ParseError*>(&e) ||
      dynamic_cast<const guide::ValidationError*>(&e) ||
      dynamic_cast<const guide::ConfigError*>(&e)) {
    return 1;
  }
  if (dynamic_cast<const guide::Error*>(&e)) return 4;
  return 10;
}

// Task labels are case-sensitive in the registry; the CLI is forgiving and
// maps e.g. "icapt" onto the unique vocabulary entry it matches.
std::string canonical_task(const guide::ModelRegistry& registry, const std::string& requested) {
  auto lower = [](std::string text) {
    for (char& ch : text) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return text;
  };
  const std::string wanted = lower(requested);
  std::string match;
  int hits = 0;
  for (const auto& task : registry.task_vocabulary()) {
    if (task == requested) return requested;
    if (lower(task) == wanted) {
      match = task;
      ++hits;
    }
  }
  return hits == 1 ? match : requested;
}

std::string format_target(double target_j) {
  if (target_j == std::floor(target_j) && target_j < 1e9) {
    return std::to_string(static_cast<long long>(target_j));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", target_j);
  return buf;
}

guide::Policy make_policy(const std::string& name, const guide::AppConfig& config,
                          const std::string& distributions_path) {
  if (name == "guide") {
    return guide::Policy::guide(config.selector,
                                "guide-" + format_target(config.tracker.energy_target_j));
  }
  if (name == "popularity") return guide::Policy::popularity();
  if (name == "nameonly" || name == "name-only") {
    return guide::Policy::name_only(guide::load_distribution(distributions_path, "name-only"));
  }
  if (name == "jarvis") {
    return guide::Policy::name_only(guide::load_distribution(distributions_path, "jarvis"),
                                    "jarvis");
  }
  if (name.rfind("fixed:", 0) == 0) {
    return guide::Policy::fixed(name.substr(6));
  }
  throw guide::ConfigError("unknown policy '" + name +
                           "' (expected guide, popularity, nameonly, jarvis, or fixed:<model>)");
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw guide::Error("cannot write output file: " + out_path);
  out << text;
}

void emit_plot_data(const guide::SimulationReport& report, const std::string& base) {
  {
    std::ofstream out(base + "_slot_energy.tsv");
    if (!out) throw guide::Error("cannot write plot file: " + base + "_slot_energy.tsv");
    out << "# slot_index\tenergy_j\ttarget_j\n";
    for (std::size_t i = 0; i < report.per_slot_energy_j.size(); ++i) {
      out << i << "\t" << report.per_slot_energy_j[i] << "\t" << report.tracker.energy_target_j
          << "\n";
    }
  }
  {
    std::ofstream out(base + "_acc_per_joule.tsv");
    if (!out) throw guide::Error("cannot write plot file: " + base + "_acc_per_joule.tsv");
    out << "# task\tpolicy\tacc_per_joule_pct\n";
    for (const auto& [task, stats] : report.per_task) {
      out << task << "\t" << report.policy_name << "\t" << stats.acc_per_joule * 100.0 << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guide: energy-aware, data-driven model selection over profiled model registries"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "JSON config file (see data/default_config.json)");
  auto* seed_opt = app.add_option("--seed", seed, "simulation seed");
  app.add_option("--out", out_path, "write machine-readable output to this file");

  // validate
  auto* cmd_validate = app.add_subcommand("validate", "validate a registry file");
  cmd_validate->fallthrough();
  std::string validate_path;
  cmd_validate->add_option("registry", validate_path, "registry file")->required();

  // frontier
  auto* cmd_frontier = app.add_subcommand("frontier", "print the Pareto frontier for a task");
  cmd_frontier->fallthrough();
  std::string frontier_registry = kDefaultRegistry;
  std::string frontier_task;
  cmd_frontier->add_option("--registry", frontier_registry, "registry file");
  cmd_frontier->add_option("--task", frontier_task, "task type")->required();

  // select
  auto* cmd_select = app.add_subcommand("select", "run one budget-constrained selection");
  cmd_select->fallthrough();
  std::string select_registry = kDefaultRegistry;
  std::string select_task;
  double select_budget_j = 0.0;
  int select_max_retries = -1;
  cmd_select->add_option("--registry", select_registry, "registry file");
  cmd_select->add_option("--task", select_task, "task type")->required();
  cmd_select->add_option("--budget-j", select_budget_j, "usable energy budget in joules")
      ->required();
  cmd_select->add_option("--max-retries", select_max_retries, "retry bound before starvation");

  // simulate
  auto* cmd_simulate = app.add_subcommand("simulate", "replay a workload under one policy");
  cmd_simulate->fallthrough();
  std::string sim_registry = kDefaultRegistry;
  std::string sim_policy = "guide";
  std::string sim_workload_path;
  std::string sim_task_mix;
  std::string sim_distributions = kDefaultDistributions;
  std::string sim_trace_path;
  std::string sim_plot_base;
  int sim_requests = 100;
  double sim_interval_s = 2.0;
  double sim_start_s = 0.5;
  double sim_target_j = -1.0;
  cmd_simulate->add_option("--registry", sim_registry, "registry file");
  cmd_simulate->add_option("--policy", sim_policy,
                           "guide | popularity | nameonly | jarvis | fixed:<model>");
  cmd_simulate->add_option("--target-j", sim_target_j, "per-slot energy target in joules");
  auto* workload_opt =
      cmd_simulate->add_option("--workload", sim_workload_path, "workload file to replay");
  cmd_simulate->add_option("--task-mix", sim_task_mix, "generate a single-task workload")
      ->excludes(workload_opt);
  cmd_simulate->add_option("--requests", sim_requests, "generated workload size")
      ->check(CLI::PositiveNumber);
  cmd_simulate->add_option("--interval-s", sim_interval_s, "generated inter-arrival gap");
  cmd_simulate->add_option("--start-s", sim_start_s,
                           "first generated arrival; the 0.5 default lands mid-slot");
  cmd_simulate->add_option("--distributions", sim_distributions,
                           "selection distributions file for nameonly/jarvis");
  cmd_simulate->add_option("--trace", sim_trace_path, "extra power trace replayed on the meter");
  cmd_simulate->add_option("--emit-plot-data", sim_plot_base,
                           "write <base>_slot_energy.tsv and <base>_acc_per_joule.tsv");

  // compare
  auto* cmd_compare = app.add_subcommand("compare", "tabulate reports that share a workload");
  cmd_compare->fallthrough();
  std::vector<std::string> compare_paths;
  cmd_compare->add_option("reports", compare_paths, "report JSON files")->required();

  CLI11_PARSE(app, argc, argv);
  seed_given = seed_opt->count() > 0;

  try {
    guide::AppConfig config;
    if (!config_path.empty()) config = guide::load_app_config(config_path);
    guide::apply_env_overrides(config);
    if (seed_given) config.seed = seed;

    if (*cmd_validate) {
      auto registry = guide::ModelRegistry::load_file(validate_path);
      std::cout << "ok: " << registry.size() << " models, "
                << registry.task_vocabulary().size() << " tasks\n";
      return 0;
    }

    if (*cmd_frontier) {
      auto registry = guide::ModelRegistry::load_file(frontier_registry);
      const std::string task = canonical_task(registry, frontier_task);
      auto candidates = registry.profiled_by_task(task);
      if (candidates.empty()) {
        throw guide::UnknownTaskError("no profiled model for task '" + task + "'");
      }
      auto frontier = guide::pareto_frontier(candidates);
      std::cout << "id                    accuracy  energy_avg_j\n";
      for (const auto& m : frontier) {
        char row[128];
        std::snprintf(row, sizeof row, "%-20s %9.3f %13.2f\n", m.id.c_str(), m.accuracy,
                      m.energy_avg_j);
        std::cout << row;
      }
      return 0;
    }

    if (*cmd_select) {
      auto registry = guide::ModelRegistry::load_file(select_registry);
      guide::SelectorConfig selector = config.selector;
      if (select_max_retries >= 0) selector.max_retries = select_max_retries;
      guide::FixedBudgetSource source(select_budget_j);
      auto decision =
          guide::select(canonical_task(registry, select_task), registry, source, selector);
      std::cout << "chosen: " << decision.chosen << "\n"
                << "budget_j: " << decision.budget_at_decision_j << "\n"
                << "retries: " << decision.retries << "\n";
      auto print_ids = [](const char* label, const std::vector<std::string>& ids) {
        std::cout << label << ":";
        for (const auto& id : ids) std::cout << " " << id;
        std::cout << "\n";
      };
      print_ids("candidates_task", decision.candidates_task);
      print_ids("candidates_budget", decision.candidates_budget);
      print_ids("pareto_subset", decision.pareto_subset);
      return 0;
    }

    if (*cmd_simulate) {
      auto registry = guide::ModelRegistry::load_file(sim_registry);
      if (sim_target_j > 0.0) config.tracker.energy_target_j = sim_target_j;
      config.validate();

      std::vector<guide::WorkloadRequest> workload;
      if (!sim_workload_path.empty()) {
        workload = guide::load_workload_file(sim_workload_path);
      } else if (!sim_task_mix.empty()) {
        workload = guide::make_uniform_workload(canonical_task(registry, sim_task_mix),
                                                sim_requests, sim_interval_s, sim_start_s);
      } else {
        throw guide::ConfigError("simulate needs --workload or --task-mix");
      }

      auto policy = make_policy(sim_policy, config, sim_distributions);
      std::optional<guide::PowerTrace> trace;
      if (!sim_trace_path.empty()) trace = guide::PowerTrace::load_file(sim_trace_path);
      auto report = guide::run_simulation(registry, workload, policy, config.tracker,
                                          config.meter, config.seed, std::move(trace));

      write_or_print(report.to_json().dump(2) + "\n", out_path);
      if (!out_path.empty()) std::cout << report.to_table();
      if (!sim_plot_base.empty()) emit_plot_data(report, sim_plot_base);
      return 0;
    }

    if (*cmd_compare) {
      std::vector<guide::SimulationReport> reports;
      for (const auto& path : compare_paths) {
        std::ifstream in(path);
        if (!in) throw guide::Error("cannot open report file: " + path);
        reports.push_back(guide::SimulationReport::from_json(nlohmann::json::parse(in)));
      }
      auto rows = guide::compare_policies(reports);
      write_or_print(guide::comparison_table(rows), out_path);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}

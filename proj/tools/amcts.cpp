// Command line front end: run experiments, sweeps, the optimality study, and
// scenario generation. All numeric flags override the config file, which in
// turn overrides built-in defaults.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "amcts/environment.hpp"
#include "amcts/experiment.hpp"
#include "amcts/scenario_io.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(text.substr(pos));
      break;
    }
    out.push_back(text.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const std::string& token : split_commas(text)) {
    if (token.empty()) throw std::invalid_argument("empty entry in list: " + text);
    out.push_back(std::stoi(token));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& token : split_commas(text)) {
    if (token.empty()) throw std::invalid_argument("empty entry in list: " + text);
    out.push_back(amcts::parse_double(token));
  }
  return out;
}

// Ordered (key, value) overrides collected from the command line; applied on
// top of the config file through the same key/value channel.
struct Overrides {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> kv;

  amcts::ExperimentConfig build() const {
    amcts::ExperimentConfig config;
    if (!config_path.empty()) amcts::load_config_file(config, config_path);
    for (const auto& [key, value] : kv) amcts::apply_config_kv(config, key, value);
    return config;
  }
};

void add_experiment_flags(CLI::App* cmd, Overrides& over) {
  cmd->add_option("--config", over.config_path, "Key/value config file applied before flags");
  const auto kv = [cmd, &over](const std::string& flag, const std::string& key,
                               const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&over, key](const std::string& value) { over.kv.emplace_back(key, value); },
        desc);
  };
  kv("--name", "name", "Experiment name (default experiment)");
  kv("--scenario", "scenario", "Pinned scenario file; '-' reverts to generated scenarios");
  cmd->add_option_function<std::string>(
         "--out",
         [&over](const std::string& value) { over.kv.emplace_back("out", value); },
         "Output directory (default .)")
      ->envname("AMCTS_OUT_DIR");
  kv("--planners", "planners",
     "Comma list of amcts,dec-mcts,dec-mcts-reset,dec-mcts-global,greedy-mcts,central-mcts "
     "(default amcts,dec-mcts)");
  kv("--iterations", "iterations", "Tree iterations per planning phase (default 500)");
  kv("--gamma", "gamma", "Discount for visit statistics (default 0.9)");
  kv("--cp", "cp", "Exploration constant (default 0.4)");
  kv("--rollout-horizon", "rollout-horizon", "Rollout depth, 0 = full budget (default 0)");
  kv("--components", "components", "Plan sequences exchanged per agent (default 10)");
  kv("--exchange-every", "exchange-every", "Iterations between exchanges (default 50)");
  kv("--rm-rounds", "rm-rounds", "Regret matching rounds per coordination (default 200)");
  kv("--loss-tolerance", "loss-tolerance",
     "Consecutive losses before a peer counts as failed (default 5)");
  kv("--agents", "agents", "Team size (default 20)");
  kv("--budget", "budget", "Actions per agent (default 9)");
  kv("--intensity", "intensity", "Attrition intensity in [0,1] (default 0)");
  kv("--attrition-mode", "attrition-mode", "uniform or forced (default uniform)");
  kv("--forced-step", "forced-step", "Completed actions before forced failures (default 0)");
  kv("--loss-probability", "loss-probability",
     "Per-message communication loss probability (default 0)");
  kv("--repetitions", "repetitions", "Paired repetitions (default 1)");
  kv("--seed", "seed", "Base seed; repetition r uses seed+r (default 1)");
  kv("--max-parallel", "max-parallel", "Worker threads, 0 = hardware (default 0)");
  kv("--regions", "regions", "Generated scenario: region count (default 200)");
  kv("--vertices", "vertices", "Generated scenario: vertex count (default 400)");
  kv("--area", "area", "Generated scenario: square side length (default 4000)");
  kv("--region-radius", "region-radius", "Generated scenario: region radius (default 50)");
  kv("--region-value", "region-value", "Generated scenario: value per region (default 1)");
  kv("--connect-radius", "connect-radius",
     "Generated scenario: edge connection radius (default 1280)");
}

int cmd_run(const Overrides& over) {
  const amcts::ExperimentConfig config = over.build();
  const amcts::ExperimentResult result = amcts::run_experiment(config);
  for (const amcts::MissionSummary& row : result.summary) {
    std::cout << planner_name(row.planner) << ": mean final IRC "
              << amcts::format_double(row.mean_final_irc) << " +/- "
              << amcts::format_double(row.ci95_half_width) << " (" << row.reps << " reps)\n";
  }
  std::cout << "wrote " << result.steps_path << "\n";
  std::cout << "wrote " << result.summary_path << "\n";
  return 0;
}

int cmd_sweep(const Overrides& over, const std::string& axis, const std::string& values) {
  amcts::SweepConfig config;
  config.base = over.build();
  config.axis = amcts::parse_sweep_axis(axis);
  config.values = parse_double_list(values);
  const amcts::SweepResult result = amcts::run_sweep(config);
  std::cout << "wrote " << result.sweep_path << " (" << result.points.size() << " values)\n";
  return 0;
}

struct OptimalityFlags {
  std::string agents = "2,3,4,5,6";
  std::string components = "10";
  std::string actions = "9";
  int games = 40;
  int rm_rounds = 1000;
  std::uint64_t seed = 1;
  std::uint64_t cap = 10'000'000;
  std::string out = ".";
};

int cmd_optimality(const OptimalityFlags& flags) {
  amcts::OptimalityConfig config;
  config.cells = amcts::optimality_cells(parse_int_list(flags.agents),
                                         parse_int_list(flags.components),
                                         parse_int_list(flags.actions));
  config.games_per_cell = flags.games;
  config.rm_rounds = flags.rm_rounds;
  config.base_seed = flags.seed;
  config.exhaustive_cap = flags.cap;
  config.output_dir = flags.out;
  const amcts::OptimalityResult result = amcts::run_optimality_study(config);
  for (const amcts::OptimalityCellResult& cell : result.cells) {
    std::cout << "n=" << cell.cell.n_agents << " m=" << cell.cell.m
              << " actions=" << cell.cell.actions;
    if (cell.skipped) {
      std::cout << ": skipped (exhaustive cap)\n";
    } else {
      std::cout << ": PFO " << amcts::format_double(cell.stats.pfo) << " RNO "
                << amcts::format_double(cell.stats.rno) << "\n";
    }
  }
  std::cout << "wrote " << result.rows_path << "\n";
  std::cout << "wrote " << result.summary_path << "\n";
  return 0;
}

struct ScenarioFlags {
  std::string kind = "roadmap";
  std::string out;
  std::uint64_t seed = 1;
  amcts::RoadmapParams roadmap;
  int rows = 0;
  int cols = 0;
  std::vector<std::string> rewards;
  std::vector<std::string> starts;
};

int cmd_scenario_gen(const ScenarioFlags& flags) {
  amcts::Scenario scenario;
  if (flags.kind == "roadmap") {
    amcts::RoadmapParams params = flags.roadmap;
    params.seed = flags.seed;
    scenario = amcts::generate_roadmap_scenario(params);
  } else if (flags.kind == "grid") {
    amcts::GridParams params;
    params.rows = flags.rows;
    params.cols = flags.cols;
    for (const std::string& entry : flags.rewards) {
      const std::vector<std::string> parts = split_commas(entry);
      if (parts.size() != 3)
        throw std::invalid_argument("--reward expects row,col,value: " + entry);
      params.rewards[{std::stoi(parts[0]), std::stoi(parts[1])}] = amcts::parse_double(parts[2]);
    }
    for (const std::string& entry : flags.starts) {
      const std::vector<std::string> parts = split_commas(entry);
      if (parts.size() != 2) throw std::invalid_argument("--start expects row,col: " + entry);
      params.starts.emplace_back(std::stoi(parts[0]), std::stoi(parts[1]));
    }
    scenario = amcts::generate_grid_scenario(params);
  } else {
    throw std::invalid_argument("unknown scenario kind: " + flags.kind);
  }
  amcts::save_scenario(scenario, std::filesystem::path(flags.out));
  std::cout << "wrote " << flags.out << " (" << scenario.graph().vertices.size() << " vertices, "
            << scenario.graph().edges.size() << " edges, " << scenario.region_count()
            << " regions)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized coverage planning under attrition"};
  app.require_subcommand(1);

  Overrides run_over;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment and write metrics");
  add_experiment_flags(run_cmd, run_over);

  Overrides sweep_over;
  std::string sweep_axis;
  std::string sweep_values;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per axis value");
  add_experiment_flags(sweep_cmd, sweep_over);
  sweep_cmd
      ->add_option("--axis", sweep_axis,
                   "failure-intensity, planning-iterations, exchanged-components, "
                   "actions-budget, agent-count, region-count, comm-loss-probability, "
                   "loss-tolerance, or forced-failure-step")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma list of axis values")->required();

  OptimalityFlags opt_flags;
  CLI::App* opt_cmd =
      app.add_subcommand("optimality", "Coordination vs exhaustive optimum study");
  opt_cmd->add_option("--agents", opt_flags.agents, "Comma list of team sizes (default 2,3,4,5,6)");
  opt_cmd->add_option("--components", opt_flags.components,
                      "Comma list of actions per player (default 10)");
  opt_cmd->add_option("--actions", opt_flags.actions,
                      "Comma list of sequence lengths (default 9)");
  opt_cmd->add_option("--games", opt_flags.games, "Games per cell (default 40)");
  opt_cmd->add_option("--rm-rounds", opt_flags.rm_rounds,
                      "Regret matching rounds per game (default 1000)");
  opt_cmd->add_option("--seed", opt_flags.seed, "Base seed (default 1)");
  opt_cmd->add_option("--cap", opt_flags.cap, "Exhaustive enumeration cap (default 10000000)");
  opt_cmd->add_option("--out", opt_flags.out, "Output directory (default .)")
      ->envname("AMCTS_OUT_DIR");

  ScenarioFlags scen_flags;
  CLI::App* scen_cmd = app.add_subcommand("scenario", "Scenario file utilities");
  scen_cmd->require_subcommand(1);
  CLI::App* gen_cmd = scen_cmd->add_subcommand("gen", "Generate and save a scenario");
  gen_cmd->add_option("--kind", scen_flags.kind, "roadmap or grid (default roadmap)");
  gen_cmd->add_option("--out", scen_flags.out, "Scenario file to write")->required();
  gen_cmd->add_option("--seed", scen_flags.seed, "Generation seed (default 1)");
  gen_cmd->add_option("--regions", scen_flags.roadmap.n_regions, "Roadmap: regions (default 200)");
  gen_cmd->add_option("--vertices", scen_flags.roadmap.n_vertices,
                      "Roadmap: vertices (default 400)");
  gen_cmd->add_option("--area", scen_flags.roadmap.area_side, "Roadmap: side length (default 4000)");
  gen_cmd->add_option("--region-radius", scen_flags.roadmap.region_radius,
                      "Roadmap: region radius (default 50)");
  gen_cmd->add_option("--region-value", scen_flags.roadmap.region_value,
                      "Roadmap: value per region (default 1)");
  gen_cmd->add_option("--connect-radius", scen_flags.roadmap.connect_radius,
                      "Roadmap: connection radius (default 1280)");
  gen_cmd->add_option("--rows", scen_flags.rows, "Grid: rows");
  gen_cmd->add_option("--cols", scen_flags.cols, "Grid: columns");
  gen_cmd->add_option("--reward", scen_flags.rewards, "Grid: row,col,value (repeatable)");
  gen_cmd->add_option("--start", scen_flags.starts, "Grid: row,col start cell (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_over);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_over, sweep_axis, sweep_values);
    if (opt_cmd->parsed()) return cmd_optimality(opt_flags);
    if (scen_cmd->parsed() && gen_cmd->parsed()) return cmd_scenario_gen(scen_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

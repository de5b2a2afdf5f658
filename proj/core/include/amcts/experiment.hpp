#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "amcts/environment.hpp"
#include "amcts/planners.hpp"
#include "amcts/search_tree.hpp"
#include "amcts/simulation.hpp"

namespace amcts {

// A full experiment: every planner kind runs the same per-repetition
// scenario, attrition schedule and communication pattern (paired comparison).
struct ExperimentConfig {
  std::string name = "experiment";

  // If scenario_file is nonempty the pinned scenario is shared by all
  // repetitions; otherwise a fresh roadmap is generated per repetition,
  // seeded by that repetition's seed.
  std::string scenario_file;
  RoadmapParams roadmap;

  std::vector<PlannerKind> planners{PlannerKind::AMcts, PlannerKind::DecMcts};
  DuctParams duct;
  int plan_components = 10;
  int exchange_every = 50;
  int rm_rounds = 200;
  int loss_tolerance = 5;

  int n_agents = 20;
  int budget = 9;
  double attrition_intensity = 0.0;
  AttritionMode attrition_mode = AttritionMode::UniformRandom;
  int forced_step = 0;
  double loss_probability = 0.0;

  int repetitions = 1;
  std::uint64_t base_seed = 1;
  std::string output_dir = ".";
  int max_parallel = 0;  // 0 = hardware concurrency

  // Empty when the config is usable; otherwise one message per bad field.
  std::vector<std::string> validate() const;
};

struct MissionSummary {
  PlannerKind planner = PlannerKind::AMcts;
  int reps = 0;
  double mean_final_irc = 0.0;
  double ci95_half_width = 0.0;
};

struct ExperimentResult {
  std::vector<MetricsLog> missions;  // repetition-major, then planner order
  std::vector<MissionSummary> summary;
  std::string steps_path;
  std::string summary_path;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Key/value config file support: one "key value" pair per line, '#' comments.
// Keys match the CLI flag names. Unknown keys are an error.
void apply_config_kv(ExperimentConfig& config, const std::string& key,
                     const std::string& value);
void load_config_file(ExperimentConfig& config, const std::string& path);

enum class SweepAxis {
  FailureIntensity,
  PlanningIterations,
  ExchangedComponents,
  ActionsBudget,
  AgentCount,
  RegionCount,
  CommLossProbability,
  LossTolerance,
  ForcedFailureStep,
};

std::string sweep_axis_name(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepConfig {
  ExperimentConfig base;
  SweepAxis axis = SweepAxis::FailureIntensity;
  std::vector<double> values;

  std::vector<std::string> validate() const;
};

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::string sweep_path;
};

SweepResult run_sweep(const SweepConfig& config);

// Optimality study: seeded coverage games solved by the regret-matching
// coordination path (N parallel instances, payoff-dominant pick) and compared
// against the exhaustive optimum.
struct OptimalityCell {
  int n_agents = 6;
  int m = 10;
  int actions = 9;  // edges per candidate sequence
};

struct OptimalityConfig {
  std::vector<OptimalityCell> cells;
  int games_per_cell = 40;
  int rm_rounds = 1000;
  std::uint64_t base_seed = 1;
  std::string output_dir = ".";
  std::uint64_t exhaustive_cap = 10'000'000;

  // Arena the per-game scenarios are drawn from (seed field ignored).
  RoadmapParams arena;

  OptimalityConfig();
  std::vector<std::string> validate() const;
};

struct OptimalityGameRow {
  std::uint64_t seed = 0;
  int n_agents = 0;
  int m = 0;
  int actions = 0;
  double achieved = 0.0;
  double optimal = 0.0;
  bool psne = false;
};

struct OptimalityCellResult {
  OptimalityCell cell;
  bool skipped = false;  // profile space exceeded the exhaustive cap
  PfoRno stats;
  std::vector<OptimalityGameRow> rows;
};

struct OptimalityResult {
  std::vector<OptimalityCellResult> cells;
  std::string rows_path;
  std::string summary_path;
};

OptimalityResult run_optimality_study(const OptimalityConfig& config);

// Cross product of the axis lists, nested as (agent count, m, actions).
std::vector<OptimalityCell> optimality_cells(const std::vector<int>& n_agents,
                                             const std::vector<int>& m_values,
                                             const std::vector<int>& action_values);

}  // namespace amcts

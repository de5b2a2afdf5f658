#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"

#include "amcts/experiment.hpp"
#include "amcts/scenario_io.hpp"

using namespace amcts;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "amcts_experiment_test" / leaf;
  fs::remove_all(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

// Two agents, two steps, a handful of regions: fast enough to rerun freely.
ExperimentConfig tiny_config(const std::string& out_leaf) {
  ExperimentConfig config;
  config.name = "tiny";
  config.planners = {PlannerKind::AMcts, PlannerKind::DecMcts};
  config.duct.gamma = 0.9;
  config.duct.c_p = 0.3;
  config.duct.iterations_per_phase = 30;
  config.plan_components = 3;
  config.exchange_every = 15;
  config.rm_rounds = 30;
  config.loss_tolerance = 3;
  config.n_agents = 2;
  config.budget = 2;
  config.repetitions = 2;
  config.base_seed = 5;
  config.output_dir = fresh_dir(out_leaf).string();
  config.max_parallel = 1;
  config.roadmap.area_side = 400.0;
  config.roadmap.n_regions = 6;
  config.roadmap.region_radius = 60.0;
  config.roadmap.n_vertices = 12;
  config.roadmap.connect_radius = 220.0;
  return config;
}

Scenario mechanics_grid() {
  GridParams params;
  params.rows = 3;
  params.cols = 2;
  params.rewards = {{{0, 1}, 3.0}, {{2, 0}, 7.0}, {{2, 1}, 3.0}};
  params.starts = {{0, 0}, {2, 0}};
  return generate_grid_scenario(params);
}

}  // namespace

TEST_CASE("experiment validation names every offending field") {
  ExperimentConfig config = tiny_config("validate");
  CHECK(config.validate().empty());

  config.planners = {};
  config.repetitions = 0;
  config.duct.gamma = 1.5;
  auto bad = config.validate();
  REQUIRE(bad.size() == 3);
  CHECK(bad[0].find("planners") != std::string::npos);
  CHECK(bad[1].find("repetitions") != std::string::npos);
  CHECK(bad[2].find("gamma") != std::string::npos);

  config = tiny_config("validate");
  config.planners = {PlannerKind::AMcts, PlannerKind::AMcts};
  bad = config.validate();
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("duplicate") != std::string::npos);

  config = tiny_config("validate");
  config.attrition_mode = AttritionMode::ForcedAfter;
  config.forced_step = config.budget + 1;
  bad = config.validate();
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("forced-step") != std::string::npos);

  // The forced-step range only applies in forced mode.
  config.attrition_mode = AttritionMode::UniformRandom;
  CHECK(config.validate().empty());

  config = tiny_config("validate");
  config.roadmap.n_vertices = 1;  // fewer vertices than agents
  CHECK(config.validate().size() == 2);

  // A pinned scenario makes the roadmap knobs irrelevant.
  config.scenario_file = "whatever.scn";
  CHECK(config.validate().empty());

  config = tiny_config("validate");
  config.attrition_intensity = -0.5;
  config.loss_probability = 1.5;
  config.max_parallel = -1;
  CHECK(config.validate().size() == 3);

  ExperimentConfig invalid = tiny_config("validate");
  invalid.repetitions = 0;
  CHECK_THROWS_AS(run_experiment(invalid), std::invalid_argument);
}

TEST_CASE("an experiment writes one mission per repetition and planner") {
  ExperimentConfig config = tiny_config("basic");
  const ExperimentResult result = run_experiment(config);

  // Repetition-major, planner order inside each repetition.
  REQUIRE(result.missions.size() == 4);
  CHECK(result.missions[0].planner == PlannerKind::AMcts);
  CHECK(result.missions[1].planner == PlannerKind::DecMcts);
  CHECK(result.missions[2].planner == PlannerKind::AMcts);
  CHECK(result.missions[3].planner == PlannerKind::DecMcts);
  CHECK(result.missions[0].seed == 5);
  CHECK(result.missions[1].seed == 5);  // paired: same seed as the rival
  CHECK(result.missions[2].seed == 6);
  CHECK(result.missions[3].seed == 6);
  for (const MetricsLog& log : result.missions) CHECK(log.steps.size() == 2);

  REQUIRE(result.summary.size() == 2);
  CHECK(result.summary[0].planner == PlannerKind::AMcts);
  CHECK(result.summary[1].planner == PlannerKind::DecMcts);
  CHECK(result.summary[0].reps == 2);
  const double expected_mean =
      (result.missions[0].final_irc + result.missions[2].final_irc) / 2.0;
  CHECK(result.summary[0].mean_final_irc == doctest::Approx(expected_mean));

  const std::string steps = read_file(result.steps_path);
  CHECK(steps.rfind("# amcts-steps 1\nseed,planner,intensity,step,irc\n", 0) == 0);
  // Header, column names, then (2 steps + 1 final) for each of 4 missions.
  CHECK(line_count(steps) == 2 + 4 * 3);
  CHECK(steps.find("5,amcts,0,1,") != std::string::npos);
  CHECK(steps.find("5,amcts,0,final,") != std::string::npos);

  const std::string summary = read_file(result.summary_path);
  CHECK(summary.rfind("# amcts-summary 1\nplanner,reps,mean_final_irc,ci95_half_width\n", 0) ==
        0);
  CHECK(line_count(summary) == 2 + 2);
  CHECK(summary.find("amcts,2,") != std::string::npos);
  CHECK(summary.find("dec-mcts,2,") != std::string::npos);

  const std::string echo = read_file(fs::path(config.output_dir) / "config_echo.txt");
  CHECK(echo.find("name tiny\n") != std::string::npos);
  CHECK(echo.find("scenario -\n") != std::string::npos);
  CHECK(echo.find("agents 2\n") != std::string::npos);
  CHECK(echo.find("vertices 12\n") != std::string::npos);  // generated-roadmap knobs
}

TEST_CASE("a two-sample confidence interval matches the t-distribution constant") {
  ExperimentConfig config = tiny_config("ci");
  config.planners = {PlannerKind::AMcts};
  const ExperimentResult result = run_experiment(config);
  REQUIRE(result.missions.size() == 2);
  const double a = result.missions[0].final_irc;
  const double b = result.missions[1].final_irc;
  REQUIRE(a != b);  // distinct per-repetition scenarios
  // For n = 2 the half width collapses to t(0.975; 1 dof) * |a - b| / 2.
  CHECK(result.summary[0].ci95_half_width ==
        doctest::Approx(12.706204736174698 * std::abs(a - b) / 2.0).epsilon(1e-12));

  config.repetitions = 1;
  config.output_dir = fresh_dir("ci_single").string();
  const ExperimentResult single = run_experiment(config);
  CHECK(single.summary[0].reps == 1);
  CHECK(single.summary[0].ci95_half_width == 0.0);
}

TEST_CASE("reruns of one configuration are byte-identical") {
  ExperimentConfig config = tiny_config("replay_a");
  config.attrition_intensity = 0.5;
  config.loss_probability = 0.25;
  const std::string dir_a = config.output_dir;
  const ExperimentResult first = run_experiment(config);

  config.output_dir = fresh_dir("replay_b").string();
  const ExperimentResult second = run_experiment(config);

  CHECK(read_file(first.steps_path) == read_file(second.steps_path));
  CHECK(read_file(first.summary_path) == read_file(second.summary_path));

  // Worker count shapes scheduling, never results or their echo.
  config.output_dir = fresh_dir("replay_c").string();
  config.max_parallel = 4;
  const ExperimentResult parallel = run_experiment(config);
  CHECK(read_file(first.steps_path) == read_file(parallel.steps_path));
  CHECK(read_file(fs::path(dir_a) / "config_echo.txt") ==
        read_file(fs::path(config.output_dir) / "config_echo.txt"));
}

TEST_CASE("the metrics curve depends on the seed and kind, not the label") {
  ExperimentConfig config = tiny_config("label_a");
  config.planners = {PlannerKind::AMcts};
  const ExperimentResult first = run_experiment(config);

  config.name = "renamed";
  config.output_dir = fresh_dir("label_b").string();
  const ExperimentResult second = run_experiment(config);
  CHECK(read_file(first.steps_path) == read_file(second.steps_path));
}

TEST_CASE("a pinned scenario file is shared by every repetition") {
  const fs::path scn = fs::temp_directory_path() / "amcts_experiment_test" / "pinned.scn";
  fs::create_directories(scn.parent_path());
  save_scenario(mechanics_grid(), scn);

  ExperimentConfig config = tiny_config("pinned");
  config.scenario_file = scn.string();
  config.budget = 3;
  const ExperimentResult result = run_experiment(config);
  REQUIRE(result.missions.size() == 4);
  for (const MetricsLog& log : result.missions) CHECK(log.steps.size() == 3);

  const std::string echo = read_file(fs::path(config.output_dir) / "config_echo.txt");
  CHECK(echo.find("scenario " + scn.string() + "\n") != std::string::npos);
  CHECK(echo.find("vertices") == std::string::npos);  // no generation knobs echoed
}

TEST_CASE("config keys apply one by one and reject what they cannot parse") {
  ExperimentConfig config;
  apply_config_kv(config, "name", "probe");
  CHECK(config.name == "probe");
  apply_config_kv(config, "planners", "amcts,greedy-mcts");
  REQUIRE(config.planners.size() == 2);
  CHECK(config.planners[0] == PlannerKind::AMcts);
  CHECK(config.planners[1] == PlannerKind::GreedyMcts);
  apply_config_kv(config, "iterations", "77");
  CHECK(config.duct.iterations_per_phase == 77);
  apply_config_kv(config, "gamma", "0.8");
  CHECK(config.duct.gamma == 0.8);
  apply_config_kv(config, "cp", "0.55");
  CHECK(config.duct.c_p == 0.55);
  apply_config_kv(config, "intensity", "0.25");
  CHECK(config.attrition_intensity == 0.25);
  apply_config_kv(config, "attrition-mode", "forced");
  CHECK(config.attrition_mode == AttritionMode::ForcedAfter);
  apply_config_kv(config, "forced-step", "2");
  CHECK(config.forced_step == 2);
  apply_config_kv(config, "agents", "7");
  CHECK(config.n_agents == 7);
  apply_config_kv(config, "regions", "55");
  CHECK(config.roadmap.n_regions == 55);
  apply_config_kv(config, "seed", "42");
  CHECK(config.base_seed == 42);
  apply_config_kv(config, "max-parallel", "3");
  CHECK(config.max_parallel == 3);
  apply_config_kv(config, "scenario", "some.scn");
  CHECK(config.scenario_file == "some.scn");
  apply_config_kv(config, "scenario", "-");
  CHECK(config.scenario_file.empty());
  apply_config_kv(config, "out", "/tmp/somewhere");
  CHECK(config.output_dir == "/tmp/somewhere");

  CHECK_THROWS_AS(apply_config_kv(config, "bogus", "1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_kv(config, "iterations", "12x"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_kv(config, "iterations", "3.5"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_kv(config, "gamma", "fast"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_kv(config, "planners", "amcts,warp-drive"),
                  std::invalid_argument);
}

TEST_CASE("config files load line by line with positioned errors") {
  const fs::path dir = fresh_dir("files");
  fs::create_directories(dir);

  const fs::path good = dir / "good.conf";
  {
    std::ofstream out(good);
    out << "# a comment\n"
        << "\n"
        << "iterations 60\n"
        << "planners amcts\n"
        << "  gamma 0.85\n";
  }
  ExperimentConfig config;
  load_config_file(config, good.string());
  CHECK(config.duct.iterations_per_phase == 60);
  REQUIRE(config.planners.size() == 1);
  CHECK(config.planners[0] == PlannerKind::AMcts);
  CHECK(config.duct.gamma == 0.85);

  const fs::path bad = dir / "bad.conf";
  {
    std::ofstream out(bad);
    out << "iterations 60\n"
        << "# fine so far\n"
        << "bogus 1\n";
  }
  ExperimentConfig scratch;
  try {
    load_config_file(scratch, bad.string());
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    const std::string message = e.what();
    CHECK(message.find(":3:") != std::string::npos);
    CHECK(message.find("bogus") != std::string::npos);
  }

  CHECK_THROWS(load_config_file(scratch, (dir / "missing.conf").string()));
}

TEST_CASE("sweep axis names round-trip") {
  for (SweepAxis axis :
       {SweepAxis::FailureIntensity, SweepAxis::PlanningIterations,
        SweepAxis::ExchangedComponents, SweepAxis::ActionsBudget, SweepAxis::AgentCount,
        SweepAxis::RegionCount, SweepAxis::CommLossProbability, SweepAxis::LossTolerance,
        SweepAxis::ForcedFailureStep}) {
    CHECK(parse_sweep_axis(sweep_axis_name(axis)) == axis);
  }
  CHECK_THROWS_AS(parse_sweep_axis("altitude"), std::invalid_argument);
}

TEST_CASE("a sweep runs one experiment per value into its own directory") {
  SweepConfig sweep;
  sweep.base = tiny_config("sweep");
  sweep.base.planners = {PlannerKind::AMcts};
  sweep.base.repetitions = 1;
  sweep.axis = SweepAxis::FailureIntensity;
  sweep.values = {0.0, 0.5};

  const SweepResult result = run_sweep(sweep);
  REQUIRE(result.points.size() == 2);
  CHECK(result.points[0].value == 0.0);
  CHECK(result.points[1].value == 0.5);
  CHECK(result.points[0].result.missions[0].intensity == 0.0);
  CHECK(result.points[1].result.missions[0].intensity == 0.5);

  const fs::path root(sweep.base.output_dir);
  CHECK(fs::exists(root / "failure-intensity_0" / "steps.csv"));
  CHECK(fs::exists(root / "failure-intensity_0.5" / "steps.csv"));

  const std::string table = read_file(result.sweep_path);
  CHECK(table.rfind("# amcts-sweep 1\naxis,value,planner,reps,mean_final_irc,ci95_half_width\n",
                    0) == 0);
  CHECK(line_count(table) == 2 + 2);
  CHECK(table.find("failure-intensity,0,amcts,1,") != std::string::npos);
  CHECK(table.find("failure-intensity,0.5,amcts,1,") != std::string::npos);
}

TEST_CASE("integer axes reshape the per-value experiment configuration") {
  SweepConfig sweep;
  sweep.base = tiny_config("sweep_iters");
  sweep.base.planners = {PlannerKind::AMcts};
  sweep.base.repetitions = 1;
  sweep.axis = SweepAxis::PlanningIterations;
  sweep.values = {20.0, 40.0};

  const SweepResult result = run_sweep(sweep);
  REQUIRE(result.points.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& echo = result.points[i].result.missions[0].config_echo;
    bool found = false;
    for (const auto& [key, value] : echo) {
      if (key == "iterations_per_phase") {
        found = true;
        CHECK(value == (i == 0 ? "20" : "40"));
      }
    }
    CHECK(found);
  }
  CHECK(fs::exists(fs::path(sweep.base.output_dir) / "planning-iterations_20"));
  CHECK(fs::exists(fs::path(sweep.base.output_dir) / "planning-iterations_40"));
}

TEST_CASE("the forced-failure-step axis switches the attrition mode") {
  SweepConfig sweep;
  sweep.base = tiny_config("sweep_forced");
  sweep.base.planners = {PlannerKind::AMcts};
  sweep.base.repetitions = 1;
  sweep.base.attrition_intensity = 0.5;
  sweep.axis = SweepAxis::ForcedFailureStep;
  sweep.values = {1.0};

  const SweepResult result = run_sweep(sweep);
  REQUIRE(result.points.size() == 1);
  CHECK(fs::exists(fs::path(sweep.base.output_dir) / "forced-failure-step_1" / "steps.csv"));

  // A step beyond the budget fails validation with the offending value named.
  sweep.values = {5.0};
  try {
    run_sweep(sweep);
    FAIL("expected validation to fail");
  } catch (const std::invalid_argument& e) {
    const std::string message = e.what();
    CHECK(message.find("value 5") != std::string::npos);
    CHECK(message.find("forced-step") != std::string::npos);
  }
}

TEST_CASE("sweep validation rejects impossible requests") {
  SweepConfig sweep;
  sweep.base = tiny_config("sweep_invalid");

  sweep.values = {};
  CHECK(!sweep.validate().empty());

  sweep.axis = SweepAxis::PlanningIterations;
  sweep.values = {20.5};
  bool integral_flagged = false;
  for (const std::string& entry : sweep.validate())
    if (entry.find("requires integers") != std::string::npos) integral_flagged = true;
  CHECK(integral_flagged);

  sweep.axis = SweepAxis::RegionCount;
  sweep.values = {10.0};
  sweep.base.scenario_file = "pinned.scn";
  bool pinned_flagged = false;
  for (const std::string& entry : sweep.validate())
    if (entry.find("region-count") != std::string::npos) pinned_flagged = true;
  CHECK(pinned_flagged);
  CHECK_THROWS_AS(run_sweep(sweep), std::invalid_argument);
}

TEST_CASE("single-action games score a perfect optimality study") {
  OptimalityConfig config;
  config.cells = {{2, 1, 2}};  // one candidate per player: trivially optimal
  config.games_per_cell = 5;
  config.rm_rounds = 20;
  config.base_seed = 3;
  config.output_dir = fresh_dir("opt_trivial").string();
  config.arena.area_side = 300.0;
  config.arena.n_regions = 6;
  config.arena.region_radius = 60.0;
  config.arena.n_vertices = 15;
  config.arena.connect_radius = 200.0;

  const OptimalityResult result = run_optimality_study(config);
  REQUIRE(result.cells.size() == 1);
  const OptimalityCellResult& cell = result.cells[0];
  CHECK(!cell.skipped);
  CHECK(cell.stats.games == 5);
  CHECK(cell.stats.pfo == 1.0);
  REQUIRE(cell.rows.size() == 5);
  for (const OptimalityGameRow& row : cell.rows) {
    CHECK(row.n_agents == 2);
    CHECK(row.m == 1);
    CHECK(row.achieved == row.optimal);
    CHECK(row.psne);  // a single action per player cannot be improved upon
  }
  if (cell.stats.zero_optimal_excluded < cell.stats.games)
    CHECK(cell.stats.rno == doctest::Approx(1.0));

  const std::string rows = read_file(result.rows_path);
  CHECK(rows.rfind("# amcts-optimality 1\nseed,n_agents,m,actions,achieved,optimal,psne\n",
                   0) == 0);
  CHECK(line_count(rows) == 2 + 5);
  const std::string summary = read_file(result.summary_path);
  CHECK(summary.find("2,1,2,5,1,") != std::string::npos);
}

TEST_CASE("cells beyond the enumeration cap are skipped with a note") {
  OptimalityConfig config;
  config.cells = {{2, 2, 1}, {6, 10, 3}};  // 10^6 profiles blows a cap of 100
  config.games_per_cell = 3;
  config.rm_rounds = 15;
  config.base_seed = 4;
  config.output_dir = fresh_dir("opt_capped").string();
  config.exhaustive_cap = 100;
  config.arena.area_side = 300.0;
  config.arena.n_regions = 6;
  config.arena.region_radius = 60.0;
  config.arena.n_vertices = 15;
  config.arena.connect_radius = 200.0;

  const OptimalityResult result = run_optimality_study(config);
  REQUIRE(result.cells.size() == 2);
  CHECK(!result.cells[0].skipped);
  CHECK(result.cells[0].rows.size() == 3);
  CHECK(result.cells[1].skipped);
  CHECK(result.cells[1].rows.empty());
  CHECK(result.cells[1].stats.games == 0);

  const std::string summary = read_file(result.summary_path);
  CHECK(summary.find("# skipped n_agents=6 m=10 actions=3") != std::string::npos);
}

TEST_CASE("optimality studies replay bit-identically and validate their inputs") {
  OptimalityConfig config;
  config.cells = optimality_cells({2, 3}, {2}, {2});
  REQUIRE(config.cells.size() == 2);
  CHECK(config.cells[0].n_agents == 2);
  CHECK(config.cells[1].n_agents == 3);
  config.games_per_cell = 3;
  config.rm_rounds = 25;
  config.base_seed = 11;
  config.output_dir = fresh_dir("opt_replay_a").string();
  config.arena.area_side = 300.0;
  config.arena.n_regions = 6;
  config.arena.region_radius = 60.0;
  config.arena.n_vertices = 15;
  config.arena.connect_radius = 200.0;

  const OptimalityResult first = run_optimality_study(config);
  config.output_dir = fresh_dir("opt_replay_b").string();
  const OptimalityResult second = run_optimality_study(config);
  CHECK(read_file(first.rows_path) == read_file(second.rows_path));
  CHECK(read_file(first.summary_path) == read_file(second.summary_path));

  OptimalityConfig invalid = config;
  invalid.games_per_cell = 0;
  invalid.cells.push_back({0, 1, 1});
  auto bad = invalid.validate();
  CHECK(bad.size() == 2);
  CHECK_THROWS_AS(run_optimality_study(invalid), std::invalid_argument);

  OptimalityConfig empty = config;
  empty.cells.clear();
  CHECK(!empty.validate().empty());
}

#include "amcts/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "amcts/coordination.hpp"
#include "amcts/rng.hpp"
#include "amcts/scenario_io.hpp"

namespace amcts {
namespace {

namespace fs = std::filesystem;

int parse_int_strict(const std::string& text) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument("bad integer: " + text);
  return value;
}

std::uint64_t parse_u64_strict(const std::string& text) {
  std::uint64_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument("bad unsigned integer: " + text);
  return value;
}

double parse_double_strict(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument("bad number: " + text);
  return value;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double ci95_half_width(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double mean = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return 0.0;
  const boost::math::students_t_distribution<double> dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(dist, 0.975);
  return t * sd / std::sqrt(static_cast<double>(n));
}

std::vector<MetricsLog> run_repetition(const ExperimentConfig& config,
                                       const Scenario* pinned, int rep) {
  const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(rep);
  Scenario generated;
  const Scenario* scenario = pinned;
  if (!scenario) {
    RoadmapParams params = config.roadmap;
    params.seed = seed;
    generated = generate_roadmap_scenario(params);
    scenario = &generated;
  }
  const AttritionSchedule schedule =
      build_attrition_schedule(seed, config.n_agents, config.attrition_intensity,
                               config.budget, config.attrition_mode, config.forced_step);

  std::vector<MetricsLog> logs;
  logs.reserve(config.planners.size());
  for (PlannerKind kind : config.planners) {
    MissionConfig mission;
    mission.planner.kind = kind;
    mission.planner.duct = config.duct;
    mission.planner.plan_components = config.plan_components;
    mission.planner.exchange_every = config.exchange_every;
    mission.planner.rm_rounds = config.rm_rounds;
    mission.planner.loss_tolerance = config.loss_tolerance;
    mission.n_agents = config.n_agents;
    mission.budget = config.budget;
    mission.comm.loss_probability = config.loss_probability;
    mission.schedule = schedule;
    mission.seed = seed;
    logs.push_back(run_mission(*scenario, mission));
  }
  return logs;
}

std::vector<std::vector<MetricsLog>> run_all_repetitions(const ExperimentConfig& config,
                                                         const Scenario* pinned) {
  const int reps = config.repetitions;
  std::vector<std::vector<MetricsLog>> results(reps);
  int workers = config.max_parallel > 0
                    ? config.max_parallel
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, reps);
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) results[r] = run_repetition(config, pinned, r);
    return results;
  }

  std::vector<std::exception_ptr> errors(reps);
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        results[r] = run_repetition(config, pinned, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

std::string steps_csv(const std::vector<MetricsLog>& missions) {
  std::string out = "# amcts-steps 1\nseed,planner,intensity,step,irc\n";
  for (const MetricsLog& log : missions) {
    const std::string prefix = std::to_string(log.seed) + "," + planner_name(log.planner) +
                               "," + format_double(log.intensity) + ",";
    for (const StepRecord& s : log.steps)
      out += prefix + std::to_string(s.step) + "," + format_double(s.irc) + "\n";
    out += prefix + "final," + format_double(log.final_irc) + "\n";
  }
  return out;
}

std::vector<MissionSummary> summarize(const ExperimentConfig& config,
                                      const std::vector<MetricsLog>& missions) {
  std::vector<MissionSummary> out;
  for (PlannerKind kind : config.planners) {
    std::vector<double> finals;
    for (const MetricsLog& log : missions)
      if (log.planner == kind) finals.push_back(log.final_irc);
    MissionSummary row;
    row.planner = kind;
    row.reps = static_cast<int>(finals.size());
    row.mean_final_irc = mean_of(finals);
    row.ci95_half_width = ci95_half_width(finals);
    out.push_back(row);
  }
  return out;
}

std::string summary_csv(const std::vector<MissionSummary>& summary) {
  std::string out = "# amcts-summary 1\nplanner,reps,mean_final_irc,ci95_half_width\n";
  for (const MissionSummary& row : summary) {
    out += planner_name(row.planner);
    out += "," + std::to_string(row.reps);
    out += "," + format_double(row.mean_final_irc);
    out += "," + format_double(row.ci95_half_width);
    out += "\n";
  }
  return out;
}

std::string planner_list_string(const std::vector<PlannerKind>& planners) {
  std::string out;
  for (PlannerKind kind : planners) {
    if (!out.empty()) out += ",";
    out += planner_name(kind);
  }
  return out;
}

std::string config_echo_text(const ExperimentConfig& c) {
  std::string out;
  const auto kv = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += ' ';
    out += value;
    out += '\n';
  };
  kv("name", c.name);
  kv("scenario", c.scenario_file.empty() ? "-" : c.scenario_file);
  kv("planners", planner_list_string(c.planners));
  kv("iterations", std::to_string(c.duct.iterations_per_phase));
  kv("gamma", format_double(c.duct.gamma));
  kv("cp", format_double(c.duct.c_p));
  kv("rollout-horizon", std::to_string(c.duct.rollout_horizon));
  kv("components", std::to_string(c.plan_components));
  kv("exchange-every", std::to_string(c.exchange_every));
  kv("rm-rounds", std::to_string(c.rm_rounds));
  kv("loss-tolerance", std::to_string(c.loss_tolerance));
  kv("agents", std::to_string(c.n_agents));
  kv("budget", std::to_string(c.budget));
  kv("intensity", format_double(c.attrition_intensity));
  kv("attrition-mode", attrition_mode_name(c.attrition_mode));
  kv("forced-step", std::to_string(c.forced_step));
  kv("loss-probability", format_double(c.loss_probability));
  kv("repetitions", std::to_string(c.repetitions));
  kv("seed", std::to_string(c.base_seed));
  if (c.scenario_file.empty()) {
    kv("regions", std::to_string(c.roadmap.n_regions));
    kv("vertices", std::to_string(c.roadmap.n_vertices));
    kv("area", format_double(c.roadmap.area_side));
    kv("region-radius", format_double(c.roadmap.region_radius));
    kv("region-value", format_double(c.roadmap.region_value));
    kv("connect-radius", format_double(c.roadmap.connect_radius));
  }
  return out;
}

bool axis_is_integer(SweepAxis axis) {
  return axis != SweepAxis::FailureIntensity && axis != SweepAxis::CommLossProbability;
}

void apply_axis(ExperimentConfig& config, SweepAxis axis, double value) {
  const int iv = static_cast<int>(std::llround(value));
  switch (axis) {
    case SweepAxis::FailureIntensity: config.attrition_intensity = value; break;
    case SweepAxis::PlanningIterations: config.duct.iterations_per_phase = iv; break;
    case SweepAxis::ExchangedComponents: config.plan_components = iv; break;
    case SweepAxis::ActionsBudget: config.budget = iv; break;
    case SweepAxis::AgentCount: config.n_agents = iv; break;
    case SweepAxis::RegionCount: config.roadmap.n_regions = iv; break;
    case SweepAxis::CommLossProbability: config.loss_probability = value; break;
    case SweepAxis::LossTolerance: config.loss_tolerance = iv; break;
    case SweepAxis::ForcedFailureStep:
      config.forced_step = iv;
      config.attrition_mode = AttritionMode::ForcedAfter;
      break;
  }
}

std::string axis_value_token(SweepAxis axis, double value) {
  if (axis_is_integer(axis)) return std::to_string(std::llround(value));
  return format_double(value);
}

std::uint64_t saturating_power(std::uint64_t base, int exponent) {
  std::uint64_t result = 1;
  for (int i = 0; i < exponent; ++i) {
    if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    result *= base;
  }
  return result;
}

Path random_walk(const Scenario& scenario, int agent, int start, int steps,
                 std::mt19937_64& rng) {
  Path path;
  path.agent_id = agent;
  path.start_vertex = start;
  int vertex = start;
  for (int k = 0; k < steps; ++k) {
    const auto& incident = scenario.graph().incident[vertex];
    if (incident.empty()) break;
    const int edge = incident[uniform_index(rng, incident.size())];
    path.edges.push_back(edge);
    vertex = scenario.graph().other_end(edge, vertex);
  }
  return path;
}

}  // namespace

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  const auto req = [&bad](bool ok, const std::string& message) {
    if (!ok) bad.push_back(message);
  };
  req(!planners.empty(), "planners: at least one planner kind required");
  {
    std::set<PlannerKind> unique(planners.begin(), planners.end());
    req(unique.size() == planners.size(), "planners: duplicate kinds");
  }
  req(repetitions >= 1, "repetitions: must be >= 1");
  req(n_agents >= 1, "agents: must be >= 1");
  req(budget >= 0, "budget: must be >= 0");
  req(duct.iterations_per_phase >= 1, "iterations: must be >= 1");
  req(duct.gamma > 0.0 && duct.gamma <= 1.0, "gamma: must be in (0, 1]");
  req(duct.c_p > 0.0, "cp: must be > 0");
  req(duct.rollout_horizon >= 0, "rollout-horizon: must be >= 0");
  req(plan_components >= 1, "components: must be >= 1");
  req(exchange_every >= 1, "exchange-every: must be >= 1");
  req(rm_rounds >= 1, "rm-rounds: must be >= 1");
  req(loss_tolerance >= 1, "loss-tolerance: must be >= 1");
  req(attrition_intensity >= 0.0 && attrition_intensity <= 1.0,
      "intensity: must be in [0, 1]");
  req(loss_probability >= 0.0 && loss_probability <= 1.0,
      "loss-probability: must be in [0, 1]");
  if (attrition_mode == AttritionMode::ForcedAfter)
    req(forced_step >= 0 && forced_step <= budget, "forced-step: must be in [0, budget]");
  req(max_parallel >= 0, "max-parallel: must be >= 0");
  if (scenario_file.empty()) {
    req(roadmap.n_regions >= 1, "regions: must be >= 1");
    req(roadmap.n_vertices >= 2, "vertices: must be >= 2");
    req(roadmap.n_vertices >= n_agents, "vertices: need at least one distinct start per agent");
    req(roadmap.area_side > 0.0, "area: must be > 0");
    req(roadmap.region_radius > 0.0, "region-radius: must be > 0");
    req(roadmap.region_value >= 0.0, "region-value: must be >= 0");
    req(roadmap.connect_radius > 0.0, "connect-radius: must be > 0");
  }
  return bad;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const std::vector<std::string> bad = config.validate();
  if (!bad.empty()) {
    std::string message = "invalid experiment config:";
    for (const std::string& entry : bad) message += "\n  " + entry;
    throw std::invalid_argument(message);
  }

  std::optional<Scenario> pinned;
  if (!config.scenario_file.empty()) pinned = load_scenario(fs::path(config.scenario_file));

  auto per_rep = run_all_repetitions(config, pinned ? &*pinned : nullptr);

  ExperimentResult out;
  for (auto& logs : per_rep)
    for (auto& log : logs) out.missions.push_back(std::move(log));
  out.summary = summarize(config, out.missions);

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  out.steps_path = (dir / "steps.csv").string();
  out.summary_path = (dir / "summary.csv").string();
  write_file(out.steps_path, steps_csv(out.missions));
  write_file(out.summary_path, summary_csv(out.summary));
  write_file(dir / "config_echo.txt", config_echo_text(config));
  return out;
}

void apply_config_kv(ExperimentConfig& config, const std::string& key,
                     const std::string& value) {
  if (key == "name") {
    config.name = value;
  } else if (key == "scenario") {
    config.scenario_file = value == "-" ? std::string{} : value;
  } else if (key == "out") {
    config.output_dir = value;
  } else if (key == "planners") {
    std::vector<PlannerKind> kinds;
    std::size_t pos = 0;
    while (pos <= value.size()) {
      const std::size_t comma = value.find(',', pos);
      const std::string token =
          value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!token.empty()) {
        const std::optional<PlannerKind> kind = parse_planner(token);
        if (!kind) throw std::invalid_argument("unknown planner kind: " + token);
        kinds.push_back(*kind);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    config.planners = std::move(kinds);
  } else if (key == "iterations") {
    config.duct.iterations_per_phase = parse_int_strict(value);
  } else if (key == "gamma") {
    config.duct.gamma = parse_double_strict(value);
  } else if (key == "cp") {
    config.duct.c_p = parse_double_strict(value);
  } else if (key == "rollout-horizon") {
    config.duct.rollout_horizon = parse_int_strict(value);
  } else if (key == "components") {
    config.plan_components = parse_int_strict(value);
  } else if (key == "exchange-every") {
    config.exchange_every = parse_int_strict(value);
  } else if (key == "rm-rounds") {
    config.rm_rounds = parse_int_strict(value);
  } else if (key == "loss-tolerance") {
    config.loss_tolerance = parse_int_strict(value);
  } else if (key == "agents") {
    config.n_agents = parse_int_strict(value);
  } else if (key == "budget") {
    config.budget = parse_int_strict(value);
  } else if (key == "intensity") {
    config.attrition_intensity = parse_double_strict(value);
  } else if (key == "attrition-mode") {
    config.attrition_mode = parse_attrition_mode(value);
  } else if (key == "forced-step") {
    config.forced_step = parse_int_strict(value);
  } else if (key == "loss-probability") {
    config.loss_probability = parse_double_strict(value);
  } else if (key == "repetitions") {
    config.repetitions = parse_int_strict(value);
  } else if (key == "seed") {
    config.base_seed = parse_u64_strict(value);
  } else if (key == "max-parallel") {
    config.max_parallel = parse_int_strict(value);
  } else if (key == "regions") {
    config.roadmap.n_regions = parse_int_strict(value);
  } else if (key == "vertices") {
    config.roadmap.n_vertices = parse_int_strict(value);
  } else if (key == "area") {
    config.roadmap.area_side = parse_double_strict(value);
  } else if (key == "region-radius") {
    config.roadmap.region_radius = parse_double_strict(value);
  } else if (key == "region-value") {
    config.roadmap.region_value = parse_double_strict(value);
  } else if (key == "connect-radius") {
    config.roadmap.connect_radius = parse_double_strict(value);
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

void load_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  const auto trim = [](std::string s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front())) s.erase(s.begin());
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t split = line.find_first_of(" \t");
    if (split == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected 'key value'");
    const std::string key = line.substr(0, split);
    const std::string value = trim(line.substr(split + 1));
    try {
      apply_config_kv(config, key, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::FailureIntensity: return "failure-intensity";
    case SweepAxis::PlanningIterations: return "planning-iterations";
    case SweepAxis::ExchangedComponents: return "exchanged-components";
    case SweepAxis::ActionsBudget: return "actions-budget";
    case SweepAxis::AgentCount: return "agent-count";
    case SweepAxis::RegionCount: return "region-count";
    case SweepAxis::CommLossProbability: return "comm-loss-probability";
    case SweepAxis::LossTolerance: return "loss-tolerance";
    case SweepAxis::ForcedFailureStep: return "forced-failure-step";
  }
  throw std::logic_error("unreachable sweep axis");
}

SweepAxis parse_sweep_axis(const std::string& name) {
  static const std::pair<const char*, SweepAxis> table[] = {
      {"failure-intensity", SweepAxis::FailureIntensity},
      {"planning-iterations", SweepAxis::PlanningIterations},
      {"exchanged-components", SweepAxis::ExchangedComponents},
      {"actions-budget", SweepAxis::ActionsBudget},
      {"agent-count", SweepAxis::AgentCount},
      {"region-count", SweepAxis::RegionCount},
      {"comm-loss-probability", SweepAxis::CommLossProbability},
      {"loss-tolerance", SweepAxis::LossTolerance},
      {"forced-failure-step", SweepAxis::ForcedFailureStep},
  };
  for (const auto& [token, axis] : table)
    if (name == token) return axis;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

std::vector<std::string> SweepConfig::validate() const {
  std::vector<std::string> bad = base.validate();
  if (values.empty()) bad.push_back("values: must be nonempty");
  if (axis == SweepAxis::RegionCount && !base.scenario_file.empty())
    bad.push_back("axis region-count: needs generated scenarios, not a pinned file");
  for (double v : values) {
    if (axis_is_integer(axis) && std::abs(v - std::llround(v)) > 1e-9) {
      bad.push_back("values: axis " + sweep_axis_name(axis) + " requires integers");
      break;
    }
  }
  if (bad.empty()) {
    for (double v : values) {
      ExperimentConfig cell = base;
      apply_axis(cell, axis, v);
      for (const std::string& entry : cell.validate())
        bad.push_back("value " + axis_value_token(axis, v) + ": " + entry);
    }
  }
  return bad;
}

SweepResult run_sweep(const SweepConfig& config) {
  const std::vector<std::string> bad = config.validate();
  if (!bad.empty()) {
    std::string message = "invalid sweep config:";
    for (const std::string& entry : bad) message += "\n  " + entry;
    throw std::invalid_argument(message);
  }

  const fs::path root(config.base.output_dir);
  fs::create_directories(root);

  SweepResult out;
  std::string table = "# amcts-sweep 1\naxis,value,planner,reps,mean_final_irc,ci95_half_width\n";
  const std::string axis_name = sweep_axis_name(config.axis);
  for (double value : config.values) {
    ExperimentConfig cell = config.base;
    apply_axis(cell, config.axis, value);
    const std::string token = axis_value_token(config.axis, value);
    cell.output_dir = (root / (axis_name + "_" + token)).string();
    SweepPoint point;
    point.value = value;
    point.result = run_experiment(cell);
    for (const MissionSummary& row : point.result.summary) {
      table += axis_name + "," + token + "," + planner_name(row.planner) + "," +
               std::to_string(row.reps) + "," + format_double(row.mean_final_irc) + "," +
               format_double(row.ci95_half_width) + "\n";
    }
    out.points.push_back(std::move(point));
  }
  out.sweep_path = (root / "sweep.csv").string();
  write_file(out.sweep_path, table);
  return out;
}

OptimalityConfig::OptimalityConfig() {
  arena.area_side = 1000.0;
  arena.n_regions = 30;
  arena.region_radius = 60.0;
  arena.region_value = 1.0;
  arena.n_vertices = 60;
  arena.connect_radius = 300.0;
  cells = optimality_cells({2, 3, 4, 5, 6}, {10}, {9});
}

std::vector<std::string> OptimalityConfig::validate() const {
  std::vector<std::string> bad;
  const auto req = [&bad](bool ok, const std::string& message) {
    if (!ok) bad.push_back(message);
  };
  req(!cells.empty(), "cells: must be nonempty");
  req(games_per_cell >= 1, "games-per-cell: must be >= 1");
  req(rm_rounds >= 1, "rm-rounds: must be >= 1");
  req(exhaustive_cap >= 1, "exhaustive-cap: must be >= 1");
  int max_agents = 0;
  for (const OptimalityCell& cell : cells) {
    req(cell.n_agents >= 1, "cell agents: must be >= 1");
    req(cell.m >= 1, "cell m: must be >= 1");
    req(cell.actions >= 0, "cell actions: must be >= 0");
    max_agents = std::max(max_agents, cell.n_agents);
  }
  req(arena.n_regions >= 1, "arena regions: must be >= 1");
  req(arena.n_vertices >= 2, "arena vertices: must be >= 2");
  req(arena.n_vertices >= max_agents, "arena vertices: need one distinct start per agent");
  req(arena.area_side > 0.0, "arena area: must be > 0");
  req(arena.region_radius > 0.0, "arena region-radius: must be > 0");
  req(arena.region_value >= 0.0, "arena region-value: must be >= 0");
  req(arena.connect_radius > 0.0, "arena connect-radius: must be > 0");
  return bad;
}

std::vector<OptimalityCell> optimality_cells(const std::vector<int>& n_agents,
                                             const std::vector<int>& m_values,
                                             const std::vector<int>& action_values) {
  std::vector<OptimalityCell> cells;
  for (int n : n_agents)
    for (int m : m_values)
      for (int a : action_values) cells.push_back(OptimalityCell{n, m, a});
  return cells;
}

OptimalityResult run_optimality_study(const OptimalityConfig& config) {
  const std::vector<std::string> bad = config.validate();
  if (!bad.empty()) {
    std::string message = "invalid optimality config:";
    for (const std::string& entry : bad) message += "\n  " + entry;
    throw std::invalid_argument(message);
  }

  OptimalityResult out;
  std::string rows = "# amcts-optimality 1\nseed,n_agents,m,actions,achieved,optimal,psne\n";
  std::string summary =
      "# amcts-optimality-summary 1\nn_agents,m,actions,games,pfo,rno,zero_optimal_excluded\n";

  for (std::size_t ci = 0; ci < config.cells.size(); ++ci) {
    const OptimalityCell& cell = config.cells[ci];
    OptimalityCellResult result;
    result.cell = cell;

    if (saturating_power(static_cast<std::uint64_t>(cell.m), cell.n_agents) >
        config.exhaustive_cap) {
      result.skipped = true;
      summary += "# skipped n_agents=" + std::to_string(cell.n_agents) +
                 " m=" + std::to_string(cell.m) + " actions=" + std::to_string(cell.actions) +
                 " (profile space exceeds exhaustive cap)\n";
      out.cells.push_back(std::move(result));
      continue;
    }

    int found = 0;
    double ratio_sum = 0.0;
    int ratio_count = 0;
    int zero_excluded = 0;

    for (int g = 0; g < config.games_per_cell; ++g) {
      const std::uint64_t seed = derive_seed(
          config.base_seed,
          {7, static_cast<std::uint64_t>(ci), static_cast<std::uint64_t>(g)});
      RoadmapParams params = config.arena;
      params.seed = seed;
      const Scenario base = generate_roadmap_scenario(params);

      // Heterogeneous dyadic region values (1, 2, 4, 8) keep coverage sums
      // exact while making the optimum usually unique, so PFO measures real
      // coordination quality instead of plateau ties.
      auto setup_rng = make_rng(seed, {8});
      std::vector<Region> regions = base.regions();
      for (Region& region : regions)
        region.value = static_cast<double>(1ULL << uniform_index(setup_rng, 4));
      const Scenario scenario =
          Scenario::assemble(base.graph().vertices, base.graph().edges, std::move(regions),
                             base.kind(), base.meta());

      const std::vector<int> starts = sample_without_replacement(
          setup_rng, static_cast<int>(scenario.graph().vertices.size()), cell.n_agents);

      std::vector<int> players(cell.n_agents);
      std::vector<std::vector<Path>> actions(cell.n_agents);
      for (int i = 0; i < cell.n_agents; ++i) {
        players[i] = i;
        actions[i].reserve(cell.m);
        for (int k = 0; k < cell.m; ++k)
          actions[i].push_back(
              random_walk(scenario, i, starts[i], cell.actions, setup_rng));
      }
      const MatrixGame game = MatrixGame::coverage_game(scenario, players, std::move(actions));

      std::vector<JointProfile> candidates;
      candidates.reserve(cell.n_agents);
      for (int inst = 0; inst < cell.n_agents; ++inst) {
        auto rm_rng = make_rng(seed, {9, static_cast<std::uint64_t>(inst)});
        candidates.push_back(run_regret_matching(game, config.rm_rounds, rm_rng));
      }
      const JointProfile best = select_payoff_dominant(candidates, game);
      const double achieved = game.utility(best);
      const auto [opt_profile, opt_value] = exhaustive_optimal(game, config.exhaustive_cap);
      const bool psne = is_psne(game, best);

      OptimalityGameRow row;
      row.seed = seed;
      row.n_agents = cell.n_agents;
      row.m = cell.m;
      row.actions = cell.actions;
      row.achieved = achieved;
      row.optimal = opt_value;
      row.psne = psne;
      result.rows.push_back(row);

      rows += std::to_string(row.seed) + "," + std::to_string(row.n_agents) + "," +
              std::to_string(row.m) + "," + std::to_string(row.actions) + "," +
              format_double(row.achieved) + "," + format_double(row.optimal) + "," +
              (row.psne ? "1" : "0") + "\n";

      if (pfo_value_match(achieved, opt_value)) ++found;
      if (opt_value > 0.0) {
        ratio_sum += achieved / opt_value;
        ++ratio_count;
      } else {
        ++zero_excluded;
      }
    }

    result.stats.games = config.games_per_cell;
    result.stats.pfo = static_cast<double>(found) / static_cast<double>(config.games_per_cell);
    result.stats.rno =
        ratio_count > 0 ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
    result.stats.zero_optimal_excluded = zero_excluded;

    summary += std::to_string(cell.n_agents) + "," + std::to_string(cell.m) + "," +
               std::to_string(cell.actions) + "," + std::to_string(result.stats.games) + "," +
               format_double(result.stats.pfo) + "," + format_double(result.stats.rno) + "," +
               std::to_string(result.stats.zero_optimal_excluded) + "\n";

    out.cells.push_back(std::move(result));
  }

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  out.rows_path = (dir / "optimality.csv").string();
  out.summary_path = (dir / "optimality_summary.csv").string();
  write_file(out.rows_path, rows);
  write_file(out.summary_path, summary);
  return out;
}

}  // namespace amcts

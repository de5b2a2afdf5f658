#include "amcts/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "amcts/rng.hpp"
#include "amcts/scenario_io.hpp"

namespace amcts {

bool deliver(Bus& bus, const IntentionMessage& message, const CommModel& comm,
             std::mt19937_64& rng) {
  if (comm.loss_probability < 0.0 || comm.loss_probability > 1.0)
    throw std::invalid_argument("loss probability must lie in [0, 1]");
  if (bernoulli(rng, comm.loss_probability)) return false;
  bus.post(message);
  return true;
}

std::string attrition_mode_name(AttritionMode mode) {
  return mode == AttritionMode::UniformRandom ? "uniform" : "forced";
}

AttritionMode parse_attrition_mode(const std::string& name) {
  if (name == "uniform") return AttritionMode::UniformRandom;
  if (name == "forced") return AttritionMode::ForcedAfter;
  throw std::invalid_argument("unknown attrition mode: " + name);
}

AttritionSchedule build_attrition_schedule(std::uint64_t seed, int n_agents, double intensity,
                                           int budget, AttritionMode mode, int forced_step) {
  if (n_agents <= 0) throw std::invalid_argument("agent count must be positive");
  if (intensity < 0.0 || intensity > 1.0)
    throw std::invalid_argument("attrition intensity must lie in [0, 1]");
  if (budget < 0) throw std::invalid_argument("budget must be non-negative");

  AttritionSchedule schedule;
  schedule.intensity = intensity;
  const int failures = static_cast<int>(std::lround(intensity * n_agents));
  if (failures == 0) return schedule;

  if (mode == AttritionMode::UniformRandom) {
    auto rng = make_rng(seed, {3});
    std::vector<int> victims = sample_without_replacement(rng, n_agents, failures);
    std::sort(victims.begin(), victims.end());
    for (int agent : victims) {
      schedule.failure_step[agent] =
          static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(budget) + 1));
    }
  } else {
    if (forced_step < 0 || forced_step > budget)
      throw std::invalid_argument("forced failure step must lie in [0, budget]");
    for (int agent = 0; agent < failures; ++agent) schedule.failure_step[agent] = forced_step;
  }
  return schedule;
}

double irc(const Scenario& scenario, std::span<const Path> executed, const std::set<int>& active) {
  const double total = scenario.total_value();
  if (total <= 0.0) return 0.0;
  return global_utility(scenario, executed, active) / total;
}

namespace {

std::vector<int> resolve_starts(const Scenario& scenario, const MissionConfig& config) {
  if (!config.starts.empty()) {
    if (static_cast<int>(config.starts.size()) != config.n_agents)
      throw std::invalid_argument("starts override must list one vertex per agent");
    return config.starts;
  }
  if (!scenario.starts().empty()) {
    if (static_cast<int>(scenario.starts().size()) != config.n_agents)
      throw std::invalid_argument("scenario provides a different number of start cells");
    return scenario.starts();
  }
  const int nv = static_cast<int>(scenario.graph().vertices.size());
  if (config.n_agents > nv)
    throw std::invalid_argument("more agents than vertices to start from");
  auto rng = make_rng(config.seed, {2});
  std::vector<int> starts = sample_without_replacement(rng, nv, config.n_agents);
  return starts;
}

void echo_config(MetricsLog& log, const MissionConfig& config) {
  log.config_echo = {
      {"planner", planner_name(config.planner.kind)},
      {"n_agents", std::to_string(config.n_agents)},
      {"budget", std::to_string(config.budget)},
      {"iterations_per_phase", std::to_string(config.planner.duct.iterations_per_phase)},
      {"gamma", format_double(config.planner.duct.gamma)},
      {"c_p", format_double(config.planner.duct.c_p)},
      {"plan_components", std::to_string(config.planner.plan_components)},
      {"exchange_every", std::to_string(config.planner.exchange_every)},
      {"rm_rounds", std::to_string(config.planner.rm_rounds)},
      {"loss_probability", format_double(config.comm.loss_probability)},
      {"loss_tolerance", std::to_string(config.planner.loss_tolerance)},
      {"attrition_intensity", format_double(config.schedule.intensity)},
      {"seed", std::to_string(config.seed)},
  };
}

// One exchange round. Loss coins are drawn through deliver() for every
// mission-active ordered pair in fixed order, so the pattern depends only on
// seed and schedule, never on planner behavior. A failed sender posts nothing
// and consumes no randomness: its silence reaches recipients as a loss.
void exchange_round(std::vector<std::unique_ptr<AgentPlanner>>& planners,
                    const std::set<int>& mission_active, const CommModel& comm,
                    std::mt19937_64& comm_rng, int round) {
  std::map<int, IntentionMessage> posted;
  for (auto& p : planners) {
    if (!p || !mission_active.count(p->id())) continue;
    posted.emplace(p->id(), p->make_message(round));
  }

  std::map<int, Bus> inbox;
  for (int r : mission_active) inbox.emplace(r, Bus{});
  for (int s : mission_active) {
    for (int r : mission_active) {
      if (s == r) continue;
      deliver(inbox.at(r), posted.at(s), comm, comm_rng);
    }
  }

  for (auto& p : planners) {
    if (!p || !mission_active.count(p->id())) continue;
    const Bus& bus = inbox.at(p->id());
    const std::vector<int> expected(p->known_active().begin(), p->known_active().end());
    for (int s : expected) {
      if (s == p->id()) continue;
      if (const IntentionMessage* msg = bus.fetch(s)) {
        p->receive(*msg);
      } else {
        p->receive_loss(s);
      }
    }
  }

  std::vector<CoordinationCandidate> pool;
  for (auto& p : planners) {
    if (!p || !mission_active.count(p->id())) continue;
    if (auto cand = p->prepare_candidate(round)) pool.push_back(std::move(*cand));
  }
  for (auto& p : planners) {
    if (!p || !mission_active.count(p->id())) continue;
    p->finish_coordination(pool, round);
  }
}

MetricsLog run_central_mission(const Scenario& scenario, const MissionConfig& config,
                               const std::vector<int>& starts) {
  MetricsLog log;
  log.seed = config.seed;
  log.planner = config.planner.kind;
  log.intensity = config.schedule.intensity;
  echo_config(log, config);

  std::set<int> active;
  std::vector<Path> executed(config.n_agents);
  std::vector<int> positions(starts);
  std::vector<CoverageMask> exec_masks(config.n_agents, scenario.empty_mask());
  for (int a = 0; a < config.n_agents; ++a) {
    active.insert(a);
    executed[a].agent_id = a;
    executed[a].start_vertex = starts[a];
  }
  auto rng = make_rng(config.seed, {5, 0});

  for (int step = 1; step <= config.budget; ++step) {
    for (const auto& [agent, fail_step] : config.schedule.failure_step) {
      if (fail_step <= step - 1) active.erase(agent);
    }
    const auto t0 = std::chrono::steady_clock::now();
    CentralPlanInput input;
    for (int a : active) {
      input.agents.push_back(a);
      input.positions.push_back(positions[a]);
    }
    input.remaining_budget = config.budget - (step - 1);
    input.executed_baseline = scenario.empty_mask();
    for (int a : active) input.executed_baseline |= exec_masks[a];
    const std::vector<int> actions =
        central_plan(scenario, input, config.planner.duct, config.planner.duct.iterations_per_phase,
                     rng);
    for (std::size_t i = 0; i < input.agents.size(); ++i) {
      const int a = input.agents[i];
      const int edge = actions[i];
      if (edge < 0) {
        active.erase(a);  // stranded
        continue;
      }
      executed[a].edges.push_back(edge);
      exec_masks[a] |= scenario.edge_mask(edge);
      positions[a] = scenario.graph().other_end(edge, positions[a]);
    }
    const auto t1 = std::chrono::steady_clock::now();
    StepRecord rec;
    rec.step = step;
    rec.irc = irc(scenario, executed, active);
    rec.plan_seconds = std::chrono::duration<double>(t1 - t0).count();
    log.steps.push_back(rec);
  }

  for (const auto& [agent, fail_step] : config.schedule.failure_step) {
    if (fail_step <= config.budget) active.erase(agent);
  }
  log.final_irc = irc(scenario, executed, active);
  return log;
}

}  // namespace

MetricsLog run_mission(const Scenario& scenario, const MissionConfig& config) {
  if (config.n_agents <= 0) throw std::invalid_argument("agent count must be positive");
  if (config.budget < 0) throw std::invalid_argument("budget must be non-negative");
  if (config.planner.duct.iterations_per_phase <= 0)
    throw std::invalid_argument("iterations per phase must be positive");
  if (config.planner.exchange_every <= 0)
    throw std::invalid_argument("exchange interval must be positive");

  const std::vector<int> starts = resolve_starts(scenario, config);
  if (config.planner.kind == PlannerKind::CentralMcts)
    return run_central_mission(scenario, config, starts);

  MetricsLog log;
  log.seed = config.seed;
  log.planner = config.planner.kind;
  log.intensity = config.schedule.intensity;
  echo_config(log, config);

  std::vector<int> roster(config.n_agents);
  for (int a = 0; a < config.n_agents; ++a) roster[a] = a;

  std::vector<std::unique_ptr<AgentPlanner>> planners;
  planners.reserve(config.n_agents);
  for (int a = 0; a < config.n_agents; ++a) {
    planners.push_back(std::make_unique<AgentPlanner>(scenario, a, config.planner, starts[a],
                                                      config.budget, roster,
                                                      derive_seed(config.seed, {5, static_cast<std::uint64_t>(a)})));
  }
  auto comm_rng = make_rng(config.seed, {4});

  std::set<int> active(roster.begin(), roster.end());
  std::vector<Path> executed(config.n_agents);
  for (int a = 0; a < config.n_agents; ++a) {
    executed[a].agent_id = a;
    executed[a].start_vertex = starts[a];
  }

  int round_counter = 0;
  for (int step = 1; step <= config.budget; ++step) {
    bool churn = false;
    for (const auto& [agent, fail_step] : config.schedule.failure_step) {
      if (fail_step <= step - 1 && active.count(agent)) {
        active.erase(agent);
        churn = true;
      }
    }
    if (churn && config.planner.kind == PlannerKind::DecMctsReset) {
      for (auto& p : planners) {
        if (p && active.count(p->id())) p->on_failure_observed();
      }
    }

    const auto t0 = std::chrono::steady_clock::now();
    int remaining = config.planner.duct.iterations_per_phase;
    while (remaining > 0) {
      exchange_round(planners, active, config.comm, comm_rng, round_counter);
      ++round_counter;
      const int block = std::min(config.planner.exchange_every, remaining);
      for (auto& p : planners) {
        if (p && active.count(p->id())) p->tree_iterate(block);
      }
      remaining -= block;
    }

    std::vector<int> stranded;
    for (auto& p : planners) {
      if (!p || !active.count(p->id())) continue;
      const int edge = p->best_next_action();
      if (edge < 0) {
        stranded.push_back(p->id());
        continue;
      }
      p->execute(edge);
      executed[p->id()].edges.push_back(edge);
    }
    for (int a : stranded) active.erase(a);

    const auto t1 = std::chrono::steady_clock::now();
    StepRecord rec;
    rec.step = step;
    rec.irc = irc(scenario, executed, active);
    rec.plan_seconds = std::chrono::duration<double>(t1 - t0).count();
    log.steps.push_back(rec);
  }

  for (const auto& [agent, fail_step] : config.schedule.failure_step) {
    if (fail_step <= config.budget) active.erase(agent);
  }
  log.final_irc = irc(scenario, executed, active);
  return log;
}

}  // namespace amcts

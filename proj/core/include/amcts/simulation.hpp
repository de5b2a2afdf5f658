#ifndef AMCTS_SIMULATION_HPP
#define AMCTS_SIMULATION_HPP

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amcts/planners.hpp"

namespace amcts {

// Per-directed-message Bernoulli loss.
struct CommModel {
  double loss_probability = 0.0;
};

// One exchange round's mailbox: everything posted this round, by sender.
class Bus {
 public:
  void post(IntentionMessage message) { box_.insert_or_assign(message.sender, std::move(message)); }
  const IntentionMessage* fetch(int sender) const {
    auto it = box_.find(sender);
    return it == box_.end() ? nullptr : &it->second;
  }
  void clear() { box_.clear(); }
  std::size_t size() const { return box_.size(); }

 private:
  std::map<int, IntentionMessage> box_;
};

// Draws the loss coin and posts on success. Returns whether the message made it
// onto the bus.
bool deliver(Bus& bus, const IntentionMessage& message, const CommModel& comm,
             std::mt19937_64& rng);

enum class AttritionMode { UniformRandom, ForcedAfter };

std::string attrition_mode_name(AttritionMode mode);
AttritionMode parse_attrition_mode(const std::string& name);

// failure_step[agent] = number of actions the agent completes before failing.
struct AttritionSchedule {
  std::map<int, int> failure_step;
  double intensity = 0.0;
};

// UniformRandom: round(intensity * n_agents) distinct agents fail, each after a
// uniform number of completed actions in [0, budget]. ForcedAfter: the same
// count of agents (lowest ids) fail after exactly forced_step actions.
AttritionSchedule build_attrition_schedule(std::uint64_t seed, int n_agents, double intensity,
                                           int budget, AttritionMode mode, int forced_step = 0);

struct StepRecord {
  int step = 0;
  double irc = 0.0;
  double plan_seconds = 0.0;  // wall clock, reported but never serialized
};

struct MetricsLog {
  std::uint64_t seed = 0;
  PlannerKind planner = PlannerKind::AMcts;
  double intensity = 0.0;
  std::vector<StepRecord> steps;
  double final_irc = 0.0;
  std::vector<std::pair<std::string, std::string>> config_echo;
};

struct MissionConfig {
  PlannerConfig planner;
  int n_agents = 1;
  int budget = 1;
  CommModel comm;
  AttritionSchedule schedule;
  std::uint64_t seed = 0;
  std::vector<int> starts;  // optional override; otherwise scenario starts or seeded draw
};

// Ratio of collected region value (surviving agents' executed paths) to the
// total available value.
double irc(const Scenario& scenario, std::span<const Path> executed, const std::set<int>& active);

// Plan-execute loop: failures apply at step boundaries before planning, each
// step plans one phase (with exchange barriers) and executes one edge per
// surviving agent, and the final record applies end-of-mission failures.
MetricsLog run_mission(const Scenario& scenario, const MissionConfig& config);

}  // namespace amcts

#endif  // AMCTS_SIMULATION_HPP

#include "amcts/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "amcts/rng.hpp"

namespace amcts {

const char* planner_name(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::AMcts: return "amcts";
    case PlannerKind::DecMcts: return "dec-mcts";
    case PlannerKind::DecMctsReset: return "dec-mcts-reset";
    case PlannerKind::DecMctsGlobal: return "dec-mcts-global";
    case PlannerKind::GreedyMcts: return "greedy-mcts";
    case PlannerKind::CentralMcts: return "central-mcts";
  }
  return "unknown";
}

std::optional<PlannerKind> parse_planner(const std::string& name) {
  if (name == "amcts") return PlannerKind::AMcts;
  if (name == "dec-mcts") return PlannerKind::DecMcts;
  if (name == "dec-mcts-reset") return PlannerKind::DecMctsReset;
  if (name == "dec-mcts-global") return PlannerKind::DecMctsGlobal;
  if (name == "greedy-mcts") return PlannerKind::GreedyMcts;
  if (name == "central-mcts") return PlannerKind::CentralMcts;
  return std::nullopt;
}

namespace {

bool uses_loss_detection(PlannerKind kind) {
  return kind == PlannerKind::AMcts || kind == PlannerKind::GreedyMcts;
}

std::vector<double> softmax_weights(const std::vector<double>& scores) {
  std::vector<double> w(scores.size());
  if (scores.empty()) return w;
  const double peak = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scores[i] - peak);
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

AgentPlanner::AgentPlanner(const Scenario& scenario, int agent_id, const PlannerConfig& config,
                           int start_vertex, int budget, const std::vector<int>& roster,
                           std::uint64_t rng_seed)
    : scenario_(scenario),
      agent_id_(agent_id),
      config_(config),
      tree_(agent_id, start_vertex, budget),
      position_(start_vertex),
      executed_mask_(scenario.region_count()),
      br_others_mask_(scenario.region_count()),
      rng_(rng_seed) {
  tree_.attach(&scenario_);
  known_active_.insert(roster.begin(), roster.end());
  known_active_.insert(agent_id_);
  effective_tolerance_ = uses_loss_detection(config.kind) ? config.loss_tolerance
                                                          : std::numeric_limits<int>::max();
  executed_.agent_id = agent_id_;
  executed_.start_vertex = start_vertex;
  total_value_ = scenario.total_value() > 0.0 ? scenario.total_value() : 1.0;
}

int AgentPlanner::loss_count(int peer) const {
  auto it = loss_counters_.find(peer);
  return it == loss_counters_.end() ? 0 : it->second;
}

IntentionMessage AgentPlanner::make_message(int round) {
  auto compressed = tree_.compress(config_.plan_components, config_.duct);
  own_compressed_ = compressed.sequences;
  IntentionMessage msg;
  msg.sender = agent_id_;
  msg.round = round;
  msg.sequences = std::move(compressed.sequences);
  msg.scores = std::move(compressed.scores);
  msg.executed = executed_mask_;
  msg.rm_candidate = last_candidate_;
  return msg;
}

void AgentPlanner::receive(const IntentionMessage& message) {
  if (message.sender == agent_id_) return;
  if (!known_active_.count(message.sender)) return;  // presumed failed peers stay dropped
  loss_counters_[message.sender] = 0;
  if (message.executed.words().size() == executed_mask_.words().size()) {
    peer_executed_[message.sender] = message.executed;
  }
  if (message.sequences.empty()) return;  // liveness only, keep prior belief
  Belief b;
  b.sequences = message.sequences;
  b.weights = softmax_weights(message.scores);
  b.masks.reserve(b.sequences.size());
  for (const Path& p : b.sequences) b.masks.push_back(scenario_.path_mask(p));
  beliefs_[message.sender] = std::move(b);
}

void AgentPlanner::receive_loss(int sender) {
  if (sender == agent_id_ || !known_active_.count(sender)) return;
  const int count = ++loss_counters_[sender];
  if (count >= effective_tolerance_) remove_peer(sender);
}

void AgentPlanner::remove_peer(int peer) {
  if (peer == agent_id_) return;
  known_active_.erase(peer);
  beliefs_.erase(peer);
  loss_counters_.erase(peer);
  peer_executed_.erase(peer);  // its banked coverage stops counting for the team
  // The reduced game keeps the survivors' components of the adopted profile.
  if (!best_response_.empty()) {
    std::erase_if(best_response_, [&](const auto& kv) { return kv.first == peer; });
    br_others_mask_ = scenario_.empty_mask();
    for (const auto& [_, path] : best_response_) br_others_mask_ |= scenario_.path_mask(path);
  }
}

std::optional<MatrixGame> AgentPlanner::build_game(std::vector<int>* players_out) {
  if (own_compressed_.empty()) return std::nullopt;
  std::vector<int> players;
  std::vector<std::vector<Path>> actions;
  for (int id : known_active_) {
    if (id == agent_id_) {
      players.push_back(id);
      actions.push_back(own_compressed_);
    } else if (auto it = beliefs_.find(id); it != beliefs_.end() && !it->second.sequences.empty()) {
      players.push_back(id);
      actions.push_back(it->second.sequences);
    }
  }
  if (players_out) *players_out = players;
  const CoverageMask banked = banked_mask();
  return MatrixGame::coverage_game(scenario_, std::move(players), std::move(actions), &banked);
}

void AgentPlanner::adopt_profile(const std::vector<int>& players,
                                 const std::vector<const Path*>& sequences) {
  best_response_.clear();
  br_others_mask_ = scenario_.empty_mask();
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (players[i] == agent_id_) continue;
    best_response_.emplace_back(players[i], *sequences[i]);
    br_others_mask_ |= scenario_.path_mask(*sequences[i]);
  }
}

std::optional<CoordinationCandidate> AgentPlanner::prepare_candidate(int round) {
  if (config_.kind == PlannerKind::GreedyMcts) {
    coordinate_greedy();
    return std::nullopt;
  }
  if (config_.kind != PlannerKind::AMcts) return std::nullopt;

  std::vector<int> players;
  auto game = build_game(&players);
  if (!game) return std::nullopt;
  last_game_round_ = round;
  last_game_players_ = players;

  const JointProfile profile = run_regret_matching(*game, config_.rm_rounds, rng_);
  CoordinationCandidate cand;
  cand.players = players;
  for (std::size_t i = 0; i < players.size(); ++i) {
    const Path& seq = game->player_actions(static_cast<int>(i))[profile.choice[i]];
    cand.sequences.push_back(seq);
    cand.masks.push_back(scenario_.path_mask(seq));
  }
  last_candidate_ = cand;
  return cand;
}

void AgentPlanner::finish_coordination(std::span<const CoordinationCandidate> pool, int round) {
  if (config_.kind != PlannerKind::AMcts) return;
  if (last_game_round_ != round) return;  // no game this round, keep the old profile

  const CoordinationCandidate* best = nullptr;
  double best_value = 0.0;
  for (const CoordinationCandidate& cand : pool) {
    if (cand.players != last_game_players_) continue;
    CoverageMask joint = scenario_.empty_mask();
    for (const CoverageMask& m : cand.masks) joint |= m;
    const double v = scenario_.coverage_value(joint);
    if (best == nullptr || v > best_value) {
      best = &cand;
      best_value = v;
    }
  }
  if (!best) return;
  std::vector<const Path*> seqs;
  seqs.reserve(best->sequences.size());
  for (const Path& p : best->sequences) seqs.push_back(&p);
  adopt_profile(best->players, seqs);
}

void AgentPlanner::coordinate_greedy() {
  std::vector<int> players;
  auto game = build_game(&players);
  if (!game) return;
  std::vector<int> order(players.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  const JointProfile profile = greedy_coordination(*game, order);
  std::vector<const Path*> seqs;
  seqs.reserve(players.size());
  for (std::size_t i = 0; i < players.size(); ++i) {
    seqs.push_back(&game->player_actions(static_cast<int>(i))[profile.choice[i]]);
  }
  adopt_profile(players, seqs);
}

std::size_t AgentPlanner::sample_belief(const std::vector<double>& weights) {
  const double u = uniform_double(rng_, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

// Everything the agent believes is already covered by the surviving team: its
// own executed edges plus the banked coverage peers reported while still
// considered alive. Dropping a peer erases its entry, so the regions only that
// peer had covered become worth planning for again — matching the mission
// score, which forfeits a failed agent's coverage.
CoverageMask AgentPlanner::banked_mask() const {
  CoverageMask banked = executed_mask_;
  for (const auto& [peer, mask] : peer_executed_) banked |= mask;
  return banked;
}

double AgentPlanner::rollout_reward(const Path& rollout) {
  CoverageMask own = scenario_.path_mask(rollout);
  own |= banked_mask();
  switch (config_.kind) {
    case PlannerKind::AMcts:
    case PlannerKind::GreedyMcts: {
      own |= br_others_mask_;
      return scenario_.coverage_value(own) / total_value_;
    }
    case PlannerKind::DecMcts:
    case PlannerKind::DecMctsReset: {
      CoverageMask others = banked_mask();
      for (const auto& [peer, belief] : beliefs_) {
        others |= belief.masks[sample_belief(belief.weights)];
      }
      const double without = scenario_.coverage_value(others);
      others |= own;
      return (scenario_.coverage_value(others) - without) / total_value_;
    }
    case PlannerKind::DecMctsGlobal: {
      for (const auto& [peer, belief] : beliefs_) {
        own |= belief.masks[sample_belief(belief.weights)];
      }
      return scenario_.coverage_value(own) / total_value_;
    }
    case PlannerKind::CentralMcts:
      throw std::logic_error("central planning does not run per-agent trees");
  }
  return 0.0;
}

void AgentPlanner::tree_iterate(int iterations) {
  for (int i = 0; i < iterations; ++i) {
    tree_.run_iteration(config_.duct, rng_, [this](const Path& p) { return rollout_reward(p); });
  }
}

int AgentPlanner::best_next_action() const { return tree_.best_next_action(config_.duct); }

void AgentPlanner::execute(int edge) {
  if (tree_.root().children.find(edge) == tree_.root().children.end()) {
    // The tree never tried this edge; rebuild below it to stay consistent.
    if (!is_valid_path(scenario_, Path{agent_id_, position_, {edge}}))
      throw std::invalid_argument("executed edge is not incident to the current position");
    tree_.reset(scenario_.graph().other_end(edge, position_), tree_.budget() - 1);
  } else {
    tree_.prune_to_child(edge);
  }
  position_ = scenario_.graph().other_end(edge, position_);
  executed_.edges.push_back(edge);
  executed_mask_ |= scenario_.edge_mask(edge);
}

void AgentPlanner::on_failure_observed() {
  if (config_.kind != PlannerKind::DecMctsReset) return;
  tree_.reset(position_, tree_.budget());
}

int plan_phase(AgentPlanner& planner, int iterations) {
  planner.tree_iterate(iterations);
  return planner.best_next_action();
}

std::vector<int> central_plan(const Scenario& scenario, const CentralPlanInput& input,
                              const DuctParams& params, int iterations, std::mt19937_64& rng) {
  const int n = static_cast<int>(input.agents.size());
  if (n == 0) return {};
  const int max_depth = n * input.remaining_budget;
  const double total = scenario.total_value() > 0.0 ? scenario.total_value() : 1.0;

  TreeNode root;
  root.vertex = -1;
  std::int64_t iteration = 0;

  auto incident_of = [&](int vertex) -> const std::vector<int>& {
    return scenario.graph().incident[vertex];
  };

  for (int it = 0; it < iterations; ++it) {
    ++iteration;
    std::vector<int> positions = input.positions;
    std::vector<TreeNode*> path{&root};
    TreeNode* node = &root;
    if (node->disc_visits == 0.0 && node->children.empty() && node->untried.empty()) {
      node->untried = incident_of(positions[0]);
      if (max_depth == 0) node->untried.clear();
    }
    // Selection and expansion over the interleaved joint tree.
    while (true) {
      if (node->depth >= max_depth) break;
      if (!node->untried.empty()) {
        const auto pick = uniform_index(rng, node->untried.size());
        const int edge = node->untried[pick];
        node->untried[pick] = node->untried.back();
        node->untried.pop_back();
        const int acting = node->depth % n;
        auto child = std::make_unique<TreeNode>();
        child->incoming_edge = edge;
        child->vertex = scenario.graph().other_end(edge, positions[acting]);
        child->depth = node->depth + 1;
        child->created_at = iteration;
        child->last_update = iteration;
        positions[acting] = child->vertex;
        if (child->depth < max_depth) child->untried = incident_of(positions[child->depth % n]);
        TreeNode* raw = child.get();
        node->children.emplace(edge, std::move(child));
        path.push_back(raw);
        node = raw;
        break;
      }
      if (node->children.empty()) break;
      TreeNode* best = nullptr;
      double best_score = 0.0;
      for (const auto& [edge, child] : node->children) {
        const double s = duct_score(*child, *node, params, iteration);
        if (best == nullptr || s > best_score) {
          best = child.get();
          best_score = s;
        }
      }
      const int acting = node->depth % n;
      positions[acting] = best->vertex;
      path.push_back(best);
      node = best;
    }

    // Random completion, interleaved agent by agent.
    std::vector<Path> joint(n);
    for (int i = 0; i < n; ++i) {
      joint[i].agent_id = input.agents[i];
      joint[i].start_vertex = input.positions[i];
    }
    {
      std::vector<int> replay = input.positions;
      for (std::size_t k = 1; k < path.size(); ++k) {
        const int acting = path[k - 1]->depth % n;
        joint[acting].edges.push_back(path[k]->incoming_edge);
        replay[acting] = path[k]->vertex;
      }
      for (int depth = node->depth; depth < max_depth; ++depth) {
        const int acting = depth % n;
        const auto& incident = incident_of(replay[acting]);
        if (incident.empty()) continue;
        const int edge = incident[uniform_index(rng, incident.size())];
        joint[acting].edges.push_back(edge);
        replay[acting] = scenario.graph().other_end(edge, replay[acting]);
      }
    }

    CoverageMask m = input.executed_baseline;
    for (const Path& p : joint) m |= scenario.path_mask(p);
    const double reward = scenario.coverage_value(m) / total;

    for (TreeNode* v : path) {
      v->decay_to(params.gamma, iteration);
      v->disc_visits += 1.0;
      v->disc_reward_sum += reward;
    }
  }

  // Read off the first action of every agent along the most-visited chain.
  std::vector<int> actions(n, -1);
  std::vector<int> positions = input.positions;
  const TreeNode* node = &root;
  for (int slot = 0; slot < n && slot < max_depth; ++slot) {
    const int acting = node->depth % n;
    const TreeNode* best = nullptr;
    double best_visits = -1.0;
    for (const auto& [edge, child] : node->children) {
      const double v = child->decayed_visits(params.gamma, iteration);
      if (v > best_visits) {
        best_visits = v;
        best = child.get();
      }
    }
    int chosen = -1;
    if (best) {
      chosen = best->incoming_edge;
    } else {
      const auto& incident = incident_of(positions[acting]);
      if (!incident.empty()) chosen = incident.front();
    }
    actions[acting] = chosen;
    if (chosen < 0) break;
    positions[acting] = scenario.graph().other_end(chosen, positions[acting]);
    if (best) {
      node = best;
    } else {
      break;
    }
  }
  return actions;
}

}  // namespace amcts

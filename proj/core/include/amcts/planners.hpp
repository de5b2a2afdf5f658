#ifndef AMCTS_PLANNERS_HPP
#define AMCTS_PLANNERS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "amcts/coordination.hpp"
#include "amcts/environment.hpp"
#include "amcts/search_tree.hpp"

namespace amcts {

enum class PlannerKind {
  AMcts,          // rollout reward: joint utility with the coordinated best response
  DecMcts,        // marginal utility against intentions sampled from beliefs
  DecMctsReset,   // DecMcts that rebuilds its tree when a churn is observed
  DecMctsGlobal,  // joint utility against sampled intentions
  GreedyMcts,     // best response from sequential greedy instead of regret matching
  CentralMcts,    // one interleaved tree over all agents
};

const char* planner_name(PlannerKind kind);
std::optional<PlannerKind> parse_planner(const std::string& name);

struct PlannerConfig {
  PlannerKind kind = PlannerKind::AMcts;
  DuctParams duct;
  int plan_components = 10;  // sequences kept per compressed plan set
  int exchange_every = 50;   // tree iterations between exchanges
  int rm_rounds = 200;       // regret-matching rounds per coordination event
  int loss_tolerance = 5;    // consecutive losses before a peer is presumed failed
};

// Sender's compressed plan set broadcast at an exchange. The regret-matching
// candidate rides along for interface completeness; candidate pooling itself
// happens in-process at the coordination barrier.
struct CoordinationCandidate {
  std::vector<int> players;  // ascending agent ids
  std::vector<Path> sequences;
  std::vector<CoverageMask> masks;
};

struct IntentionMessage {
  int sender = 0;
  int round = 0;
  std::vector<Path> sequences;
  std::vector<double> scores;
  CoverageMask executed;  // coverage the sender has already banked by moving
  std::optional<CoordinationCandidate> rm_candidate;
};

// One agent's decentralized planner: a discounted search tree, beliefs about
// peers' compressed plans, and the coordination state for its kind.
//
// Attrition detection by consecutive communication losses is the
// AMcts/GreedyMcts mechanism; the DecMcts variants never presume a peer failed
// (their tolerance is unbounded), so their beliefs can go stale. That
// difference is the point of the comparison.
class AgentPlanner {
 public:
  AgentPlanner(const Scenario& scenario, int agent_id, const PlannerConfig& config,
               int start_vertex, int budget, const std::vector<int>& roster,
               std::uint64_t rng_seed);

  int id() const { return agent_id_; }
  PlannerKind kind() const { return config_.kind; }
  const std::set<int>& known_active() const { return known_active_; }
  int position() const { return position_; }
  int remaining_budget() const { return tree_.budget(); }
  SearchTree& tree() { return tree_; }
  const SearchTree& tree() const { return tree_; }
  const Path& executed_path() const { return executed_; }
  const CoverageMask& executed_mask() const { return executed_mask_; }
  int loss_count(int peer) const;
  bool has_belief(int peer) const { return beliefs_.count(peer) > 0; }

  // Compress the tree and produce this round's broadcast.
  IntentionMessage make_message(int round);

  // Delivered message: refresh the sender's belief, clear its loss counter.
  void receive(const IntentionMessage& message);
  // Lost or absent message: bump the counter; at the tolerance the peer is
  // dropped and the coordination state rebuilt without it.
  void receive_loss(int sender);

  // Coordination barrier, first half: AMcts runs its own regret-matching
  // instance over the game built from its beliefs and returns the candidate
  // profile. GreedyMcts adopts its greedy best response directly.
  std::optional<CoordinationCandidate> prepare_candidate(int round);
  // Second half: AMcts adopts the payoff-dominant candidate from the pool.
  void finish_coordination(std::span<const CoordinationCandidate> pool, int round);

  // Run tree iterations with this kind's rollout reward.
  void tree_iterate(int iterations);

  // Root action with the highest decayed visit count; -1 when stranded.
  int best_next_action() const;

  // Advance along the edge: prune the tree, extend the executed path.
  void execute(int edge);

  // Churn observation for DecMctsReset: rebuild the tree at the current state.
  void on_failure_observed();

  // Drop a peer and everything learned from it. Exposed for direct injection
  // in controlled experiments; receive_loss reaches this at the tolerance.
  void remove_peer(int peer);

  const std::vector<std::pair<int, Path>>& best_response() const { return best_response_; }

 private:
  struct Belief {
    std::vector<Path> sequences;
    std::vector<double> weights;  // softmax of broadcast scores, temperature 1
    std::vector<CoverageMask> masks;
  };

  double rollout_reward(const Path& rollout);
  CoverageMask banked_mask() const;
  std::size_t sample_belief(const std::vector<double>& weights);
  void coordinate_greedy();
  void adopt_profile(const std::vector<int>& players, const std::vector<const Path*>& sequences);
  std::optional<MatrixGame> build_game(std::vector<int>* players_out);

  const Scenario& scenario_;
  int agent_id_;
  PlannerConfig config_;
  SearchTree tree_;
  int position_;
  std::set<int> known_active_;
  std::map<int, Belief> beliefs_;
  std::map<int, int> loss_counters_;
  std::map<int, CoverageMask> peer_executed_;  // banked coverage of known-active peers
  int effective_tolerance_;
  Path executed_;
  CoverageMask executed_mask_;
  std::vector<std::pair<int, Path>> best_response_;  // adopted peers' sequences
  CoverageMask br_others_mask_;
  std::vector<Path> own_compressed_;
  std::optional<CoordinationCandidate> last_candidate_;
  int last_game_round_ = -1;
  std::vector<int> last_game_players_;
  double total_value_;
  std::mt19937_64 rng_;
};

// Solo planning phase: iterate the tree for a full phase and return the chosen
// next action (-1 when stranded). Exchange plumbing is a mission concern; a
// lone agent has no peers to talk to.
int plan_phase(AgentPlanner& planner, int iterations);

// Snapshot of every active agent for the centralized baseline.
struct CentralPlanInput {
  std::vector<int> agents;     // ascending ids
  std::vector<int> positions;  // aligned with agents
  int remaining_budget = 0;
  CoverageMask executed_baseline;
};

// One interleaved tree: the action at depth d belongs to agents[d mod n].
// Returns each agent's next edge (-1 when stranded), aligned with input.agents.
std::vector<int> central_plan(const Scenario& scenario, const CentralPlanInput& input,
                              const DuctParams& params, int iterations, std::mt19937_64& rng);

}  // namespace amcts

#endif  // AMCTS_PLANNERS_HPP

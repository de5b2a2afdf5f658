#ifndef AMCTS_SEARCH_TREE_HPP
#define AMCTS_SEARCH_TREE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "amcts/environment.hpp"

namespace amcts {

struct DuctParams {
  double gamma = 0.9;  // discount on visit counts and reward sums, (1/2, 1]
  double c_p = 0.4;    // exploration constant, > 1/sqrt(8)
  int iterations_per_phase = 500;
  int rollout_horizon = 0;  // remaining action budget
};

// Discounted statistics decay lazily: stored values are exact as of
// last_update, and a read at iteration t multiplies by gamma^(t - last_update).
struct TreeNode {
  int incoming_edge = -1;  // -1 at the root
  int vertex = 0;
  int depth = 0;
  std::int64_t created_at = 0;
  std::int64_t last_update = 0;
  double disc_visits = 0.0;
  double disc_reward_sum = 0.0;
  double best_rollout_reward = 0.0;
  std::optional<Path> best_rollout;  // highest-reward rollout through this node
  std::vector<int> untried;          // feasible edges not yet expanded
  std::map<int, std::unique_ptr<TreeNode>> children;  // keyed by edge id

  double decayed_visits(double gamma, std::int64_t now) const;
  double decayed_reward_sum(double gamma, std::int64_t now) const;
  // Discounted empirical average; zero when the decayed count is zero.
  double decayed_mean(double gamma, std::int64_t now) const;
  void decay_to(double gamma, std::int64_t now);
};

// Discounted UCB score of a child under its parent: decayed mean plus
// 2 c_p sqrt(log(max(parent_count, e)) / child_count). The clamp keeps the
// bonus real and non-negative; a decayed parent count below 1 is flagged as
// degenerate but still scored.
double duct_score(const TreeNode& child, const TreeNode& parent, const DuctParams& params,
                  std::int64_t now, bool* degenerate = nullptr);

class SearchTree {
 public:
  SearchTree(int agent_id, int root_vertex, int budget);

  const TreeNode& root() const { return *root_; }
  TreeNode& root() { return *root_; }
  int agent_id() const { return agent_id_; }
  int root_vertex() const { return root_vertex_; }
  int budget() const { return budget_; }
  std::int64_t now() const { return iteration_; }

  void attach(const Scenario* scenario) { scenario_ = scenario; }

  // Walks the tree by discounted UCB, expanding one untried action when
  // available. Returns the root-to-leaf node path. Advances the iteration
  // counter; pair with exactly one backpropagate call.
  std::vector<TreeNode*> select_and_expand(const DuctParams& params, std::mt19937_64& rng);

  // Extends the leaf's action prefix with uniformly random feasible edges until
  // the horizon, terminating early only at isolated vertices.
  Path rollout(const std::vector<TreeNode*>& node_path, const DuctParams& params,
               std::mt19937_64& rng) const;

  // Decays every node on the path to the current iteration, then adds one visit
  // and the reward.
  void backpropagate(const std::vector<TreeNode*>& node_path, double reward,
                     const DuctParams& params);

  // One full iteration: select, roll out, score via reward_fn, backpropagate,
  // and cache best rollouts. Returns the rollout reward.
  double run_iteration(const DuctParams& params, std::mt19937_64& rng,
                       const std::function<double(const Path&)>& reward_fn);

  // The M highest decayed-mean nodes' cached best rollouts, distinct by action
  // sequence, scores non-increasing. May return fewer than M entries.
  struct Compressed {
    std::vector<Path> sequences;
    std::vector<double> scores;
  };
  Compressed compress(int m, const DuctParams& params) const;

  // Re-roots at the child reached by the executed edge; subtree statistics
  // survive, depths shift, cached rollouts drop the executed action.
  void prune_to_child(int edge);

  // Root child with the highest decayed visit count (ties: lowest edge id).
  // -1 when the root has no children.
  int best_next_action(const DuctParams& params) const;

  void reset(int root_vertex, int budget);

  int node_count() const;

 private:
  TreeNode* make_node(int incoming_edge, int vertex, int depth);
  std::vector<int> feasible_edges(int vertex, int depth) const;

  const Scenario* scenario_ = nullptr;
  std::unique_ptr<TreeNode> root_;
  int agent_id_ = 0;
  int root_vertex_ = 0;
  int budget_ = 0;
  std::int64_t iteration_ = 0;
};

}  // namespace amcts

#endif  // AMCTS_SEARCH_TREE_HPP

#include "amcts/search_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amcts/rng.hpp"

namespace amcts {

double TreeNode::decayed_visits(double gamma, std::int64_t now) const {
  return disc_visits * std::pow(gamma, static_cast<double>(now - last_update));
}

double TreeNode::decayed_reward_sum(double gamma, std::int64_t now) const {
  return disc_reward_sum * std::pow(gamma, static_cast<double>(now - last_update));
}

double TreeNode::decayed_mean(double gamma, std::int64_t now) const {
  // The common decay factor cancels in the ratio.
  (void)gamma;
  (void)now;
  if (disc_visits <= 0.0) return 0.0;
  return disc_reward_sum / disc_visits;
}

void TreeNode::decay_to(double gamma, std::int64_t now) {
  const double f = std::pow(gamma, static_cast<double>(now - last_update));
  disc_visits *= f;
  disc_reward_sum *= f;
  last_update = now;
}

double duct_score(const TreeNode& child, const TreeNode& parent, const DuctParams& params,
                  std::int64_t now, bool* degenerate) {
  const double nc = child.decayed_visits(params.gamma, now);
  const double np = parent.decayed_visits(params.gamma, now);
  if (degenerate) *degenerate = np < 1.0;
  if (nc <= 0.0) throw std::invalid_argument("duct_score needs a visited child");
  const double mean = child.decayed_reward_sum(params.gamma, now) / nc;
  const double log_np = std::log(std::max(np, std::exp(1.0)));
  return mean + 2.0 * params.c_p * std::sqrt(log_np / nc);
}

SearchTree::SearchTree(int agent_id, int root_vertex, int budget)
    : agent_id_(agent_id), root_vertex_(root_vertex), budget_(budget) {
  root_ = std::make_unique<TreeNode>();
  root_->vertex = root_vertex;
}

std::vector<int> SearchTree::feasible_edges(int vertex, int depth) const {
  if (depth >= budget_) return {};
  return scenario_->graph().incident[vertex];
}

TreeNode* SearchTree::make_node(int incoming_edge, int vertex, int depth) {
  auto node = std::make_unique<TreeNode>();
  node->incoming_edge = incoming_edge;
  node->vertex = vertex;
  node->depth = depth;
  node->created_at = iteration_;
  node->last_update = iteration_;
  node->untried = feasible_edges(vertex, depth);
  return node.release();
}

std::vector<TreeNode*> SearchTree::select_and_expand(const DuctParams& params,
                                                     std::mt19937_64& rng) {
  if (!scenario_) throw std::logic_error("search tree has no scenario attached");
  ++iteration_;
  if (root_->untried.empty() && root_->children.empty() && root_->disc_visits == 0.0) {
    // Fresh root: populate the untried set on first use.
    root_->untried = feasible_edges(root_vertex_, 0);
  }

  std::vector<TreeNode*> path;
  TreeNode* node = root_.get();
  path.push_back(node);
  while (true) {
    if (node->depth >= budget_) return path;
    if (!node->untried.empty()) {
      const auto pick = uniform_index(rng, node->untried.size());
      const int edge = node->untried[pick];
      node->untried[pick] = node->untried.back();
      node->untried.pop_back();
      TreeNode* child = make_node(edge, scenario_->graph().other_end(edge, node->vertex),
                                  node->depth + 1);
      node->children.emplace(edge, std::unique_ptr<TreeNode>(child));
      path.push_back(child);
      return path;
    }
    if (node->children.empty()) return path;  // isolated vertex, nothing feasible
    TreeNode* best = nullptr;
    double best_score = 0.0;
    for (const auto& [edge, child] : node->children) {
      const double s = duct_score(*child, *node, params, iteration_);
      if (best == nullptr || s > best_score) {
        best = child.get();
        best_score = s;
      }
    }
    node = best;
    path.push_back(node);
  }
}

Path SearchTree::rollout(const std::vector<TreeNode*>& node_path, const DuctParams& params,
                         std::mt19937_64& rng) const {
  Path p;
  p.agent_id = agent_id_;
  p.start_vertex = root_vertex_;
  for (std::size_t i = 1; i < node_path.size(); ++i) p.edges.push_back(node_path[i]->incoming_edge);
  const TreeNode* leaf = node_path.back();
  int vertex = leaf->vertex;
  int depth = leaf->depth;
  const int horizon = params.rollout_horizon > 0 ? std::min(params.rollout_horizon, budget_)
                                                 : budget_;
  while (depth < horizon) {
    const auto& incident = scenario_->graph().incident[vertex];
    if (incident.empty()) break;
    const int edge = incident[uniform_index(rng, incident.size())];
    p.edges.push_back(edge);
    vertex = scenario_->graph().other_end(edge, vertex);
    ++depth;
  }
  return p;
}

void SearchTree::backpropagate(const std::vector<TreeNode*>& node_path, double reward,
                               const DuctParams& params) {
  for (TreeNode* node : node_path) {
    node->decay_to(params.gamma, iteration_);
    node->disc_visits += 1.0;
    node->disc_reward_sum += reward;
  }
}

double SearchTree::run_iteration(const DuctParams& params, std::mt19937_64& rng,
                                 const std::function<double(const Path&)>& reward_fn) {
  auto path = select_and_expand(params, rng);
  Path sequence = rollout(path, params, rng);
  const double reward = reward_fn(sequence);
  backpropagate(path, reward, params);
  for (TreeNode* node : path) {
    if (!node->best_rollout || reward > node->best_rollout_reward) {
      node->best_rollout_reward = reward;
      node->best_rollout = sequence;
    }
  }
  return reward;
}

SearchTree::Compressed SearchTree::compress(int m, const DuctParams& params) const {
  struct Entry {
    const TreeNode* node;
    double mean;
    std::int64_t created;
  };
  std::vector<Entry> entries;
  std::vector<const TreeNode*> stack{root_.get()};
  while (!stack.empty()) {
    const TreeNode* node = stack.back();
    stack.pop_back();
    if (node->disc_visits > 0.0 && node->best_rollout) {
      entries.push_back({node, node->decayed_mean(params.gamma, iteration_), node->created_at});
    }
    for (auto it = node->children.rbegin(); it != node->children.rend(); ++it)
      stack.push_back(it->second.get());
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    return a.created < b.created;
  });

  Compressed out;
  for (const Entry& e : entries) {
    if (static_cast<int>(out.sequences.size()) >= m) break;
    const Path& cand = *e.node->best_rollout;
    bool duplicate = false;
    for (const Path& kept : out.sequences) {
      if (kept.edges == cand.edges && kept.start_vertex == cand.start_vertex) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    out.sequences.push_back(cand);
    out.scores.push_back(e.mean);
  }
  return out;
}

void SearchTree::prune_to_child(int edge) {
  auto it = root_->children.find(edge);
  if (it == root_->children.end())
    throw std::invalid_argument("prune target is not a child of the root");
  std::unique_ptr<TreeNode> new_root = std::move(it->second);
  root_ = std::move(new_root);
  root_->incoming_edge = -1;
  root_vertex_ = root_->vertex;
  budget_ -= 1;

  // Shift depths and rebase cached rollouts; every cached rollout in this
  // subtree starts with the executed edge.
  std::vector<TreeNode*> stack{root_.get()};
  while (!stack.empty()) {
    TreeNode* node = stack.back();
    stack.pop_back();
    node->depth -= 1;
    if (node->best_rollout) {
      Path& p = *node->best_rollout;
      if (!p.edges.empty() && p.edges.front() == edge) {
        p.start_vertex = root_vertex_;
        p.edges.erase(p.edges.begin());
      } else {
        node->best_rollout.reset();
        node->best_rollout_reward = 0.0;
      }
    }
    for (auto& [_, child] : node->children) stack.push_back(child.get());
  }
}

int SearchTree::best_next_action(const DuctParams& params) const {
  int best_edge = -1;
  double best_visits = -1.0;
  for (const auto& [edge, child] : root_->children) {
    const double v = child->decayed_visits(params.gamma, iteration_);
    if (v > best_visits) {
      best_visits = v;
      best_edge = edge;
    }
  }
  return best_edge;
}

void SearchTree::reset(int root_vertex, int budget) {
  root_ = std::make_unique<TreeNode>();
  root_->vertex = root_vertex;
  root_vertex_ = root_vertex;
  budget_ = budget;
  iteration_ = 0;
}

int SearchTree::node_count() const {
  int count = 0;
  std::vector<const TreeNode*> stack{root_.get()};
  while (!stack.empty()) {
    const TreeNode* node = stack.back();
    stack.pop_back();
    ++count;
    for (const auto& [_, child] : node->children) stack.push_back(child.get());
  }
  return count;
}

}  // namespace amcts

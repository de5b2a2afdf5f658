#include "amcts/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amcts/rng.hpp"

namespace amcts {

MatrixGame MatrixGame::coverage_game(const Scenario& scenario, std::vector<int> players,
                                     std::vector<std::vector<Path>> actions,
                                     const CoverageMask* baseline) {
  if (players.size() != actions.size())
    throw std::invalid_argument("one action set per player required");
  MatrixGame g;
  g.scenario_ = &scenario;
  g.players_ = std::move(players);
  g.actions_ = std::move(actions);
  for (std::size_t i = 0; i < g.actions_.size(); ++i) {
    if (g.actions_[i].empty()) throw std::invalid_argument("every player needs at least one action");
    g.action_counts_.push_back(static_cast<int>(g.actions_[i].size()));
    std::vector<CoverageMask> row;
    row.reserve(g.actions_[i].size());
    for (const Path& p : g.actions_[i]) row.push_back(scenario.path_mask(p));
    g.masks_.push_back(std::move(row));
  }
  if (baseline) {
    g.baseline_ = *baseline;
    g.has_baseline_ = true;
  }
  return g;
}

MatrixGame MatrixGame::oracle_game(std::vector<int> players, std::vector<int> action_counts,
                                   std::function<double(const JointProfile&)> oracle) {
  if (players.size() != action_counts.size())
    throw std::invalid_argument("one action count per player required");
  for (int c : action_counts) {
    if (c <= 0) throw std::invalid_argument("every player needs at least one action");
  }
  MatrixGame g;
  g.players_ = std::move(players);
  g.action_counts_ = std::move(action_counts);
  g.oracle_ = std::move(oracle);
  return g;
}

double MatrixGame::utility(const JointProfile& profile) const {
  if (profile.choice.size() != players_.size())
    throw std::invalid_argument("profile length must match the player count");
  ++calls_;
  if (auto it = memo_.find(profile.choice); it != memo_.end()) return it->second;

  double value = 0.0;
  if (oracle_) {
    value = oracle_(profile);
  } else {
    CoverageMask m = has_baseline_ ? baseline_ : scenario_->empty_mask();
    for (std::size_t i = 0; i < profile.choice.size(); ++i) {
      const int c = profile.choice[i];
      if (c < 0) continue;
      if (c >= action_counts_[i]) throw std::invalid_argument("action index out of range");
      m |= masks_[i][c];
    }
    value = scenario_->coverage_value(m);
  }
  if (memo_.size() < kMemoCap) memo_.emplace(profile.choice, value);
  return value;
}

std::uint64_t MatrixGame::profile_space() const {
  std::uint64_t space = 1;
  for (int c : action_counts_) {
    if (space > (UINT64_MAX / static_cast<std::uint64_t>(c))) return UINT64_MAX;
    space *= static_cast<std::uint64_t>(c);
  }
  return space;
}

RegretState RegretState::init(const MatrixGame& game) {
  RegretState s;
  s.regret.resize(game.player_count());
  s.strategy.resize(game.player_count());
  for (int i = 0; i < game.player_count(); ++i) {
    s.regret[i].assign(game.action_count(i), 0.0);
    s.strategy[i] = regret_probabilities(s.regret[i]);
  }
  return s;
}

std::vector<double> regret_probabilities(std::span<const double> regret_row) {
  if (regret_row.empty()) throw std::invalid_argument("empty regret row");
  double positive_sum = 0.0;
  for (double r : regret_row) positive_sum += std::max(r, 0.0);
  std::vector<double> p(regret_row.size());
  if (positive_sum > 0.0) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::max(regret_row[i], 0.0) / positive_sum;
  } else {
    const double u = 1.0 / static_cast<double>(p.size());
    for (double& v : p) v = u;
  }
  return p;
}

JointProfile sample_profile(const MatrixGame& game, const RegretState& state,
                            std::mt19937_64& rng) {
  JointProfile profile;
  profile.choice.resize(game.player_count());
  for (int i = 0; i < game.player_count(); ++i) {
    const auto& p = state.strategy[i];
    const double u = uniform_double(rng, 0.0, 1.0);
    double acc = 0.0;
    int pick = static_cast<int>(p.size()) - 1;
    for (std::size_t m = 0; m < p.size(); ++m) {
      acc += p[m];
      if (u < acc) {
        pick = static_cast<int>(m);
        break;
      }
    }
    profile.choice[i] = pick;
  }
  return profile;
}

void apply_profile_regrets(const MatrixGame& game, RegretState& state,
                           const JointProfile& sampled) {
  const double realized = game.utility(sampled);
  for (int i = 0; i < game.player_count(); ++i) {
    JointProfile deviated = sampled;
    for (int m = 0; m < game.action_count(i); ++m) {
      deviated.choice[i] = m;
      state.regret[i][m] += game.utility(deviated) - realized;
    }
    state.strategy[i] = regret_probabilities(state.regret[i]);
  }
  ++state.rounds;
}

void regret_matching_round(const MatrixGame& game, RegretState& state, std::mt19937_64& rng) {
  const JointProfile sampled = sample_profile(game, state, rng);
  apply_profile_regrets(game, state, sampled);
}

JointProfile run_regret_matching(const MatrixGame& game, int rounds, std::mt19937_64& rng,
                                 std::vector<JointProfile>* trajectory,
                                 RegretState* final_state) {
  if (rounds < 0) throw std::invalid_argument("round count must be non-negative");
  RegretState state = RegretState::init(game);
  for (int t = 0; t < rounds; ++t) {
    const JointProfile sampled = sample_profile(game, state, rng);
    if (trajectory) trajectory->push_back(sampled);
    apply_profile_regrets(game, state, sampled);
  }
  JointProfile out;
  out.choice.resize(game.player_count());
  for (int i = 0; i < game.player_count(); ++i) {
    const auto& p = state.strategy[i];
    int best = 0;
    for (int m = 1; m < game.action_count(i); ++m) {
      if (p[m] > p[best]) best = m;
    }
    out.choice[i] = best;
  }
  if (final_state) *final_state = std::move(state);
  return out;
}

JointProfile select_payoff_dominant(std::span<const JointProfile> candidates,
                                    const MatrixGame& game) {
  if (candidates.empty()) throw std::invalid_argument("no candidates to select from");
  std::size_t best = 0;
  double best_value = game.utility(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double v = game.utility(candidates[i]);
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return candidates[best];
}

JointProfile greedy_coordination(const MatrixGame& game, std::span<const int> order) {
  if (static_cast<int>(order.size()) != game.player_count())
    throw std::invalid_argument("order must list every player exactly once");
  std::vector<bool> used(game.player_count(), false);
  for (int idx : order) {
    if (idx < 0 || idx >= game.player_count() || used[idx])
      throw std::invalid_argument("order must be a permutation of player indices");
    used[idx] = true;
  }
  JointProfile profile;
  profile.choice.assign(game.player_count(), -1);
  for (int idx : order) {
    int best = 0;
    double best_value = 0.0;
    for (int m = 0; m < game.action_count(idx); ++m) {
      profile.choice[idx] = m;
      const double v = game.utility(profile);
      if (m == 0 || v > best_value) {
        best = m;
        best_value = v;
      }
    }
    profile.choice[idx] = best;
  }
  return profile;
}

std::pair<JointProfile, double> exhaustive_optimal(const MatrixGame& game, std::uint64_t cap) {
  if (game.profile_space() > cap)
    throw std::runtime_error("profile space exceeds the enumeration cap");
  JointProfile current;
  current.choice.assign(game.player_count(), 0);
  JointProfile best = current;
  double best_value = game.utility(current);
  while (true) {
    // Odometer over profiles in lexicographic order; strict improvement keeps
    // the lexicographically smallest maximizer.
    int i = game.player_count() - 1;
    while (i >= 0) {
      if (++current.choice[i] < game.action_count(i)) break;
      current.choice[i] = 0;
      --i;
    }
    if (i < 0) break;
    const double v = game.utility(current);
    if (v > best_value) {
      best = current;
      best_value = v;
    }
  }
  return {best, best_value};
}

bool is_psne(const MatrixGame& game, const JointProfile& profile) {
  const double base = game.utility(profile);
  for (int i = 0; i < game.player_count(); ++i) {
    JointProfile deviated = profile;
    for (int m = 0; m < game.action_count(i); ++m) {
      if (m == profile.choice[i]) continue;
      deviated.choice[i] = m;
      if (game.utility(deviated) > base) return false;
    }
  }
  return true;
}

bool pfo_value_match(double achieved, double optimal) {
  return std::abs(achieved - optimal) <= 1e-9 * std::max(1.0, std::abs(optimal));
}

PfoRno pfo_rno(std::span<const std::pair<JointProfile, const MatrixGame*>> results) {
  PfoRno out;
  out.games = static_cast<int>(results.size());
  if (results.empty()) return out;
  int found = 0;
  double ratio_sum = 0.0;
  int ratio_count = 0;
  for (const auto& [achieved, game] : results) {
    const auto [opt_profile, opt_value] = exhaustive_optimal(*game);
    const double achieved_value = game->utility(achieved);
    if (pfo_value_match(achieved_value, opt_value)) ++found;
    if (opt_value > 0.0) {
      ratio_sum += achieved_value / opt_value;
      ++ratio_count;
    } else {
      ++out.zero_optimal_excluded;
    }
  }
  out.pfo = static_cast<double>(found) / static_cast<double>(out.games);
  out.rno = ratio_count > 0 ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
  return out;
}

}  // namespace amcts

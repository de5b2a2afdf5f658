#ifndef AMCTS_COORDINATION_HPP
#define AMCTS_COORDINATION_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "amcts/environment.hpp"

namespace amcts {

// One action index per player, aligned with the game's player list. An entry of
// -1 marks a player as uncommitted (used by sequential greedy evaluation);
// uncommitted players contribute nothing to coverage utilities.
struct JointProfile {
  std::vector<int> choice;
  bool operator==(const JointProfile&) const = default;
};

// Identical-interest finite game. Every utility evaluation goes through
// utility(), which counts calls; a bounded memo underneath avoids recomputing
// repeated profiles without affecting the count.
class MatrixGame {
 public:
  // Coverage oracle: each player's actions are paths; the payoff is the value
  // of the union of chosen paths' regions plus an optional baseline mask.
  static MatrixGame coverage_game(const Scenario& scenario, std::vector<int> players,
                                  std::vector<std::vector<Path>> actions,
                                  const CoverageMask* baseline = nullptr);

  // Arbitrary oracle for constructed instances; must accept -1 entries.
  static MatrixGame oracle_game(std::vector<int> players, std::vector<int> action_counts,
                                std::function<double(const JointProfile&)> oracle);

  int player_count() const { return static_cast<int>(players_.size()); }
  const std::vector<int>& players() const { return players_; }
  int action_count(int player_index) const { return action_counts_[player_index]; }
  const std::vector<Path>& player_actions(int player_index) const {
    return actions_[player_index];
  }

  double utility(const JointProfile& profile) const;
  std::uint64_t utility_calls() const { return calls_; }
  void reset_utility_calls() { calls_ = 0; }

  std::uint64_t profile_space() const;

 private:
  std::vector<int> players_;
  std::vector<int> action_counts_;
  std::vector<std::vector<Path>> actions_;            // empty for oracle games
  std::vector<std::vector<CoverageMask>> masks_;      // per player per action
  const Scenario* scenario_ = nullptr;
  CoverageMask baseline_;
  bool has_baseline_ = false;
  std::function<double(const JointProfile&)> oracle_;

  struct ChoiceHash {
    std::size_t operator()(const std::vector<int>& v) const {
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (int c : v) {
        h ^= static_cast<std::uint64_t>(c + 1);
        h *= 0x100000001b3ULL;
      }
      return static_cast<std::size_t>(h);
    }
  };

  mutable std::uint64_t calls_ = 0;
  mutable std::unordered_map<std::vector<int>, double, ChoiceHash> memo_;
  static constexpr std::size_t kMemoCap = 1 << 20;
};

// Per-player regret and strategy rows. The strategy row always equals the
// positive-part image of the regret row: positive regrets normalized, uniform
// when none are positive.
struct RegretState {
  std::vector<std::vector<double>> regret;
  std::vector<std::vector<double>> strategy;
  std::int64_t rounds = 0;

  static RegretState init(const MatrixGame& game);
};

std::vector<double> regret_probabilities(std::span<const double> regret_row);

JointProfile sample_profile(const MatrixGame& game, const RegretState& state,
                            std::mt19937_64& rng);

// Regret update for one sampled joint play: every player's regret row moves by
// the deviation payoff minus the realized payoff. Exactly
// player_count * action_count + 1 utility calls.
void apply_profile_regrets(const MatrixGame& game, RegretState& state,
                           const JointProfile& sampled);

void regret_matching_round(const MatrixGame& game, RegretState& state, std::mt19937_64& rng);

// T rounds from zero regrets; returns each player's maximum-probability action
// (ties: lowest index). Optionally logs every sampled profile and exposes the
// final state.
JointProfile run_regret_matching(const MatrixGame& game, int rounds, std::mt19937_64& rng,
                                 std::vector<JointProfile>* trajectory = nullptr,
                                 RegretState* final_state = nullptr);

// Highest-utility candidate; ties keep the earliest.
JointProfile select_payoff_dominant(std::span<const JointProfile> candidates,
                                    const MatrixGame& game);

// Players commit one at a time in the given order, each maximizing the utility
// of the committed prefix plus its own action (ties: lowest action index).
JointProfile greedy_coordination(const MatrixGame& game, std::span<const int> order);

// Full enumeration up to the profile cap; ties keep the lexicographically
// smallest profile.
std::pair<JointProfile, double> exhaustive_optimal(const MatrixGame& game,
                                                   std::uint64_t cap = 10'000'000);

// No player can strictly improve by a unilateral deviation.
bool is_psne(const MatrixGame& game, const JointProfile& profile);

// Value-equality rule used for "found the optimum": relative 1e-9 against the
// optimum, floored at an absolute 1e-9.
bool pfo_value_match(double achieved, double optimal);

struct PfoRno {
  double pfo = 0.0;  // fraction of games whose achieved value equals the optimum
  double rno = 0.0;  // mean achieved/optimal ratio over games with positive optimum
  int games = 0;
  int zero_optimal_excluded = 0;
};

PfoRno pfo_rno(std::span<const std::pair<JointProfile, const MatrixGame*>> results);

}  // namespace amcts

#endif  // AMCTS_COORDINATION_HPP

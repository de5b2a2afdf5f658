#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doctest.h"

#include "amcts/coordination.hpp"
#include "amcts/environment.hpp"
#include "amcts/rng.hpp"

using namespace amcts;

namespace {

JointProfile profile_of(std::vector<int> choice) { return JointProfile{std::move(choice)}; }

// Two players, two actions each; payoff 2 - a0 - a1, so (0,0) is the unique
// optimum and every unilateral step away loses exactly 1. Uncommitted players
// count as playing their best action here (only full profiles are used).
MatrixGame descending_game() {
  return MatrixGame::oracle_game({0, 1}, {2, 2}, [](const JointProfile& p) {
    double v = 2.0;
    for (int c : p.choice) v -= (c > 0 ? 1.0 : 0.0);
    return v;
  });
}

// Identical-interest game where action 1 strictly dominates for every player:
// each player playing 1 adds 1 to the shared payoff.
MatrixGame dominant_game(int players) {
  std::vector<int> ids(players);
  std::vector<int> counts(players, 2);
  for (int i = 0; i < players; ++i) ids[i] = i;
  return MatrixGame::oracle_game(ids, counts, [](const JointProfile& p) {
    double v = 0.0;
    for (int c : p.choice) v += (c == 1 ? 1.0 : 0.0);
    return v;
  });
}

// Hand-built two-player instance whose sequential-greedy outcome depends on
// the commit order. Full profiles: (0,0)=3.5, (0,1)=3, (1,0)=3, (1,1)=5.
// Alone, player 0 prefers action 0 (2 vs 1.5) and player 1 prefers action 1
// (2 vs 1). Committing player 0 first locks in (0,0); committing player 1
// first reaches the optimum (1,1).
MatrixGame order_sensitive_game() {
  return MatrixGame::oracle_game({0, 1}, {2, 2}, [](const JointProfile& p) {
    const int a = p.choice[0];
    const int b = p.choice[1];
    if (a < 0 && b < 0) return 0.0;
    if (b < 0) return a == 0 ? 2.0 : 1.5;
    if (a < 0) return b == 0 ? 1.0 : 2.0;
    static const std::map<std::pair<int, int>, double> table{
        {{0, 0}, 3.5}, {{0, 1}, 3.0}, {{1, 0}, 3.0}, {{1, 1}, 5.0}};
    return table.at({a, b});
  });
}

Scenario diamond_scenario() {
  GridParams params;
  params.rows = 3;
  params.cols = 2;
  params.rewards = {{{0, 1}, 1.0}, {{2, 0}, 7.0}, {{2, 1}, 3.0}};
  params.starts = {{0, 0}, {2, 0}};
  return generate_grid_scenario(params);
}

int edge_between(const RoadmapGraph& graph, int u, int v) {
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const GraphEdge& edge = graph.edges[e];
    if ((edge.u == u && edge.v == v) || (edge.u == v && edge.v == u))
      return static_cast<int>(e);
  }
  FAIL("no edge between ", u, " and ", v);
  return -1;
}

}  // namespace

TEST_CASE("regret probabilities normalize positive regrets and fall back to uniform") {
  const std::vector<double> all_non_positive{-1.0, -2.0, 0.0};
  auto p = regret_probabilities(all_non_positive);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == doctest::Approx(1.0 / 3.0));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0));
  CHECK(p[2] == doctest::Approx(1.0 / 3.0));

  const std::vector<double> mixed{2.0, 1.0, 1.0, 0.0};
  p = regret_probabilities(mixed);
  REQUIRE(p.size() == 4);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.25);
  CHECK(p[2] == 0.25);
  CHECK(p[3] == 0.0);

  const std::vector<double> single{5.0};
  p = regret_probabilities(single);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == 1.0);

  // Negative entries never leak probability mass.
  const std::vector<double> with_negative{3.0, -100.0, 1.0};
  p = regret_probabilities(with_negative);
  CHECK(p[0] == 0.75);
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 0.25);

  CHECK_THROWS_AS(regret_probabilities(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("fresh regret state is zeroed with uniform strategies") {
  const MatrixGame game =
      MatrixGame::oracle_game({3, 7}, {2, 3}, [](const JointProfile&) { return 0.0; });
  const RegretState state = RegretState::init(game);
  REQUIRE(state.regret.size() == 2);
  REQUIRE(state.strategy.size() == 2);
  CHECK(state.rounds == 0);
  CHECK(state.regret[0] == std::vector<double>{0.0, 0.0});
  CHECK(state.regret[1] == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(state.strategy[0] == std::vector<double>{0.5, 0.5});
  CHECK(state.strategy[1][0] == doctest::Approx(1.0 / 3.0));
  CHECK(state.strategy[1][1] == doctest::Approx(1.0 / 3.0));
  CHECK(state.strategy[1][2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("one regret update matches the hand-computed deviation table") {
  MatrixGame game = descending_game();

  SUBCASE("sampling the optimum leaves no positive regret") {
    RegretState state = RegretState::init(game);
    game.reset_utility_calls();
    apply_profile_regrets(game, state, profile_of({0, 0}));
    // Realized payoff 2; deviating to action 1 pays 1, so each player's row is
    // [2-2, 1-2] = [0, -1] and the positive part is empty -> uniform strategy.
    CHECK(state.regret[0] == std::vector<double>{0.0, -1.0});
    CHECK(state.regret[1] == std::vector<double>{0.0, -1.0});
    CHECK(state.strategy[0] == std::vector<double>{0.5, 0.5});
    CHECK(state.strategy[1] == std::vector<double>{0.5, 0.5});
    CHECK(state.rounds == 1);
    // One realized evaluation plus one per (player, action).
    CHECK(game.utility_calls() == 5);
  }

  SUBCASE("sampling the worst profile concentrates strategy on the fix") {
    RegretState state = RegretState::init(game);
    game.reset_utility_calls();
    apply_profile_regrets(game, state, profile_of({1, 1}));
    // Realized payoff 0; switching to action 0 pays 1 for either player.
    CHECK(state.regret[0] == std::vector<double>{1.0, 0.0});
    CHECK(state.regret[1] == std::vector<double>{1.0, 0.0});
    CHECK(state.strategy[0] == std::vector<double>{1.0, 0.0});
    CHECK(state.strategy[1] == std::vector<double>{1.0, 0.0});
    CHECK(game.utility_calls() == 5);
  }

  SUBCASE("updates accumulate across rounds") {
    RegretState state = RegretState::init(game);
    apply_profile_regrets(game, state, profile_of({1, 1}));
    apply_profile_regrets(game, state, profile_of({1, 0}));
    // Second round realized 1; player 0 deviating to 0 pays 2 (+1), player 1
    // deviating to 1 pays 0 (-1).
    CHECK(state.regret[0] == std::vector<double>{2.0, 0.0});
    CHECK(state.regret[1] == std::vector<double>{1.0, -1.0});
    CHECK(state.rounds == 2);
  }
}

TEST_CASE("profile sampling follows the strategy rows") {
  const MatrixGame game = descending_game();
  RegretState state = RegretState::init(game);
  // Degenerate rows: player 0 always plays 1, player 1 always plays 0.
  state.regret[0] = {0.0, 4.0};
  state.strategy[0] = regret_probabilities(state.regret[0]);
  state.regret[1] = {2.5, -1.0};
  state.strategy[1] = regret_probabilities(state.regret[1]);
  auto rng = make_rng(17, {1});
  for (int i = 0; i < 20; ++i) {
    const JointProfile p = sample_profile(game, state, rng);
    CHECK(p.choice == std::vector<int>{1, 0});
  }
}

TEST_CASE("regret matching learns a dominant action and spends the exact call budget") {
  for (int players : {2, 3}) {
    CAPTURE(players);
    MatrixGame game = dominant_game(players);
    auto rng = make_rng(42, {static_cast<std::uint64_t>(players)});
    game.reset_utility_calls();
    const int rounds = 50;
    const JointProfile recommended = run_regret_matching(game, rounds, rng);
    CHECK(recommended.choice == std::vector<int>(players, 1));
    // Per round: one realized evaluation plus players * 2 deviations.
    CHECK(game.utility_calls() ==
          static_cast<std::uint64_t>(rounds) * (static_cast<std::uint64_t>(players) * 2 + 1));
  }
}

TEST_CASE("call budget counts every action of heterogeneous action sets") {
  MatrixGame game =
      MatrixGame::oracle_game({0, 1, 2}, {2, 3, 4}, [](const JointProfile& p) {
        double v = 0.0;
        for (int c : p.choice) v += c;
        return v;
      });
  auto rng = make_rng(9, {2});
  game.reset_utility_calls();
  run_regret_matching(game, 25, rng);
  // 1 + (2 + 3 + 4) evaluations per round.
  CHECK(game.utility_calls() == 25u * 10u);
}

TEST_CASE("logged trajectory replays to the exact final regret state") {
  MatrixGame game = descending_game();
  auto rng = make_rng(7, {3});
  std::vector<JointProfile> trajectory;
  RegretState final_state;
  run_regret_matching(game, 80, rng, &trajectory, &final_state);
  REQUIRE(trajectory.size() == 80);
  CHECK(final_state.rounds == 80);

  RegretState replay = RegretState::init(game);
  for (const JointProfile& sampled : trajectory) apply_profile_regrets(game, replay, sampled);
  for (int i = 0; i < game.player_count(); ++i) {
    REQUIRE(replay.regret[i].size() == final_state.regret[i].size());
    for (std::size_t m = 0; m < replay.regret[i].size(); ++m) {
      CHECK(replay.regret[i][m] == doctest::Approx(final_state.regret[i][m]).epsilon(1e-9));
      CHECK(replay.strategy[i][m] == doctest::Approx(final_state.strategy[i][m]).epsilon(1e-9));
    }
  }
}

TEST_CASE("strategy rows always mirror the positive part of the regrets") {
  MatrixGame game = order_sensitive_game();
  RegretState state = RegretState::init(game);
  auto rng = make_rng(23, {4});
  for (int t = 0; t < 60; ++t) {
    regret_matching_round(game, state, rng);
    for (int i = 0; i < game.player_count(); ++i) {
      const auto expected = regret_probabilities(state.regret[i]);
      CHECK(state.strategy[i] == expected);
      double sum = 0.0;
      for (double v : state.strategy[i]) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(state.rounds == 60);

  CHECK_THROWS_AS(run_regret_matching(game, -1, rng), std::invalid_argument);
}

TEST_CASE("zero rounds recommend the lowest action of the uniform strategy") {
  MatrixGame game = dominant_game(3);
  auto rng = make_rng(1, {5});
  const JointProfile p = run_regret_matching(game, 0, rng);
  CHECK(p.choice == std::vector<int>{0, 0, 0});
}

TEST_CASE("payoff-dominant selection keeps the earliest of tied candidates") {
  const MatrixGame game = descending_game();
  const std::vector<JointProfile> candidates{
      profile_of({1, 0}),  // value 1
      profile_of({0, 1}),  // value 1
      profile_of({0, 0}),  // value 2
  };
  CHECK(select_payoff_dominant(candidates, game).choice == std::vector<int>{0, 0});

  const std::vector<JointProfile> tied{profile_of({1, 0}), profile_of({0, 1})};
  CHECK(select_payoff_dominant(tied, game).choice == std::vector<int>{1, 0});

  CHECK_THROWS_AS(select_payoff_dominant(std::vector<JointProfile>{}, game),
                  std::invalid_argument);
}

TEST_CASE("sequential greedy commits in order and can miss the optimum") {
  const MatrixGame game = order_sensitive_game();

  const std::vector<int> first_then_second{0, 1};
  const JointProfile greedy01 = greedy_coordination(game, first_then_second);
  CHECK(greedy01.choice == std::vector<int>{0, 0});
  CHECK(game.utility(greedy01) == 3.5);

  const std::vector<int> second_then_first{1, 0};
  const JointProfile greedy10 = greedy_coordination(game, second_then_first);
  CHECK(greedy10.choice == std::vector<int>{1, 1});
  CHECK(game.utility(greedy10) == 5.0);

  const auto [opt, opt_value] = exhaustive_optimal(game);
  CHECK(opt.choice == std::vector<int>{1, 1});
  CHECK(opt_value == 5.0);

  // The greedy outcome under order (0,1) is an equilibrium even though it is
  // not the optimum; the mixed profile (0,1) is not an equilibrium.
  CHECK(is_psne(game, greedy01));
  CHECK(is_psne(game, opt));
  CHECK(!is_psne(game, profile_of({0, 1})));

  CHECK_THROWS_AS(greedy_coordination(game, std::vector<int>{0}), std::invalid_argument);
  CHECK_THROWS_AS(greedy_coordination(game, std::vector<int>{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(greedy_coordination(game, std::vector<int>{0, 2}), std::invalid_argument);
}

TEST_CASE("exhaustive search keeps the lexicographically smallest maximizer") {
  const MatrixGame game =
      MatrixGame::oracle_game({0, 1}, {3, 3}, [](const JointProfile& p) {
        const int a = p.choice[0];
        const int b = p.choice[1];
        if ((a == 1 && b == 2) || (a == 2 && b == 0)) return 5.0;
        return 1.0;
      });
  const auto [best, value] = exhaustive_optimal(game);
  CHECK(best.choice == std::vector<int>{1, 2});
  CHECK(value == 5.0);
  CHECK(game.profile_space() == 9);

  CHECK_THROWS_AS(exhaustive_optimal(game, 8), std::runtime_error);
}

TEST_CASE("profile space saturates instead of overflowing") {
  const MatrixGame game = MatrixGame::oracle_game(
      {0, 1, 2, 3, 4}, {10000, 10000, 10000, 10000, 10000},
      [](const JointProfile&) { return 0.0; });
  CHECK(game.profile_space() == UINT64_MAX);
  CHECK_THROWS_AS(exhaustive_optimal(game), std::runtime_error);
}

TEST_CASE("utility validates profiles and counts memoized evaluations") {
  const Scenario scenario = diamond_scenario();
  const RoadmapGraph& graph = scenario.graph();
  // Vertices are row-major on the 3x2 grid, so cell (r, c) sits at 2r + c.
  const int top_right = edge_between(graph, 0, 1);
  const int left_down = edge_between(graph, 0, 2);
  const int bottom_right = edge_between(graph, 4, 5);
  const int left_bottom = edge_between(graph, 2, 4);

  const std::vector<std::vector<Path>> actions{
      {{0, 0, {top_right}}, {0, 0, {left_down}}},
      {{1, 4, {bottom_right}}, {1, 4, {left_bottom}}},
  };
  MatrixGame game = MatrixGame::coverage_game(scenario, {0, 1}, actions);

  CHECK_THROWS_AS(game.utility(profile_of({0})), std::invalid_argument);
  CHECK_THROWS_AS(game.utility(profile_of({0, 2})), std::invalid_argument);

  game.reset_utility_calls();
  const double first = game.utility(profile_of({0, 0}));
  const double second = game.utility(profile_of({0, 0}));
  CHECK(first == second);
  CHECK(game.utility_calls() == 2);  // memo hits still count
}

TEST_CASE("coverage games score the union of the chosen paths") {
  const Scenario scenario = diamond_scenario();
  const RoadmapGraph& graph = scenario.graph();
  const int top_right = edge_between(graph, 0, 1);
  const int left_down = edge_between(graph, 0, 2);
  const int bottom_right = edge_between(graph, 4, 5);
  const int left_bottom = edge_between(graph, 2, 4);

  const Path p0_reward{0, 0, {top_right}};
  const Path p0_blank{0, 0, {left_down}};
  const Path p1_both{1, 4, {bottom_right}};
  const Path p1_home{1, 4, {left_bottom}};

  const std::vector<std::vector<Path>> actions{{p0_reward, p0_blank}, {p1_both, p1_home}};
  const MatrixGame game = MatrixGame::coverage_game(scenario, {4, 9}, actions);
  CHECK(game.player_count() == 2);
  CHECK(game.players() == std::vector<int>{4, 9});
  CHECK(game.action_count(0) == 2);
  REQUIRE(game.player_actions(1).size() == 2);

  // Rewarded cells: (0,1) worth 1, (2,0) worth 7, (2,1) worth 3. An edge
  // observes the rewards of both endpoints, so the bottom edge alone is worth
  // 7 + 3 = 10 and the left descent into (2,0) is worth 7.
  CHECK(game.utility(profile_of({0, 0})) == 11.0);
  CHECK(game.utility(profile_of({1, 0})) == 10.0);
  CHECK(game.utility(profile_of({0, 1})) == 8.0);
  CHECK(game.utility(profile_of({1, 1})) == 7.0);

  // Uncommitted players contribute nothing.
  CHECK(game.utility(profile_of({-1, 0})) == 10.0);
  CHECK(game.utility(profile_of({0, -1})) == 1.0);
  CHECK(game.utility(profile_of({-1, -1})) == 0.0);

  // Every utility agrees with a direct union-of-masks evaluation.
  for (int a = -1; a < 2; ++a) {
    for (int b = -1; b < 2; ++b) {
      CoverageMask m = scenario.empty_mask();
      if (a >= 0) m |= scenario.path_mask(actions[0][a]);
      if (b >= 0) m |= scenario.path_mask(actions[1][b]);
      CHECK(game.utility(profile_of({a, b})) == scenario.coverage_value(m));
    }
  }

  // A baseline mask is folded into every evaluation.
  const CoverageMask baseline = scenario.path_mask(p0_reward);
  const MatrixGame with_base =
      MatrixGame::coverage_game(scenario, {4, 9}, actions, &baseline);
  CHECK(with_base.utility(profile_of({1, 1})) == 8.0);
  CHECK(with_base.utility(profile_of({-1, -1})) == 1.0);

  CHECK_THROWS_AS(MatrixGame::coverage_game(scenario, {0, 1}, {{p0_reward}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      MatrixGame::coverage_game(scenario, {0}, std::vector<std::vector<Path>>{{}}),
      std::invalid_argument);
}

TEST_CASE("optimum-found and normalized-optimality statistics") {
  CHECK(pfo_value_match(1.0, 1.0 + 5e-10));
  CHECK(!pfo_value_match(1.0, 1.1));
  CHECK(pfo_value_match(0.0, 0.0));
  CHECK(pfo_value_match(1e9, 1e9 + 0.5));  // relative tolerance scales up
  CHECK(!pfo_value_match(1e9, 1e9 + 2.0));

  const MatrixGame spread =
      MatrixGame::oracle_game({0}, {2}, [](const JointProfile& p) {
        return p.choice[0] == 1 ? 4.0 : 2.0;
      });
  const MatrixGame flat =
      MatrixGame::oracle_game({0}, {2}, [](const JointProfile&) { return 0.0; });

  SUBCASE("hit and miss average out") {
    const std::vector<std::pair<JointProfile, const MatrixGame*>> results{
        {profile_of({0}), &spread},  // 2 of 4: miss, ratio 0.5
        {profile_of({1}), &spread},  // 4 of 4: hit, ratio 1
    };
    const PfoRno stats = pfo_rno(results);
    CHECK(stats.games == 2);
    CHECK(stats.pfo == 0.5);
    CHECK(stats.rno == doctest::Approx(0.75));
    CHECK(stats.zero_optimal_excluded == 0);
  }

  SUBCASE("zero-value optima count for discovery but not for the ratio") {
    const std::vector<std::pair<JointProfile, const MatrixGame*>> results{
        {profile_of({0}), &spread},  // miss, ratio 0.5
        {profile_of({0}), &flat},    // optimum is 0 and was matched
    };
    const PfoRno stats = pfo_rno(results);
    CHECK(stats.games == 2);
    CHECK(stats.pfo == 0.5);
    CHECK(stats.rno == doctest::Approx(0.5));
    CHECK(stats.zero_optimal_excluded == 1);
  }

  SUBCASE("empty input yields the zero report") {
    const PfoRno stats = pfo_rno({});
    CHECK(stats.games == 0);
    CHECK(stats.pfo == 0.0);
    CHECK(stats.rno == 0.0);
  }
}

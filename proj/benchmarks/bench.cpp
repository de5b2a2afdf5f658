// Microbenchmarks for the hot paths: coverage evaluation, regret matching
// rounds, and single tree iterations.

#include <benchmark/benchmark.h>

#include <vector>

#include "amcts/coordination.hpp"
#include "amcts/environment.hpp"
#include "amcts/rng.hpp"
#include "amcts/search_tree.hpp"

namespace {

amcts::Scenario bench_scenario() {
  amcts::RoadmapParams params;
  params.seed = 7;
  params.area_side = 1000.0;
  params.n_regions = 50;
  params.region_radius = 60.0;
  params.n_vertices = 80;
  params.connect_radius = 280.0;
  return amcts::generate_roadmap_scenario(params);
}

amcts::Path bench_walk(const amcts::Scenario& scenario, int agent, int start, int steps,
                       std::mt19937_64& rng) {
  amcts::Path path;
  path.agent_id = agent;
  path.start_vertex = start;
  int vertex = start;
  for (int k = 0; k < steps; ++k) {
    const auto& incident = scenario.graph().incident[vertex];
    if (incident.empty()) break;
    const int edge = incident[amcts::uniform_index(rng, incident.size())];
    path.edges.push_back(edge);
    vertex = scenario.graph().other_end(edge, vertex);
  }
  return path;
}

void BM_CoverageValue(benchmark::State& state) {
  const amcts::Scenario scenario = bench_scenario();
  auto rng = amcts::make_rng(1, {1});
  std::vector<amcts::Path> paths;
  std::set<int> active;
  for (int a = 0; a < 8; ++a) {
    paths.push_back(bench_walk(scenario, a, a, 9, rng));
    active.insert(a);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(amcts::global_utility(scenario, paths, active));
  }
}
BENCHMARK(BM_CoverageValue);

void BM_RegretMatchingRound(benchmark::State& state) {
  const amcts::Scenario scenario = bench_scenario();
  auto rng = amcts::make_rng(2, {1});
  std::vector<int> players;
  std::vector<std::vector<amcts::Path>> actions;
  for (int a = 0; a < 5; ++a) {
    players.push_back(a);
    std::vector<amcts::Path> own;
    for (int m = 0; m < 10; ++m) own.push_back(bench_walk(scenario, a, a, 9, rng));
    actions.push_back(std::move(own));
  }
  const amcts::MatrixGame game =
      amcts::MatrixGame::coverage_game(scenario, players, std::move(actions));
  amcts::RegretState rm = amcts::RegretState::init(game);
  auto play_rng = amcts::make_rng(3, {1});
  for (auto _ : state) {
    amcts::regret_matching_round(game, rm, play_rng);
  }
}
BENCHMARK(BM_RegretMatchingRound);

void BM_TreeIteration(benchmark::State& state) {
  const amcts::Scenario scenario = bench_scenario();
  amcts::DuctParams params;
  amcts::SearchTree tree(0, 0, 9);
  tree.attach(&scenario);
  auto rng = amcts::make_rng(4, {1});
  const auto reward = [&scenario](const amcts::Path& rollout) {
    return scenario.coverage_value(scenario.path_mask(rollout)) / scenario.total_value();
  };
  for (auto _ : state) {
    tree.run_iteration(params, rng, reward);
  }
}
BENCHMARK(BM_TreeIteration);

}  // namespace

BENCHMARK_MAIN();

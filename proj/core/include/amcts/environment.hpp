#ifndef AMCTS_ENVIRONMENT_HPP
#define AMCTS_ENVIRONMENT_HPP

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace amcts {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Disc-shaped observation target. Ids are contiguous from 0 within a scenario.
struct Region {
  int id = 0;
  Vec2 center;
  double radius = 0.0;
  double value = 1.0;
};

struct GraphEdge {
  int u = 0;
  int v = 0;
};

// Fixed-width bitset over region ids. Word count is set by the owning scenario.
class CoverageMask {
 public:
  CoverageMask() = default;
  explicit CoverageMask(int region_count) : words_((region_count + 63) / 64, 0) {}

  void set(int region_id) { words_[region_id >> 6] |= (1ULL << (region_id & 63)); }
  bool test(int region_id) const { return (words_[region_id >> 6] >> (region_id & 63)) & 1ULL; }
  CoverageMask& operator|=(const CoverageMask& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }
  bool operator==(const CoverageMask& other) const { return words_ == other.words_; }
  bool contains(const CoverageMask& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if ((other.words_[i] & ~words_[i]) != 0) return false;
    return true;
  }
  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::vector<std::uint64_t> words_;
};

// Undirected roadmap. edge_regions[e] lists, ascending, every region whose disc
// lies within its radius of edge e's segment.
struct RoadmapGraph {
  std::vector<Vec2> vertices;
  std::vector<GraphEdge> edges;
  std::vector<std::vector<int>> edge_regions;
  std::vector<std::vector<int>> incident;  // per-vertex incident edge ids, ascending

  int other_end(int edge, int vertex) const {
    const GraphEdge& e = edges[edge];
    return e.u == vertex ? e.v : e.u;
  }
};

// Walk through the roadmap: consecutive edges share a vertex, revisits allowed.
struct Path {
  int agent_id = 0;
  int start_vertex = 0;
  std::vector<int> edges;
};

enum class ScenarioKind { Roadmap, GridWorld };

struct ScenarioMeta {
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;  // generation echo, fixed order
};

class Scenario {
 public:
  // Takes raw geometry, computes edge_regions and per-edge masks, validates:
  // vertex indices in range, no self loops or duplicate edges, region ids
  // contiguous from 0, positive radii, non-negative values, and every region
  // reachable through at least one edge (unless regions are absent entirely).
  static Scenario assemble(std::vector<Vec2> vertices, std::vector<GraphEdge> edges,
                           std::vector<Region> regions, ScenarioKind kind, ScenarioMeta meta,
                           std::vector<int> starts = {});

  const RoadmapGraph& graph() const { return graph_; }
  const std::vector<Region>& regions() const { return regions_; }
  ScenarioKind kind() const { return kind_; }
  const ScenarioMeta& meta() const { return meta_; }
  const std::vector<int>& starts() const { return starts_; }

  int region_count() const { return static_cast<int>(regions_.size()); }
  double total_value() const { return total_value_; }
  const CoverageMask& edge_mask(int edge) const { return edge_masks_[edge]; }
  CoverageMask empty_mask() const { return CoverageMask(region_count()); }

  CoverageMask path_mask(const Path& path) const;
  // Sum of region values over the mask, accumulated in ascending region id
  // order so equal sets always produce bit-identical sums.
  double coverage_value(const CoverageMask& mask) const;

 private:
  RoadmapGraph graph_;
  std::vector<Region> regions_;
  ScenarioKind kind_ = ScenarioKind::Roadmap;
  ScenarioMeta meta_;
  std::vector<int> starts_;
  std::vector<CoverageMask> edge_masks_;
  double total_value_ = 0.0;
};

struct RoadmapParams {
  std::uint64_t seed = 0;
  double area_side = 4000.0;
  int n_regions = 200;
  double region_radius = 50.0;
  double region_value = 1.0;
  int n_vertices = 400;
  double connect_radius = 1280.0;
};

// Uniform random vertices joined within connect_radius, straight-line edges.
// Regions left uncovered get a repair vertex at their center wired to its
// nearest neighbors, at most one added vertex per region.
Scenario generate_roadmap_scenario(const RoadmapParams& params);

struct GridParams {
  int rows = 0;
  int cols = 0;
  std::map<std::pair<int, int>, double> rewards;  // (row, col) -> value
  std::vector<std::pair<int, int>> starts;        // distinct cells
};

// 4-connected unit grid; every rewarded cell becomes a region observed exactly
// by the edges entering that cell.
Scenario generate_grid_scenario(const GridParams& params);

bool is_valid_path(const Scenario& scenario, const Path& path);

// Sum of region values covered by at least one active agent's path. Paths of
// inactive agents contribute nothing.
double global_utility(const Scenario& scenario, std::span<const Path> paths,
                      const std::set<int>& active);

// global_utility(others + own) - global_utility(others), both over active.
double marginal_utility(const Scenario& scenario, int agent, const Path& own,
                        std::span<const Path> others, const std::set<int>& active);

// Traversal time: one unit per edge.
int path_cost(const Path& path);

}  // namespace amcts

#endif  // AMCTS_ENVIRONMENT_HPP

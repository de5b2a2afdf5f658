#include "amcts/environment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "amcts/rng.hpp"

namespace amcts {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double abx = b.x - a.x;
  const double aby = b.y - a.y;
  const double len2 = abx * abx + aby * aby;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  const double dx = p.x - (a.x + t * abx);
  const double dy = p.y - (a.y + t * aby);
  return std::sqrt(dx * dx + dy * dy);
}

namespace {

std::vector<std::vector<int>> compute_edge_regions(const std::vector<Vec2>& vertices,
                                                   const std::vector<GraphEdge>& edges,
                                                   const std::vector<Region>& regions) {
  std::vector<std::vector<int>> result(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vec2& a = vertices[edges[e].u];
    const Vec2& b = vertices[edges[e].v];
    for (const Region& r : regions) {
      if (point_segment_distance(r.center, a, b) <= r.radius) result[e].push_back(r.id);
    }
  }
  return result;
}

}  // namespace

Scenario Scenario::assemble(std::vector<Vec2> vertices, std::vector<GraphEdge> edges,
                            std::vector<Region> regions, ScenarioKind kind, ScenarioMeta meta,
                            std::vector<int> starts) {
  const int nv = static_cast<int>(vertices.size());
  if (nv == 0) throw std::invalid_argument("scenario needs at least one vertex");

  std::set<std::pair<int, int>> seen;
  for (auto& e : edges) {
    if (e.u < 0 || e.u >= nv || e.v < 0 || e.v >= nv)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self loops are not allowed");
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!seen.insert({e.u, e.v}).second) throw std::invalid_argument("duplicate edge");
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].id != static_cast<int>(i))
      throw std::invalid_argument("region ids must be contiguous from 0");
    if (regions[i].radius <= 0.0) throw std::invalid_argument("region radius must be positive");
    if (regions[i].value < 0.0) throw std::invalid_argument("region value must be non-negative");
  }
  for (int s : starts) {
    if (s < 0 || s >= nv) throw std::invalid_argument("start vertex out of range");
  }

  Scenario sc;
  sc.graph_.vertices = std::move(vertices);
  sc.graph_.edges = std::move(edges);
  sc.graph_.edge_regions = compute_edge_regions(sc.graph_.vertices, sc.graph_.edges, regions);
  sc.graph_.incident.assign(nv, {});
  for (std::size_t e = 0; e < sc.graph_.edges.size(); ++e) {
    sc.graph_.incident[sc.graph_.edges[e].u].push_back(static_cast<int>(e));
    sc.graph_.incident[sc.graph_.edges[e].v].push_back(static_cast<int>(e));
  }
  sc.regions_ = std::move(regions);
  sc.kind_ = kind;
  sc.meta_ = std::move(meta);
  sc.starts_ = std::move(starts);

  const int nr = static_cast<int>(sc.regions_.size());
  sc.edge_masks_.reserve(sc.graph_.edges.size());
  std::vector<bool> covered(nr, false);
  for (const auto& ids : sc.graph_.edge_regions) {
    CoverageMask m(nr);
    for (int id : ids) {
      m.set(id);
      covered[id] = true;
    }
    sc.edge_masks_.push_back(std::move(m));
  }
  for (int r = 0; r < nr; ++r) {
    if (!covered[r]) throw std::invalid_argument("region not observable by any edge");
  }
  sc.total_value_ = 0.0;
  for (const Region& r : sc.regions_) sc.total_value_ += r.value;
  return sc;
}

CoverageMask Scenario::path_mask(const Path& path) const {
  CoverageMask m(region_count());
  for (int e : path.edges) m |= edge_masks_[e];
  return m;
}

double Scenario::coverage_value(const CoverageMask& mask) const {
  double sum = 0.0;
  const auto& words = mask.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      const int bit = std::countr_zero(bits);
      sum += regions_[static_cast<int>(w * 64) + bit].value;
      bits &= bits - 1;
    }
  }
  return sum;
}

Scenario generate_roadmap_scenario(const RoadmapParams& p) {
  if (p.n_regions <= 0 || p.n_vertices <= 0)
    throw std::invalid_argument("region and vertex counts must be positive");
  if (p.area_side <= 0.0 || p.region_radius <= 0.0 || p.connect_radius <= 0.0)
    throw std::invalid_argument("area side, region radius and connect radius must be positive");
  if (p.region_value < 0.0) throw std::invalid_argument("region value must be non-negative");

  auto rng = make_rng(p.seed, {1});

  std::vector<Region> regions(p.n_regions);
  for (int i = 0; i < p.n_regions; ++i) {
    regions[i].id = i;
    regions[i].center = {uniform_double(rng, 0.0, p.area_side),
                         uniform_double(rng, 0.0, p.area_side)};
    regions[i].radius = p.region_radius;
    regions[i].value = p.region_value;
  }

  std::vector<Vec2> vertices(p.n_vertices);
  for (int i = 0; i < p.n_vertices; ++i) {
    vertices[i] = {uniform_double(rng, 0.0, p.area_side), uniform_double(rng, 0.0, p.area_side)};
  }

  std::vector<GraphEdge> edges;
  auto dist2 = [&](const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
  };
  const double r2 = p.connect_radius * p.connect_radius;
  for (int i = 0; i < p.n_vertices; ++i) {
    for (int j = i + 1; j < p.n_vertices; ++j) {
      if (dist2(vertices[i], vertices[j]) <= r2) edges.push_back({i, j});
    }
  }

  // Coverage repair: one vertex at each uncovered region's center, wired to its
  // nearest neighbors. The first wire touches the center, so the region is
  // covered as soon as one edge exists.
  auto regions_covered = [&]() {
    std::vector<bool> covered(p.n_regions, false);
    for (const auto& ids : compute_edge_regions(vertices, edges, regions))
      for (int id : ids) covered[id] = true;
    return covered;
  };
  auto covered = regions_covered();
  int added = 0;
  for (int r = 0; r < p.n_regions; ++r) {
    if (covered[r]) continue;
    if (added >= p.n_regions)
      throw std::runtime_error("coverage repair exceeded the added-vertex budget");
    const int nv = static_cast<int>(vertices.size());
    if (nv < 1) throw std::runtime_error("coverage repair needs an existing vertex");
    vertices.push_back(regions[r].center);
    ++added;
    std::vector<int> order(nv);
    for (int i = 0; i < nv; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = dist2(vertices[a], regions[r].center);
      const double db = dist2(vertices[b], regions[r].center);
      if (da != db) return da < db;
      return a < b;
    });
    const int wires = std::min(3, nv);
    for (int k = 0; k < wires; ++k) edges.push_back({order[k], nv});
    // Wires may have covered other pending regions as well.
    covered = regions_covered();
    if (!covered[r]) throw std::runtime_error("coverage repair failed for a region");
  }

  ScenarioMeta meta;
  meta.seed = p.seed;
  meta.params = {{"area_side", std::to_string(p.area_side)},
                 {"n_regions", std::to_string(p.n_regions)},
                 {"region_radius", std::to_string(p.region_radius)},
                 {"region_value", std::to_string(p.region_value)},
                 {"n_vertices", std::to_string(p.n_vertices)},
                 {"connect_radius", std::to_string(p.connect_radius)}};
  return Scenario::assemble(std::move(vertices), std::move(edges), std::move(regions),
                            ScenarioKind::Roadmap, std::move(meta));
}

Scenario generate_grid_scenario(const GridParams& p) {
  if (p.rows <= 0 || p.cols <= 0) throw std::invalid_argument("grid dimensions must be positive");
  auto vertex_id = [&](int r, int c) { return r * p.cols + c; };

  std::vector<Vec2> vertices(static_cast<std::size_t>(p.rows) * p.cols);
  for (int r = 0; r < p.rows; ++r)
    for (int c = 0; c < p.cols; ++c)
      vertices[vertex_id(r, c)] = {static_cast<double>(c), static_cast<double>(r)};

  std::vector<GraphEdge> edges;
  for (int r = 0; r < p.rows; ++r) {
    for (int c = 0; c < p.cols; ++c) {
      if (c + 1 < p.cols) edges.push_back({vertex_id(r, c), vertex_id(r, c + 1)});
      if (r + 1 < p.rows) edges.push_back({vertex_id(r, c), vertex_id(r + 1, c)});
    }
  }

  std::vector<Region> regions;
  for (const auto& [cell, value] : p.rewards) {
    const auto [r, c] = cell;
    if (r < 0 || r >= p.rows || c < 0 || c >= p.cols)
      throw std::invalid_argument("rewarded cell out of range");
    if (value < 0.0) throw std::invalid_argument("cell reward must be non-negative");
    Region region;
    region.id = static_cast<int>(regions.size());
    region.center = {static_cast<double>(c), static_cast<double>(r)};
    // Strictly below the unit spacing: only edges incident to the cell's vertex
    // come within this radius.
    region.radius = 0.25;
    region.value = value;
    regions.push_back(region);
  }

  std::vector<int> starts;
  std::set<int> seen;
  for (const auto& [r, c] : p.starts) {
    if (r < 0 || r >= p.rows || c < 0 || c >= p.cols)
      throw std::invalid_argument("start cell out of range");
    const int v = vertex_id(r, c);
    if (!seen.insert(v).second) throw std::invalid_argument("start cells must be distinct");
    starts.push_back(v);
  }

  ScenarioMeta meta;
  meta.seed = 0;
  meta.params = {{"rows", std::to_string(p.rows)}, {"cols", std::to_string(p.cols)}};
  return Scenario::assemble(std::move(vertices), std::move(edges), std::move(regions),
                            ScenarioKind::GridWorld, std::move(meta), std::move(starts));
}

bool is_valid_path(const Scenario& scenario, const Path& path) {
  const RoadmapGraph& g = scenario.graph();
  const int nv = static_cast<int>(g.vertices.size());
  if (path.start_vertex < 0 || path.start_vertex >= nv) return false;
  int cur = path.start_vertex;
  for (int e : path.edges) {
    if (e < 0 || e >= static_cast<int>(g.edges.size())) return false;
    if (g.edges[e].u != cur && g.edges[e].v != cur) return false;
    cur = g.other_end(e, cur);
  }
  return true;
}

double global_utility(const Scenario& scenario, std::span<const Path> paths,
                      const std::set<int>& active) {
  CoverageMask m = scenario.empty_mask();
  for (const Path& p : paths) {
    if (active.count(p.agent_id)) m |= scenario.path_mask(p);
  }
  return scenario.coverage_value(m);
}

double marginal_utility(const Scenario& scenario, int agent, const Path& own,
                        std::span<const Path> others, const std::set<int>& active) {
  if (own.agent_id != agent) throw std::invalid_argument("own path must belong to the agent");
  if (!active.count(agent)) throw std::invalid_argument("agent must be active");
  CoverageMask base = scenario.empty_mask();
  for (const Path& p : others) {
    if (p.agent_id != agent && active.count(p.agent_id)) base |= scenario.path_mask(p);
  }
  const double without = scenario.coverage_value(base);
  base |= scenario.path_mask(own);
  return scenario.coverage_value(base) - without;
}

int path_cost(const Path& path) { return static_cast<int>(path.edges.size()); }

}  // namespace amcts

#include "amcts/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amcts {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw std::runtime_error("bad numeric field: " + text);
  return value;
}

void save_scenario(const Scenario& sc, std::ostream& out) {
  out << "amcts-scenario 1\n";
  out << "kind " << (sc.kind() == ScenarioKind::Roadmap ? "roadmap" : "grid") << "\n";
  out << "seed " << sc.meta().seed << "\n";
  for (const auto& [k, v] : sc.meta().params) out << "param " << k << " " << v << "\n";
  const RoadmapGraph& g = sc.graph();
  out << "vertices " << g.vertices.size() << "\n";
  for (const Vec2& v : g.vertices) out << format_double(v.x) << " " << format_double(v.y) << "\n";
  out << "edges " << g.edges.size() << "\n";
  for (const GraphEdge& e : g.edges) out << e.u << " " << e.v << "\n";
  out << "regions " << sc.regions().size() << "\n";
  for (const Region& r : sc.regions()) {
    out << r.id << " " << format_double(r.center.x) << " " << format_double(r.center.y) << " "
        << format_double(r.radius) << " " << format_double(r.value) << "\n";
  }
  out << "starts " << sc.starts().size() << "\n";
  for (std::size_t i = 0; i < sc.starts().size(); ++i) {
    out << sc.starts()[i] << (i + 1 == sc.starts().size() ? "" : " ");
  }
  if (!sc.starts().empty()) out << "\n";
}

void save_scenario(const Scenario& sc, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
  save_scenario(sc, out);
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

namespace {

std::string expect_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error(std::string("scenario file truncated at ") + what);
  return tok;
}

long expect_count(std::istream& in, const std::string& keyword) {
  const std::string kw = expect_token(in, keyword.c_str());
  if (kw != keyword) throw std::runtime_error("expected '" + keyword + "', found '" + kw + "'");
  long n = 0;
  if (!(in >> n) || n < 0) throw std::runtime_error("bad count after '" + keyword + "'");
  return n;
}

}  // namespace

Scenario load_scenario(std::istream& in) {
  std::string magic = expect_token(in, "header");
  std::string version = expect_token(in, "version");
  if (magic != "amcts-scenario" || version != "1")
    throw std::runtime_error("not an amcts-scenario v1 file");

  std::string kw = expect_token(in, "kind");
  if (kw != "kind") throw std::runtime_error("expected 'kind'");
  const std::string kind_name = expect_token(in, "kind value");
  ScenarioKind kind;
  if (kind_name == "roadmap") {
    kind = ScenarioKind::Roadmap;
  } else if (kind_name == "grid") {
    kind = ScenarioKind::GridWorld;
  } else {
    throw std::runtime_error("unknown scenario kind: " + kind_name);
  }

  ScenarioMeta meta;
  kw = expect_token(in, "seed");
  if (kw != "seed") throw std::runtime_error("expected 'seed'");
  if (!(in >> meta.seed)) throw std::runtime_error("bad seed");

  std::string next = expect_token(in, "params or vertices");
  while (next == "param") {
    const std::string key = expect_token(in, "param key");
    const std::string value = expect_token(in, "param value");
    meta.params.emplace_back(key, value);
    next = expect_token(in, "params or vertices");
  }

  if (next != "vertices") throw std::runtime_error("expected 'vertices'");
  long nv = 0;
  if (!(in >> nv) || nv < 0) throw std::runtime_error("bad vertex count");
  std::vector<Vec2> vertices(nv);
  for (long i = 0; i < nv; ++i) {
    vertices[i].x = parse_double(expect_token(in, "vertex x"));
    vertices[i].y = parse_double(expect_token(in, "vertex y"));
  }

  const long ne = expect_count(in, "edges");
  std::vector<GraphEdge> edges(ne);
  for (long i = 0; i < ne; ++i) {
    if (!(in >> edges[i].u >> edges[i].v)) throw std::runtime_error("bad edge row");
  }

  const long nr = expect_count(in, "regions");
  std::vector<Region> regions(nr);
  for (long i = 0; i < nr; ++i) {
    if (!(in >> regions[i].id)) throw std::runtime_error("bad region id");
    regions[i].center.x = parse_double(expect_token(in, "region cx"));
    regions[i].center.y = parse_double(expect_token(in, "region cy"));
    regions[i].radius = parse_double(expect_token(in, "region radius"));
    regions[i].value = parse_double(expect_token(in, "region value"));
  }

  const long ns = expect_count(in, "starts");
  std::vector<int> starts(ns);
  for (long i = 0; i < ns; ++i) {
    if (!(in >> starts[i])) throw std::runtime_error("bad start vertex");
  }

  return Scenario::assemble(std::move(vertices), std::move(edges), std::move(regions), kind,
                            std::move(meta), std::move(starts));
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file: " + file.string());
  return load_scenario(in);
}

}  // namespace amcts

#ifndef AMCTS_SCENARIO_IO_HPP
#define AMCTS_SCENARIO_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "amcts/environment.hpp"

namespace amcts {

// Shortest round-trip decimal form via std::to_chars: the same double always
// serializes to the same bytes and parses back bit-exactly.
std::string format_double(double value);
double parse_double(const std::string& text);

// Versioned plain-text schema (header "amcts-scenario 1"): kind, seed, params,
// vertices, edges, regions, starts. Derived data (edge_regions, masks) is
// recomputed on load.
void save_scenario(const Scenario& scenario, std::ostream& out);
void save_scenario(const Scenario& scenario, const std::filesystem::path& file);
Scenario load_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& file);

}  // namespace amcts

#endif  // AMCTS_SCENARIO_IO_HPP

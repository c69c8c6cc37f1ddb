#ifndef POLLNET_SPEC_IO_HPP
#define POLLNET_SPEC_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "pollnet/model.hpp"
#include "pollnet/simulator.hpp"

namespace pollnet {

/// Parses a network spec document:
///   { "n": 3, "lambda": [..], "service": [{"kind": .., "params": {..}}, ..],
///     "routing": [[..], ..], "gating": [{"pmf": [{"k": 1 | "inf", "p": ..}, ..]}, ..],
///     "sim": { "seed": .., "horizon": .., "record_grid": [..] } }  // optional
/// Throws ParseError with a field-path message on schema violations.
NetworkSpec parse_spec_json(const std::string& text);

/// Optional "sim" block; returns defaults when absent.
SimConfig parse_sim_config_json(const std::string& text);

/// Serializes a spec back to the same schema (round-trips through
/// parse_spec_json to identical analysis numbers).
std::string spec_to_json(const NetworkSpec& spec, int indent = 2);

/// Shortest round-trip decimal formatting of a double.
std::string format_double(double x);

/// CSV with header t,x1,...,xN,total; one row per grid point.
std::string trajectory_csv(const std::vector<double>& grid,
                           const std::vector<Vec>& values);
std::string trajectory_csv_counts(const std::vector<double>& grid,
                                  const std::vector<std::vector<std::int64_t>>& values);

/// CSV with header n,t_cycle.
std::string cycles_csv(const std::vector<double>& cycle_instants);

/// Writes a file atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace pollnet

#endif

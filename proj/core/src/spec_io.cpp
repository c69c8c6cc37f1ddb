#include "pollnet/spec_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "pollnet/errors.hpp"

namespace pollnet {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ParseError(path + ": " + why);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  return j.get<double>();
}

double require_positive(const json& j, const std::string& path) {
  const double x = require_number(j, path);
  if (!(x > 0.0)) fail(path, "must be positive");
  return x;
}

ServiceDistribution parse_service(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object {kind, params}");
  if (!j.contains("kind") || !j["kind"].is_string()) fail(path + ".kind", "must be a string");
  const std::string kind = j["kind"].get<std::string>();
  const json params = j.value("params", json::object());
  if (!params.is_object()) fail(path + ".params", "must be an object");
  if (kind == "exponential") {
    if (!params.contains("rate")) fail(path + ".params.rate", "missing");
    return ServiceDistribution::exponential(require_positive(params["rate"], path + ".params.rate"));
  }
  if (kind == "deterministic") {
    if (!params.contains("value")) fail(path + ".params.value", "missing");
    return ServiceDistribution::deterministic(
        require_positive(params["value"], path + ".params.value"));
  }
  if (kind == "gamma") {
    if (!params.contains("shape")) fail(path + ".params.shape", "missing");
    if (!params.contains("rate")) fail(path + ".params.rate", "missing");
    return ServiceDistribution::gamma(require_positive(params["shape"], path + ".params.shape"),
                                      require_positive(params["rate"], path + ".params.rate"));
  }
  fail(path + ".kind", "unknown kind '" + kind + "' (exponential|deterministic|gamma)");
}

GatingIndexDistribution parse_gating(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("pmf")) fail(path, "must be an object {pmf: [...]}");
  const json& pmf = j["pmf"];
  if (!pmf.is_array() || pmf.empty()) fail(path + ".pmf", "must be a non-empty array");
  std::map<int, double> atoms;
  for (std::size_t a = 0; a < pmf.size(); ++a) {
    const std::string apath = path + ".pmf[" + std::to_string(a) + "]";
    const json& atom = pmf[a];
    if (!atom.is_object() || !atom.contains("k") || !atom.contains("p"))
      fail(apath, "must be an object {k, p}");
    int k;
    if (atom["k"].is_string()) {
      if (atom["k"].get<std::string>() != "inf") fail(apath + ".k", "string form must be \"inf\"");
      k = kGateInf;
    } else if (atom["k"].is_number_integer()) {
      k = atom["k"].get<int>();
      if (k < 1) fail(apath + ".k", "must be >= 1");
    } else {
      fail(apath + ".k", "must be an integer or \"inf\"");
    }
    const double p = require_number(atom["p"], apath + ".p");
    if (p < 0.0) fail(apath + ".p", "must be nonnegative");
    atoms[k] += p;
  }
  return GatingIndexDistribution::from_atoms(atoms);
}

json parse_root(const std::string& text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) throw ParseError("$: invalid JSON document");
  if (!root.is_object()) throw ParseError("$: root must be an object");
  return root;
}

}  // namespace

NetworkSpec parse_spec_json(const std::string& text) {
  const json root = parse_root(text);
  NetworkSpec spec;
  if (!root.contains("n") || !root["n"].is_number_integer()) fail("$.n", "must be an integer");
  spec.n = root["n"].get<int>();
  if (spec.n < 2) fail("$.n", "must be at least 2");

  if (!root.contains("lambda") || !root["lambda"].is_array() ||
      static_cast<int>(root["lambda"].size()) != spec.n)
    fail("$.lambda", "must be an array of n arrival rates");
  for (int i = 0; i < spec.n; ++i)
    spec.lambda.push_back(require_positive(root["lambda"][i], "$.lambda[" + std::to_string(i) + "]"));

  if (!root.contains("service") || !root["service"].is_array() ||
      static_cast<int>(root["service"].size()) != spec.n)
    fail("$.service", "must be an array of n distributions");
  for (int i = 0; i < spec.n; ++i)
    spec.service.push_back(parse_service(root["service"][i], "$.service[" + std::to_string(i) + "]"));

  if (!root.contains("routing") || !root["routing"].is_array() ||
      static_cast<int>(root["routing"].size()) != spec.n)
    fail("$.routing", "must be an n x n array of arrays");
  spec.routing = Matrix(spec.n, spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const json& row = root["routing"][i];
    const std::string rpath = "$.routing[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != spec.n) fail(rpath, "must have n entries");
    for (int j = 0; j < spec.n; ++j) {
      const double p = require_number(row[j], rpath + "[" + std::to_string(j) + "]");
      if (p < 0.0 || p > 1.0) fail(rpath + "[" + std::to_string(j) + "]", "must be in [0, 1]");
      spec.routing(i, j) = p;
    }
  }

  if (!root.contains("gating") || !root["gating"].is_array() ||
      static_cast<int>(root["gating"].size()) != spec.n)
    fail("$.gating", "must be an array of n gating distributions");
  for (int i = 0; i < spec.n; ++i)
    spec.gating.push_back(parse_gating(root["gating"][i], "$.gating[" + std::to_string(i) + "]"));

  return spec;
}

SimConfig parse_sim_config_json(const std::string& text) {
  const json root = parse_root(text);
  SimConfig cfg;
  if (!root.contains("sim")) return cfg;
  const json& sim = root["sim"];
  if (!sim.is_object()) fail("$.sim", "must be an object");
  if (sim.contains("seed")) {
    if (!sim["seed"].is_number_unsigned() && !sim["seed"].is_number_integer())
      fail("$.sim.seed", "must be an integer");
    cfg.seed = sim["seed"].get<std::uint64_t>();
  }
  if (sim.contains("horizon")) cfg.horizon = require_positive(sim["horizon"], "$.sim.horizon");
  if (sim.contains("scale_n")) {
    if (!sim["scale_n"].is_number_integer()) fail("$.sim.scale_n", "must be an integer");
    cfg.scale_n = sim["scale_n"].get<int>();
  }
  if (sim.contains("record_grid")) {
    if (!sim["record_grid"].is_array()) fail("$.sim.record_grid", "must be an array of times");
    for (std::size_t i = 0; i < sim["record_grid"].size(); ++i)
      cfg.record_grid.push_back(require_number(
          sim["record_grid"][i], "$.sim.record_grid[" + std::to_string(i) + "]"));
  }
  if (sim.contains("event_cap")) {
    if (!sim["event_cap"].is_number_integer()) fail("$.sim.event_cap", "must be an integer");
    cfg.event_cap = sim["event_cap"].get<std::int64_t>();
  }
  return cfg;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // prefer the shortest representation that round-trips
  for (int prec = 1; prec <= 16; ++prec) {
    char s[32];
    std::snprintf(s, sizeof s, "%.*g", prec, x);
    double back;
    std::sscanf(s, "%lf", &back);
    if (back == x) return s;
  }
  return buf;
}

std::string spec_to_json(const NetworkSpec& spec, int indent) {
  json root;
  root["n"] = spec.n;
  root["lambda"] = spec.lambda;
  json service = json::array();
  for (const auto& s : spec.service) {
    json d;
    switch (s.kind) {
      case ServiceDistribution::Kind::Exponential:
        d = {{"kind", "exponential"}, {"params", {{"rate", s.a}}}};
        break;
      case ServiceDistribution::Kind::Deterministic:
        d = {{"kind", "deterministic"}, {"params", {{"value", s.a}}}};
        break;
      case ServiceDistribution::Kind::Gamma:
        d = {{"kind", "gamma"}, {"params", {{"shape", s.b}, {"rate", s.a}}}};
        break;
    }
    service.push_back(d);
  }
  root["service"] = service;
  json routing = json::array();
  for (int i = 0; i < spec.n; ++i) {
    json row = json::array();
    for (int j = 0; j < spec.n; ++j) row.push_back(spec.routing(i, j));
    routing.push_back(row);
  }
  root["routing"] = routing;
  json gating = json::array();
  for (const auto& g : spec.gating) {
    json pmf = json::array();
    for (const auto& [k, p] : g.pmf()) {
      json atom;
      if (k == kGateInf)
        atom = {{"k", "inf"}, {"p", p}};
      else
        atom = {{"k", k}, {"p", p}};
      pmf.push_back(atom);
    }
    gating.push_back(json{{"pmf", pmf}});
  }
  root["gating"] = gating;
  return root.dump(indent);
}

std::string trajectory_csv(const std::vector<double>& grid, const std::vector<Vec>& values) {
  std::ostringstream out;
  const std::size_t n = values.empty() ? 0 : values.front().size();
  out << "t";
  for (std::size_t j = 1; j <= n; ++j) out << ",x" << j;
  out << ",total\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out << format_double(grid[g]);
    double total = 0.0;
    for (double x : values[g]) {
      out << "," << format_double(x);
      total += x;
    }
    out << "," << format_double(total) << "\n";
  }
  return out.str();
}

std::string trajectory_csv_counts(const std::vector<double>& grid,
                                  const std::vector<std::vector<std::int64_t>>& values) {
  std::ostringstream out;
  const std::size_t n = values.empty() ? 0 : values.front().size();
  out << "t";
  for (std::size_t j = 1; j <= n; ++j) out << ",x" << j;
  out << ",total\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out << format_double(grid[g]);
    std::int64_t total = 0;
    for (std::int64_t x : values[g]) {
      out << "," << x;
      total += x;
    }
    out << "," << total << "\n";
  }
  return out.str();
}

std::string cycles_csv(const std::vector<double>& cycle_instants) {
  std::ostringstream out;
  out << "n,t_cycle\n";
  for (std::size_t k = 0; k < cycle_instants.size(); ++k)
    out << (k + 1) << "," << format_double(cycle_instants[k]) << "\n";
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
  }
  fs::rename(tmp, target);
}

}  // namespace pollnet

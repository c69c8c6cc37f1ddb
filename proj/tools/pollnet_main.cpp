// pollnet: analyzer / simulator / optimizer for overloaded cyclic polling
// networks with customer rerouting and random multi-gated service.
//
//   pollnet analyze  --spec net.json [--out DIR]
//   pollnet fluid    --spec net.json --out DIR [--window LO:HI:STEP] [--xi X]
//   pollnet simulate --spec net.json --out DIR [--n 1,5,8] [--seeds K] [--seed S] [--window ...]
//   pollnet validate --spec net.json [--out DIR] [--n 2,4,6,8] [--seeds K] [--seed S] [--window ...]
//   pollnet optimize --spec net.json [--out DIR] [--mode exhaustive|ga] [--kmax K] [--seed S]
//
// Exit codes: 0 success, 2 parse error, 3 model validation error, 4 numeric failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pollnet/branching.hpp"
#include "pollnet/errors.hpp"
#include "pollnet/fluid.hpp"
#include "pollnet/model.hpp"
#include "pollnet/optimizer.hpp"
#include "pollnet/simulator.hpp"
#include "pollnet/spec_io.hpp"

using nlohmann::json;
using namespace pollnet;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Window {
  double lo = 0.5, hi = 5.0, step = 0.05;

  Vec grid() const {
    Vec g;
    const long count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) g.push_back(std::min(lo + i * step, hi));
    return g;
  }
};

Window parse_window(const std::string& text) {
  Window w;
  std::istringstream in(text);
  char c1 = 0, c2 = 0;
  if (!(in >> w.lo >> c1 >> w.hi >> c2 >> w.step) || c1 != ':' || c2 != ':')
    throw ParseError("--window must be LO:HI:STEP");
  if (!(w.step > 0.0) || w.hi < w.lo) throw ParseError("--window must satisfy LO <= HI, STEP > 0");
  return w;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw ParseError("--n needs at least one integer");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open spec file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json assignment_json(const GatingAssignment& g) {
  json a = json::array();
  for (int k : g) {
    if (k == kGateInf)
      a.push_back("inf");
    else
      a.push_back(k);
  }
  return a;
}

struct Outputs {
  std::optional<std::string> dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    if (!dir) return;
    write_file_atomic(*dir + "/" + name, content);
    files.push_back(name);
  }
};

void write_manifest(Outputs& out, const std::string& command, const std::string& spec_path,
                    const json& seeds, double duration_s) {
  if (!out.dir) return;
  json m;
  m["command"] = command;
  m["spec"] = spec_path;
  m["seeds"] = seeds;
  m["out"] = *out.dir;
  m["tool_version"] = kVersion;
  m["duration_seconds"] = duration_s;
  m["files"] = out.files;
  write_file_atomic(*out.dir + "/manifest.json", m.dump(2) + "\n");
}

NetworkSpec load_valid_spec(const std::string& path, json* validation = nullptr) {
  const NetworkSpec spec = parse_spec_json(read_file(path));
  const ValidationReport rep = validate(spec);
  if (validation) {
    (*validation)["errors"] = rep.errors;
    (*validation)["warnings"] = rep.warnings;
    (*validation)["overloaded"] = rep.overloaded;
  }
  if (!rep.ok()) throw ModelError(rep.errors.front());
  return spec;
}

struct Pipeline {
  DerivedQuantities dq;
  OffspringMatrices om;
  PerronEigenpair pe;
  FluidSkeleton sk;
};

Pipeline analyze_pipeline(const NetworkSpec& spec) {
  Pipeline p;
  p.dq = derive(spec);
  p.om = build_matrices(p.dq, spec);
  p.pe = perron(p.om.M);
  p.sk = build_skeleton(spec, p.dq, p.om, p.pe);
  return p;
}

json skeleton_json(const FluidSkeleton& sk) {
  json s;
  s["alpha"] = sk.alpha;
  s["theta"] = sk.theta;
  s["beta"] = sk.beta();
  s["bbar"] = vec_json(sk.bbar);
  s["abar"] = matrix_json(sk.abar);
  s["b"] = vec_json(sk.b);
  s["a"] = matrix_json(sk.a);
  s["total_slopes"] = vec_json(sk.total_slope);
  return s;
}

int cmd_analyze(const std::string& spec_path, Outputs out) {
  const auto start = std::chrono::steady_clock::now();
  json report;
  const NetworkSpec spec = load_valid_spec(spec_path, &report["validation"]);
  const Pipeline p = analyze_pipeline(spec);

  report["derived"] = {{"gamma", vec_json(p.dq.gamma)},   {"cbar", vec_json(p.dq.cbar)},
                       {"rho_gamma", vec_json(p.dq.rho_gamma)}, {"rho_lc", vec_json(p.dq.rho_lc)},
                       {"rho", p.dq.rho},                 {"bE", vec_json(p.dq.bE)},
                       {"phi", vec_json(p.dq.phi)},       {"f", vec_json(p.dq.f)},
                       {"t", vec_json(p.dq.t)},           {"mu", vec_json(p.dq.mu)}};
  json mk = json::array();
  for (const auto& m : p.om.Mk) mk.push_back(matrix_json(m));
  report["matrices"] = {{"Mk", mk},
                        {"M", matrix_json(p.om.M)},
                        {"mcheck", matrix_json(p.om.mcheck)},
                        {"msession", matrix_json(p.om.msession)}};
  report["perron"] = {{"theta", p.pe.theta}, {"v", vec_json(p.pe.v)}, {"u", vec_json(p.pe.u)}};
  report["immigration_weights"] = vec_json(immigration_weights(spec));

  std::cout << report.dump(2) << "\n";
  out.write("analysis.json", report.dump(2) + "\n");
  const double dur = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, "analyze", spec_path, json::array(), dur);
  return 0;
}

int cmd_fluid(const std::string& spec_path, Outputs out, const Window& window, double xi) {
  const auto start = std::chrono::steady_clock::now();
  const NetworkSpec spec = load_valid_spec(spec_path);
  const Pipeline p = analyze_pipeline(spec);

  const Vec grid = window.grid();
  const auto traj = p.sk.sample_trajectory(xi, grid);
  std::vector<Vec> values;
  values.reserve(traj.size());
  for (const auto& [t, x] : traj) values.push_back(x);

  json s = skeleton_json(p.sk);
  s["xi"] = xi;
  std::cout << s.dump(2) << "\n";
  out.write("skeleton.json", s.dump(2) + "\n");
  out.write("trajectory.csv", trajectory_csv(grid, values));
  const double dur = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, "fluid", spec_path, json::array(), dur);
  return 0;
}

int cmd_simulate(const std::string& spec_path, Outputs out, const std::vector<int>& ns,
                 int seeds, std::uint64_t seed_base, const Window& window,
                 const SimConfig& file_cfg) {
  const auto start = std::chrono::steady_clock::now();
  const NetworkSpec spec = load_valid_spec(spec_path);
  const Pipeline p = analyze_pipeline(spec);
  const Vec scaled_grid = window.grid();
  if (scaled_grid.empty() || window.hi <= 0.0) throw ParseError("empty grid");

  json summary;
  summary["theta"] = p.sk.theta;
  summary["window"] = {window.lo, window.hi, window.step};
  json runs = json::array();
  json seeds_used = json::array();
  int successes = 0;

  for (int n : ns) {
    const double scale = std::pow(p.sk.theta, n);
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(s);
      seeds_used.push_back(seed);
      json entry;
      entry["n"] = n;
      entry["seed"] = seed;
      try {
        SimConfig cfg = file_cfg;
        cfg.seed = seed;
        cfg.replication_id = s;
        cfg.horizon = scale * window.hi;
        cfg.record_grid.clear();
        for (double t : scaled_grid) cfg.record_grid.push_back(scale * t);
        const SimTrace trace = run(spec, cfg);
        const ScaledTrace st = scaled(trace, p.sk.theta, n, scaled_grid);
        const XiFit fit = estimate_xi(st, p.sk);

        std::ostringstream base;
        base << "scaled_n" << n << "_s" << seed;
        out.write(base.str() + ".csv", trajectory_csv(st.grid, st.values));
        out.write("cycles_n" + std::to_string(n) + "_s" + std::to_string(seed) + ".csv",
                  cycles_csv(trace.cycle_instants));
        entry["xi_hat"] = fit.xi_hat;
        entry["fit_error"] = fit.fit_error;
        entry["events"] = trace.event_count;
        entry["nu"] = trace.nu;
        entry["eta_n"] = eta_index(trace, p.sk.theta, n);
        ++successes;
      } catch (const NumericError& e) {
        entry["error"] = e.what();
      }
      runs.push_back(entry);
    }
  }
  summary["runs"] = runs;
  std::cout << summary.dump(2) << "\n";
  out.write("summary.json", summary.dump(2) + "\n");
  const double dur = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, "simulate", spec_path, seeds_used, dur);
  if (successes == 0) throw NumericError("all simulation runs failed");
  return 0;
}

int cmd_validate(const std::string& spec_path, Outputs out, const std::vector<int>& ns,
                 int seeds, std::uint64_t seed_base, const Window& window) {
  const auto start = std::chrono::steady_clock::now();
  const NetworkSpec spec = load_valid_spec(spec_path);
  const Pipeline p = analyze_pipeline(spec);
  const Vec scaled_grid = window.grid();

  json rows = json::array();
  std::vector<double> medians;
  for (int n : ns) {
    const double scale = std::pow(p.sk.theta, n);
    std::vector<double> fits;
    json fits_json = json::array();
    for (int s = 0; s < seeds; ++s) {
      SimConfig cfg;
      cfg.seed = seed_base + static_cast<std::uint64_t>(s);
      cfg.replication_id = s;
      cfg.horizon = scale * window.hi;
      for (double t : scaled_grid) cfg.record_grid.push_back(scale * t);
      const SimTrace trace = run(spec, cfg);
      const XiFit fit = estimate_xi(scaled(trace, p.sk.theta, n, scaled_grid), p.sk);
      fits.push_back(fit.fit_error);
      fits_json.push_back({{"seed", cfg.seed}, {"xi_hat", fit.xi_hat}, {"fit_error", fit.fit_error}});
    }
    std::vector<double> sorted = fits;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    medians.push_back(median);
    rows.push_back({{"n", n}, {"median_fit_error", median}, {"fits", fits_json}});
  }
  bool nonincreasing = true;
  for (std::size_t i = 1; i < medians.size(); ++i)
    if (medians[i] > medians[i - 1]) nonincreasing = false;

  json table;
  table["theta"] = p.sk.theta;
  table["rows"] = rows;
  table["median_nonincreasing"] = nonincreasing;  // reported, not enforced
  std::cout << table.dump(2) << "\n";
  out.write("convergence.json", table.dump(2) + "\n");
  const double dur = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, "validate", spec_path, json(seed_base), dur);
  return 0;
}

int cmd_optimize(const std::string& spec_path, Outputs out, const std::string& mode, int kmax,
                 const GaParams& ga) {
  const auto start = std::chrono::steady_clock::now();
  const NetworkSpec spec = load_valid_spec(spec_path);
  const auto candidates = default_candidates(spec.n, kmax);

  OptimizationResult res;
  if (mode == "exhaustive")
    res = exhaustive_search(spec, candidates);
  else if (mode == "ga")
    res = genetic_search(spec, candidates, ga);
  else
    throw ParseError("--mode must be exhaustive or ga");

  json r;
  r["mode"] = mode;
  r["best"] = assignment_json(res.best);
  r["beta"] = res.best_beta;
  json hist = json::array();
  std::ostringstream hist_csv;
  hist_csv << "iteration,best_beta\n";
  for (const auto& [it, beta] : res.history) {
    hist.push_back({it, beta});
    hist_csv << it << "," << format_double(beta) << "\n";
  }
  r["history"] = hist;
  r["evaluations"] = res.evaluations;
  std::cout << r.dump(2) << "\n";
  out.write("optimize.json", r.dump(2) + "\n");
  out.write("history.csv", hist_csv.str());
  const double dur = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, "optimize", spec_path, json(ga.seed), dur);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"overloaded polling network analyzer"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, window_text = "0.5:5:0.05", n_text = "0", mode = "exhaustive";
  double xi = 1.0;
  int seeds = 1, kmax = 32;
  std::uint64_t seed = 1;
  GaParams ga;

  auto add_common = [&](CLI::App* cmd, bool out_required) {
    cmd->add_option("--spec", spec_path, "network spec JSON")->required();
    auto* o = cmd->add_option("--out", out_dir, "output directory");
    if (out_required) o->required();
    return cmd;
  };

  auto* analyze = add_common(app.add_subcommand("analyze", "derived quantities, matrices, eigenpair"), false);
  auto* fluid = add_common(app.add_subcommand("fluid", "fluid skeleton and trajectory CSV"), true);
  fluid->add_option("--window", window_text, "trajectory grid LO:HI:STEP");
  fluid->add_option("--xi", xi, "scale factor in [1, theta)");
  auto* simulate = add_common(app.add_subcommand("simulate", "scaled stochastic traces and xi fits"), true);
  simulate->add_option("--n", n_text, "scaling exponents, comma separated");
  simulate->add_option("--seeds", seeds, "replications per n");
  simulate->add_option("--seed", seed, "base seed");
  simulate->add_option("--window", window_text, "scaled window LO:HI:STEP");
  auto* validate_cmd = add_common(app.add_subcommand("validate", "convergence table over n"), false);
  validate_cmd->add_option("--n", n_text, "scaling exponents, comma separated");
  validate_cmd->add_option("--seeds", seeds, "replications per n");
  validate_cmd->add_option("--seed", seed, "base seed");
  validate_cmd->add_option("--window", window_text, "scaled window LO:HI:STEP");
  auto* optimize = add_common(app.add_subcommand("optimize", "search gating assignments minimizing beta"), false);
  optimize->add_option("--mode", mode, "exhaustive or ga");
  optimize->add_option("--kmax", kmax, "candidate indexes 1..kmax plus exhaustive");
  optimize->add_option("--seed", seed, "GA seed");
  optimize->add_option("--population", ga.population, "GA population");
  optimize->add_option("--generations", ga.generations, "GA generations");
  optimize->add_option("--mutation", ga.mutation_rate, "GA per-gene mutation rate");
  optimize->add_option("--crossover", ga.crossover_rate, "GA crossover rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Outputs out;
  if (!out_dir.empty()) out.dir = out_dir;

  try {
    if (analyze->parsed()) return cmd_analyze(spec_path, std::move(out));
    if (fluid->parsed()) return cmd_fluid(spec_path, std::move(out), parse_window(window_text), xi);
    if (simulate->parsed()) {
      const SimConfig file_cfg = parse_sim_config_json(read_file(spec_path));
      return cmd_simulate(spec_path, std::move(out), parse_int_list(n_text), seeds, seed,
                          parse_window(window_text), file_cfg);
    }
    if (validate_cmd->parsed())
      return cmd_validate(spec_path, std::move(out), parse_int_list(n_text), seeds, seed,
                          parse_window(window_text));
    if (optimize->parsed()) {
      ga.seed = seed;
      return cmd_optimize(spec_path, std::move(out), mode, kmax, ga);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

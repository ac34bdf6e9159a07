#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccm/controller.hpp"
#include "ccm/geodesic.hpp"
#include "ccm/lmi.hpp"
#include "ccm/lqr.hpp"
#include "ccm/metric_io.hpp"
#include "ccm/simulator.hpp"
#include "ccm/system.hpp"

namespace ccm::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct GridSpec
{
  double lo{-10.0};
  double hi{10.0};
  double step{1.0};
};

struct Experiment
{
  std::string metric_path;
  std::string system{"case_study"};
  std::string controller{"ccm"};
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> target;
  SimulationOptions simulation;
  int repeats{50};
  std::uint64_t seed{0};
  SolverConfig solver;
  GridSpec lmi_grid;
  bool skip_lmi{false};
};

/// Raw flag values; only those actually given on the command line are applied.
struct Flags
{
  std::string metric, config, out, controller, system;
  std::vector<double> x0, target;
  int repeats{50};
  std::uint64_t seed{0};
  double horizon{0}, dt_ctrl{0}, dt_int{0};
  int a{0}, D_min{0}, D_max{0}, max_iter{0};
  double beta{0}, uniformity_tol{0};
  double grid_lo{0}, grid_hi{0}, grid_step{0};
  bool skip_lmi{false};
  bool shooting{false};
  int segments{100};
  int random_endpoints{0};
  int sweep_D_max{12};
  std::vector<int> a_values{2, 4, 6, 8};
};

json to_json(const Eigen::VectorXd & v)
{
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) { j.push_back(v(i)); }
  return j;
}

std::string format_number(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Eigen::VectorXd to_state(const std::vector<double> & v, int n, const char * what)
{
  if (static_cast<int>(v.size()) != n) {
    throw UsageError(std::string(what) + " needs " + std::to_string(n) + " components, got " + std::to_string(v.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

std::vector<double> json_vector(const json & j, const std::string & key)
{
  if (!j.is_array()) { throw UsageError("config: '" + key + "' must be an array of numbers"); }
  std::vector<double> v;
  for (const auto & e : j) {
    if (!e.is_number()) { throw UsageError("config: '" + key + "' must be an array of numbers"); }
    v.push_back(e.get<double>());
  }
  return v;
}

template<typename T>
T json_value(const json & j, const std::string & key)
{
  try {
    return j.get<T>();
  } catch (const json::exception &) {
    throw UsageError("config: '" + key + "' has the wrong type");
  }
}

void check_keys(const json & j, const std::set<std::string> & allowed, const std::string & where)
{
  if (!j.is_object()) { throw UsageError("config: '" + where + "' must be an object"); }
  for (const auto & [key, value] : j.items()) {
    if (!allowed.count(key)) { throw UsageError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'"); }
  }
}

void apply_config(Experiment & ex, const fs::path & path)
{
  std::ifstream in(path);
  if (!in) { throw UsageError("cannot open config file " + path.string()); }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error & e) {
    throw UsageError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  check_keys(j,
             {"metric", "system", "controller", "x0", "target", "horizon", "dt_ctrl", "dt_int", "repeats", "seed",
              "solver", "lmi_grid", "skip_lmi"},
             "");
  if (j.contains("metric")) {
    fs::path m = json_value<std::string>(j["metric"], "metric");
    if (m.is_relative()) { m = path.parent_path() / m; }
    ex.metric_path = m.string();
  }
  if (j.contains("system")) { ex.system = json_value<std::string>(j["system"], "system"); }
  if (j.contains("controller")) { ex.controller = json_value<std::string>(j["controller"], "controller"); }
  if (j.contains("x0")) { ex.x0 = json_vector(j["x0"], "x0"); }
  if (j.contains("target")) { ex.target = json_vector(j["target"], "target"); }
  if (j.contains("horizon")) { ex.simulation.horizon = json_value<double>(j["horizon"], "horizon"); }
  if (j.contains("dt_ctrl")) { ex.simulation.dt_ctrl = json_value<double>(j["dt_ctrl"], "dt_ctrl"); }
  if (j.contains("dt_int")) { ex.simulation.dt_int = json_value<double>(j["dt_int"], "dt_int"); }
  if (j.contains("repeats")) { ex.repeats = json_value<int>(j["repeats"], "repeats"); }
  if (j.contains("seed")) { ex.seed = json_value<std::uint64_t>(j["seed"], "seed"); }
  if (j.contains("skip_lmi")) { ex.skip_lmi = json_value<bool>(j["skip_lmi"], "skip_lmi"); }
  if (j.contains("solver")) {
    const json & s = j["solver"];
    check_keys(s, {"beta", "energy_tol", "alpha0", "cbar", "tau", "max_iter", "uniformity_tol", "D_min", "D_max", "a"},
               "solver");
    auto & c = ex.solver;
    if (s.contains("beta")) { c.beta = json_value<double>(s["beta"], "solver.beta"); }
    if (s.contains("energy_tol")) { c.energy_tol = json_value<double>(s["energy_tol"], "solver.energy_tol"); }
    if (s.contains("alpha0")) { c.alpha0 = json_value<double>(s["alpha0"], "solver.alpha0"); }
    if (s.contains("cbar")) { c.cbar = json_value<double>(s["cbar"], "solver.cbar"); }
    if (s.contains("tau")) { c.tau = json_value<double>(s["tau"], "solver.tau"); }
    if (s.contains("max_iter")) { c.max_iter = json_value<int>(s["max_iter"], "solver.max_iter"); }
    if (s.contains("uniformity_tol")) { c.uniformity_tol = json_value<double>(s["uniformity_tol"], "solver.uniformity_tol"); }
    if (s.contains("D_min")) { c.D_min = json_value<int>(s["D_min"], "solver.D_min"); }
    if (s.contains("D_max")) { c.D_max = json_value<int>(s["D_max"], "solver.D_max"); }
    if (s.contains("a")) { c.a = json_value<int>(s["a"], "solver.a"); }
  }
  if (j.contains("lmi_grid")) {
    const json & g = j["lmi_grid"];
    check_keys(g, {"lo", "hi", "step"}, "lmi_grid");
    if (g.contains("lo")) { ex.lmi_grid.lo = json_value<double>(g["lo"], "lmi_grid.lo"); }
    if (g.contains("hi")) { ex.lmi_grid.hi = json_value<double>(g["hi"], "lmi_grid.hi"); }
    if (g.contains("step")) { ex.lmi_grid.step = json_value<double>(g["step"], "lmi_grid.step"); }
  }
}

Experiment build_experiment(const CLI::App & sub, const Flags & f)
{
  Experiment ex;
  if (const char * env = std::getenv("CCM_METRIC_PATH"); env && *env) { ex.metric_path = env; }
  if (sub.count("--config")) { apply_config(ex, f.config); }
  auto given = [&](const char * name) { return sub.get_option_no_throw(name) && sub.count(name) > 0; };
  if (given("--metric")) { ex.metric_path = f.metric; }
  if (given("--system")) { ex.system = f.system; }
  if (given("--controller")) { ex.controller = f.controller; }
  if (given("--x0")) { ex.x0 = f.x0; }
  if (given("--target")) { ex.target = f.target; }
  if (given("--repeats")) { ex.repeats = f.repeats; }
  if (given("--seed")) { ex.seed = f.seed; }
  if (given("--horizon")) { ex.simulation.horizon = f.horizon; }
  if (given("--dt-ctrl")) { ex.simulation.dt_ctrl = f.dt_ctrl; }
  if (given("--dt-int")) { ex.simulation.dt_int = f.dt_int; }
  if (given("--a")) { ex.solver.a = f.a; }
  if (given("--d-min")) { ex.solver.D_min = f.D_min; }
  if (given("--d-max")) { ex.solver.D_max = f.D_max; }
  if (given("--max-iter")) { ex.solver.max_iter = f.max_iter; }
  if (given("--beta")) { ex.solver.beta = f.beta; }
  if (given("--uniformity-tol")) { ex.solver.uniformity_tol = f.uniformity_tol; }
  if (given("--grid-lo")) { ex.lmi_grid.lo = f.grid_lo; }
  if (given("--grid-hi")) { ex.lmi_grid.hi = f.grid_hi; }
  if (given("--grid-step")) { ex.lmi_grid.step = f.grid_step; }
  if (given("--skip-lmi")) { ex.skip_lmi = f.skip_lmi; }

  if (ex.system != "case_study") { throw UsageError("unknown system '" + ex.system + "' (supported: case_study)"); }
  if (ex.controller != "ccm" && ex.controller != "lqr") {
    throw UsageError("unknown controller '" + ex.controller + "' (expected ccm or lqr)");
  }
  if (ex.repeats < 1) { throw UsageError("--repeats must be at least 1"); }
  try {
    ex.solver.validate();
    ex.simulation.validate();
  } catch (const std::invalid_argument & e) {
    throw UsageError(e.what());
  }
  if (!(ex.lmi_grid.step > 0.0) || ex.lmi_grid.hi < ex.lmi_grid.lo) { throw UsageError("invalid LMI grid"); }
  return ex;
}

Metric require_metric(const Experiment & ex)
{
  if (ex.metric_path.empty()) { throw UsageError("no metric file: pass --metric, set it in --config, or set CCM_METRIC_PATH"); }
  return load_metric(ex.metric_path);
}

std::shared_ptr<const SystemModel> make_system(const Experiment &)
{
  return std::make_shared<const SystemModel>(case_study_system());
}

StateGrid make_grid(const Experiment & ex, int n)
{
  return StateGrid::box(n, ex.lmi_grid.lo, ex.lmi_grid.hi, ex.lmi_grid.step);
}

json report_to_json(const LmiReport & r)
{
  json j;
  j["grid"] = r.grid_description;
  j["points_checked"] = r.points_checked;
  j["worst_eigenvalue"] = r.worst_eigenvalue;
  j["worst_point"] = to_json(r.worst_point);
  j["pass"] = r.pass;
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Timing
{
  double mean{0.0};
  double min{0.0};
};

Timing summarize(const std::vector<double> & t)
{
  Timing out;
  if (t.empty()) { return out; }
  out.min = t.front();
  for (double v : t) {
    out.mean += v;
    out.min = std::min(out.min, v);
  }
  out.mean /= static_cast<double>(t.size());
  return out;
}

std::ofstream open_output(const std::string & path)
{
  std::ofstream f(path);
  if (!f) { throw UsageError("cannot write " + path); }
  return f;
}

int cmd_geodesic(const Experiment & ex, const std::string & out_path, std::ostream & out)
{
  const Metric metric = require_metric(ex);
  const int n = metric.n();
  if (!ex.x0) { throw UsageError("geodesic needs --x0"); }
  const Eigen::VectorXd x = to_state(*ex.x0, n, "--x0");
  const Eigen::VectorXd x_star = ex.target ? to_state(*ex.target, n, "--target") : Eigen::VectorXd::Zero(n);

  GeodesicSolution<double> sol;
  std::vector<double> times;
  for (int r = 0; r < ex.repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    sol = solve_adaptive<double>(metric, x_star, x, ex.solver);
    times.push_back(seconds_since(t0));
  }
  const Timing timing = summarize(times);

  json j;
  j["command"] = "geodesic";
  j["x_start"] = to_json(x_star);
  j["x_end"] = to_json(x);
  j["converged"] = sol.converged;
  j["D"] = sol.D;
  j["N"] = sol.N;
  j["a"] = ex.solver.a;
  j["energy"] = sol.energy;
  j["uniformity_error"] = sol.uniformity_error;
  j["iterations"] = sol.iterations;
  json attempts = json::array();
  for (const auto & a : sol.attempts) {
    attempts.push_back({{"D", a.D}, {"N", a.N}, {"uniformity_error", a.uniformity_error}, {"iterations", a.iterations},
                        {"converged", a.converged}});
  }
  j["attempts"] = attempts;
  j["repeats"] = ex.repeats;
  j["mean_time"] = timing.mean;
  j["min_time"] = timing.min;

  if (!out_path.empty()) {
    std::ofstream f = open_output(out_path);
    constexpr int kSamples = 201;
    Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(kSamples, 0.0, 1.0);
    const auto table = BasisTable<double>::make(sol.D, s);
    const auto curve = eval_curve<double>(sol.c, n, table);
    f << "s";
    for (int i = 1; i <= n; ++i) { f << ",x" << i; }
    f << ",speed\n";
    for (int k = 0; k < kSamples; ++k) {
      f << format_number(s(k));
      for (int i = 0; i < n; ++i) { f << ',' << format_number(curve.points(i, k)); }
      f << ',' << format_number(metric.energy_integrand(curve.points.col(k), curve.tangents.col(k))) << '\n';
    }
  }

  out << j.dump(2) << '\n';
  return sol.converged ? kSuccess : kNumericalFailure;
}

int cmd_simulate(const Experiment & ex, const std::string & out_path, std::ostream & out)
{
  const auto system = make_system(ex);
  const int n = system->n();
  if (!ex.x0) { throw UsageError("simulate needs --x0"); }
  const Eigen::VectorXd x0 = to_state(*ex.x0, n, "--x0");
  if (ex.target) { throw UsageError("simulate regulates to the origin; --target is not supported"); }

  json j;
  j["command"] = "simulate";
  j["controller"] = ex.controller;
  j["x0"] = to_json(x0);
  j["horizon"] = ex.simulation.horizon;
  j["dt_ctrl"] = ex.simulation.dt_ctrl;
  j["dt_int"] = ex.simulation.dt_int;

  FeedbackLaw law;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  if (ex.controller == "lqr") {
    const LqrController lqr = lqr_design(system->jacobian(zero, 0.0), system->input_matrix(zero, 0.0),
                                         Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(system->m(), system->m()));
    j["gain"] = to_json(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(lqr.K.data(), lqr.K.size())));
    law = make_feedback(lqr);
  } else {
    auto metric = std::make_shared<const Metric>(require_metric(ex));
    std::optional<StateGrid> grid;
    if (!ex.skip_lmi) {
      grid = make_grid(ex, n);
      const LmiReport report = validate_lmi(*metric, *system, *grid);
      j["lmi"] = report_to_json(report);
      if (!report.pass) {
        out << j.dump(2) << '\n';
        throw NumericalFailure("metric fails the contraction LMI; use --skip-lmi to override");
      }
    } else {
      j["lmi_overridden"] = true;
    }
    law = make_feedback(std::make_shared<const CcmController>(metric, system, ex.solver, grid));
  }

  const Trajectory traj = simulate(*system, law, x0, ex.simulation);
  if (!out_path.empty()) {
    std::ofstream f = open_output(out_path);
    write_csv(traj, f);
  }

  std::size_t stale = 0;
  for (bool b : traj.stale) { stale += b ? 1 : 0; }
  j["status"] = to_string(traj.status);
  if (!traj.failure_message.empty()) { j["failure"] = traj.failure_message; }
  j["verdict"] = traj.size() > 0 ? to_string(stability_verdict(traj)) : std::string("not_stabilized");
  j["steps"] = traj.size();
  j["stale_steps"] = stale;
  if (traj.size() > 0) {
    j["final_time"] = traj.times.back();
    j["final_state"] = to_json(traj.states.back());
  }
  j["mean_solve_time"] = traj.mean_solve_time();
  j["max_solve_time"] = traj.max_solve_time();
  out << j.dump(2) << '\n';
  return traj.status == SimulationStatus::ControllerFailed ? kNumericalFailure : kSuccess;
}

int cmd_validate_metric(const Experiment & ex, std::ostream & out)
{
  const Metric metric = require_metric(ex);
  const auto system = make_system(ex);
  if (metric.n() != system->n()) { throw UsageError("metric dimension does not match the system"); }
  const LmiReport report = validate_lmi(metric, *system, make_grid(ex, system->n()));
  json j;
  j["command"] = "validate-metric";
  j["metric"] = ex.metric_path;
  j["lambda"] = metric.lambda();
  const json fields = report_to_json(report);
  for (const auto & [k, v] : fields.items()) { j[k] = v; }
  out << j.dump(2) << '\n';
  return report.pass ? kSuccess : kNumericalFailure;
}

struct BenchRow
{
  std::string sweep;
  Eigen::VectorXd endpoint;
  std::string method;
  int a{0};
  int D{0};
  int N{0};
  double uniformity_error{std::nan("")};
  double energy{std::nan("")};
  int iterations{0};
  bool converged{false};
  Timing timing;
  std::string status{"ok"};
};

void write_bench(const std::vector<BenchRow> & rows, std::ostream & out)
{
  out << "sweep,endpoint,method,a,D,N,uniformity_error,energy,iterations,converged,mean_time,min_time,status\n";
  for (const auto & r : rows) {
    std::string ep;
    for (Eigen::Index i = 0; i < r.endpoint.size(); ++i) { ep += (i ? ";" : "") + format_number(r.endpoint(i)); }
    out << r.sweep << ',' << ep << ',' << r.method << ',' << r.a << ',' << r.D << ',' << r.N << ','
        << format_number(r.uniformity_error) << ',' << format_number(r.energy) << ',' << r.iterations << ','
        << (r.converged ? "true" : "false") << ',' << format_number(r.timing.mean) << ','
        << format_number(r.timing.min) << ',' << r.status << '\n';
  }
}

BenchRow bench_adaptive(const Metric & metric, const std::string & sweep, const Eigen::VectorXd & x,
                        const SolverConfig & config, int repeats)
{
  BenchRow row;
  row.sweep = sweep;
  row.endpoint = x;
  row.method = "pseudospectral_adaptive";
  row.a = config.a;
  try {
    std::vector<double> times;
    GeodesicSolution<double> sol;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      sol = solve_adaptive<double>(metric, Eigen::VectorXd::Zero(metric.n()), x, config);
      times.push_back(seconds_since(t0));
    }
    row.D = sol.D;
    row.N = sol.N;
    row.uniformity_error = sol.uniformity_error;
    row.energy = sol.energy;
    row.iterations = sol.iterations;
    row.converged = sol.converged;
    row.timing = summarize(times);
    if (!sol.converged) { row.status = "FAIL:not_accepted"; }
  } catch (const std::exception & e) {
    row.status = std::string("FAIL:") + e.what();
  }
  return row;
}

BenchRow bench_fixed(const Metric & metric, const Eigen::VectorXd & x, int D, const SolverConfig & config, int repeats)
{
  BenchRow row;
  row.sweep = "a_sweep";
  row.endpoint = x;
  row.method = "pseudospectral_fixed";
  row.a = config.a;
  row.D = D;
  row.N = D + config.a;
  try {
    const GeodesicProblem<double> problem(metric, Eigen::VectorXd::Zero(metric.n()), x, D, D + config.a);
    std::vector<double> times;
    GeodesicSolution<double> sol;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      sol = solve_geodesic(problem, config);
      times.push_back(seconds_since(t0));
    }
    row.uniformity_error = sol.uniformity_error;
    row.energy = sol.energy;
    row.iterations = sol.iterations;
    row.converged = sol.converged;
    row.timing = summarize(times);
    if (!sol.converged) { row.status = "FAIL:max_iter"; }
  } catch (const std::exception & e) {
    row.status = std::string("FAIL:") + e.what();
  }
  return row;
}

int cmd_bench(const Experiment & ex, const Flags & f, std::ostream & out)
{
  const Metric metric = require_metric(ex);
  const int n = metric.n();
  if (n != 3) { throw UsageError("bench sweeps are defined for the 3-state case study"); }
  if (f.sweep_D_max < ex.solver.D_min) { throw UsageError("--sweep-d-max must be >= the minimum degree"); }
  for (int a : f.a_values) {
    if (a < 1) { throw UsageError("--a-values entries must be >= 1"); }
  }
  if (f.segments < 2) { throw UsageError("--segments must be at least 2"); }
  if (f.random_endpoints < 0) { throw UsageError("--random must be non-negative"); }

  std::vector<BenchRow> rows;
  for (double v : {1.0, 3.0, 5.0, 7.0, 9.0}) {
    rows.push_back(bench_adaptive(metric, "table", Eigen::VectorXd::Constant(n, v), ex.solver, ex.repeats));
  }

  const Eigen::VectorXd x9 = Eigen::VectorXd::Constant(n, 9.0);
  for (int a : f.a_values) {
    SolverConfig config = ex.solver;
    config.a = a;
    BenchRow adaptive = bench_adaptive(metric, "a_sweep", x9, config, ex.repeats);
    rows.push_back(adaptive);
    for (int D = config.D_min; D <= f.sweep_D_max; ++D) { rows.push_back(bench_fixed(metric, x9, D, config, ex.repeats)); }
  }

  if (f.random_endpoints > 0) {
    std::mt19937_64 rng(ex.seed);
    std::uniform_real_distribution<double> dist(ex.lmi_grid.lo, ex.lmi_grid.hi);
    for (int k = 0; k < f.random_endpoints; ++k) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) { x(i) = dist(rng); }
      rows.push_back(bench_adaptive(metric, "random", x, ex.solver, ex.repeats));
    }
  }

  if (f.shooting) {
    const Eigen::VectorXd x1 = Eigen::VectorXd::Constant(n, 1.0);
    BenchRow row;
    row.sweep = "shooting";
    row.endpoint = x1;
    row.method = "shooting_" + std::to_string(f.segments);
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const auto sol = shooting_baseline<double>(metric, Eigen::VectorXd::Zero(n), x1, f.segments, ex.solver);
      const double t = seconds_since(t0);
      row.uniformity_error = sol.uniformity_error;
      row.energy = sol.energy;
      row.iterations = sol.iterations;
      row.converged = sol.converged;
      row.timing = {t, t};
      if (!sol.converged) { row.status = "FAIL:max_iter"; }
    } catch (const std::exception & e) {
      row.status = std::string("FAIL:") + e.what();
    }
    rows.push_back(row);
    rows.push_back(bench_adaptive(metric, "shooting", x1, ex.solver, ex.repeats));
  }

  if (f.out.empty()) {
    write_bench(rows, out);
  } else {
    std::ofstream file = open_output(f.out);
    write_bench(rows, file);
  }
  for (const auto & r : rows) {
    if (r.status != "ok") { return kNumericalFailure; }
  }
  return kSuccess;
}

void add_common(CLI::App * sub, Flags & f)
{
  sub->add_option("--metric", f.metric, "Metric JSON file (default: $CCM_METRIC_PATH)");
  sub->add_option("--config", f.config, "Experiment config JSON; command-line flags take precedence")->check(CLI::ExistingFile);
  sub->add_option("--system", f.system, "System model (case_study)");
}

void add_solver(CLI::App * sub, Flags & f)
{
  sub->add_option("--a", f.a, "Node surplus, N = D + a");
  sub->add_option("--d-min", f.D_min, "Smallest polynomial degree");
  sub->add_option("--d-max", f.D_max, "Largest polynomial degree");
  sub->add_option("--max-iter", f.max_iter, "Quasi-Newton iteration cap");
  sub->add_option("--beta", f.beta, "Projected-gradient tolerance");
  sub->add_option("--uniformity-tol", f.uniformity_tol, "Acceptance threshold for the uniformity error");
}

void add_grid(CLI::App * sub, Flags & f)
{
  sub->add_option("--grid-lo", f.grid_lo, "LMI grid lower bound per coordinate");
  sub->add_option("--grid-hi", f.grid_hi, "LMI grid upper bound per coordinate");
  sub->add_option("--grid-step", f.grid_step, "LMI grid spacing");
}

}  // namespace

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"CCM geodesic solver and closed-loop experiments"};
  app.name(args.empty() ? "ccm" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  Flags f;

  CLI::App * geo = app.add_subcommand("geodesic", "Solve the adaptive geodesic from --target to --x0");
  add_common(geo, f);
  add_solver(geo, f);
  geo->add_option("--x0", f.x0, "Current state x (curve end)")->delimiter(',');
  geo->add_option("--target", f.target, "Target state x* (curve start, default 0)")->delimiter(',');
  geo->add_option("--repeats", f.repeats, "Timing repeats")->check(CLI::PositiveNumber);
  geo->add_option("--out", f.out, "Write the sampled curve as CSV");

  CLI::App * sim = app.add_subcommand("simulate", "Closed-loop simulation of the case-study system");
  add_common(sim, f);
  add_solver(sim, f);
  add_grid(sim, f);
  sim->add_option("--controller", f.controller, "ccm or lqr");
  sim->add_option("--x0", f.x0, "Initial state")->delimiter(',');
  sim->add_option("--target", f.target, "Reference state (only the origin is supported)")->delimiter(',');
  sim->add_option("--horizon", f.horizon, "Simulated time in seconds");
  sim->add_option("--dt-ctrl", f.dt_ctrl, "Control period");
  sim->add_option("--dt-int", f.dt_int, "RK4 step");
  sim->add_flag("--skip-lmi", f.skip_lmi, "Do not validate the metric before building the CCM controller");
  sim->add_option("--out", f.out, "Write the trajectory CSV");

  CLI::App * val = app.add_subcommand("validate-metric", "Check the contraction LMI on a state grid");
  add_common(val, f);
  add_grid(val, f);

  CLI::App * bench = app.add_subcommand("bench", "Degree/timing sweeps as CSV");
  add_common(bench, f);
  add_solver(bench, f);
  bench->add_option("--repeats", f.repeats, "Timing repeats per cell")->check(CLI::PositiveNumber);
  bench->add_option("--seed", f.seed, "Seed for --random endpoints");
  bench->add_option("--random", f.random_endpoints, "Additional random endpoints in the grid box");
  bench->add_option("--a-values", f.a_values, "Node surpluses for the a-sweep")->delimiter(',');
  bench->add_option("--sweep-d-max", f.sweep_D_max, "Largest degree in the a-sweep");
  bench->add_flag("--shooting", f.shooting, "Add the shooting baseline on (1,1,1)");
  bench->add_option("--segments", f.segments, "Shooting segments");
  bench->add_option("--out", f.out, "Write the CSV here instead of stdout");
  add_grid(bench, f);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) { reversed.pop_back(); }
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    CLI::App * sub = app.get_subcommands().front();
    const Experiment ex = build_experiment(*sub, f);
    if (sub == geo) { return cmd_geodesic(ex, f.out, out); }
    if (sub == sim) { return cmd_simulate(ex, f.out, out); }
    if (sub == val) { return cmd_validate_metric(ex, out); }
    return cmd_bench(ex, f, out);
  } catch (const UsageError & e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const MetricFormatError & e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument & e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception & e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace ccm::cli

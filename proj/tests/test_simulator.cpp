#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ccm/controller.hpp"
#include "ccm/lqr.hpp"
#include "ccm/simulator.hpp"
#include "ccm/system.hpp"
#include "support.hpp"

using namespace ccm;
using ccm::test::Gen;

namespace {

FeedbackLaw zero_law(int m)
{
  return [m](const Eigen::VectorXd &, double) { return ControlSample{Eigen::VectorXd::Zero(m)}; };
}

FeedbackLaw case_study_lqr_law()
{
  const SystemModel sys = case_study_system();
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  return make_feedback(lqr_design(sys.jacobian(z, 0.0), sys.input_matrix(z, 0.0), Eigen::MatrixXd::Identity(3, 3),
                                  Eigen::MatrixXd::Identity(1, 1)));
}

SimulationOptions options(double horizon, double dt_ctrl, double dt_int)
{
  SimulationOptions o;
  o.horizon = horizon;
  o.dt_ctrl = dt_ctrl;
  o.dt_int = dt_int;
  return o;
}

}  // namespace

TEST_CASE("case-study dynamics")
{
  const SystemModel sys = case_study_system();
  CHECK(sys.n() == 3);
  CHECK(sys.m() == 1);
  CHECK(sys.drift(Eigen::VectorXd::Zero(3), 0.0).isZero(0));
  CHECK(sys.drift(Eigen::Vector3d(1, 1, 1), 0.0) == Eigen::Vector3d(0, -1, -1));
  Eigen::Matrix3d A0;
  A0 << -1, 0, 1, 0, -1, 1, 0, -1, 0;
  CHECK(sys.jacobian(Eigen::VectorXd::Zero(3), 0.0) == A0);
  CHECK(sys.input_matrix(Eigen::Vector3d(4, 5, 6), 0.0) == Eigen::Vector3d(0, 0, 1));

  Gen gen(41);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = gen.vector(3, -10, 10);
    Eigen::MatrixXd fd(3, 3);
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
      e(j) = h;
      fd.col(j) = (sys.drift(x + e, 0.0) - sys.drift(x - e, 0.0)) / (2 * h);
    }
    CHECK((fd - sys.jacobian(x, 0.0)).norm() < 1e-6 * sys.jacobian(x, 0.0).norm());
  }
}

TEST_CASE("finite-difference jacobian fallback")
{
  const SystemModel sys("pendulum", 2, 1,
                        [](const Eigen::VectorXd & x, double) { return Eigen::Vector2d(x(1), -std::sin(x(0))); },
                        [](const Eigen::VectorXd &, double) { return Eigen::MatrixXd(Eigen::Vector2d(0, 1)); });
  CHECK_FALSE(sys.has_analytic_jacobian());
  Eigen::Matrix2d expected;
  expected << 0, 1, -std::cos(0.7), 0;
  CHECK((sys.jacobian(Eigen::Vector2d(0.7, 0.2), 0.0) - expected).norm() < 1e-8);
}

TEST_CASE("zero dynamics hold the state")
{
  const SystemModel still("still", 2, 2, [](const Eigen::VectorXd &, double) { return Eigen::VectorXd::Zero(2).eval(); },
                          [](const Eigen::VectorXd &, double) { return Eigen::MatrixXd::Identity(2, 2).eval(); });
  const Eigen::VectorXd x0 = Eigen::Vector2d(1.5, -3.0);
  const Trajectory t = simulate(still, zero_law(2), x0, options(1.0, 0.01, 0.001));
  CHECK(t.status == SimulationStatus::HorizonReached);
  for (const auto & x : t.states) { CHECK(x == x0); }
}

TEST_CASE("exponential decay")
{
  const SystemModel decay = scalar_linear_system(-1.0, 1.0);
  const Trajectory t = simulate(decay, zero_law(1), Eigen::VectorXd::Ones(1), options(1.0, 0.1, 1e-3));
  CHECK(t.times.back() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(t.states.back()(0) - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("rk4 global error is fourth order")
{
  const SystemModel decay = scalar_linear_system(-1.0, 1.0);
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(1);
  double err[3];
  int idx = 0;
  for (double h : {0.1, 0.05, 0.025}) {
    Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    const int steps = static_cast<int>(std::lround(2.0 / h));
    for (int k = 0; k < steps; ++k) { x = rk4_step(decay, x, u, k * h, h); }
    err[idx++] = std::abs(x(0) - std::exp(-2.0));
  }
  const double slope1 = std::log2(err[0] / err[1]);
  const double slope2 = std::log2(err[1] / err[2]);
  CHECK(std::abs(slope1 - 4.0) < 0.3);
  CHECK(std::abs(slope2 - 4.0) < 0.3);
}

TEST_CASE("trajectory invariants and csv")
{
  const Trajectory t = simulate(case_study_system(), case_study_lqr_law(), Eigen::Vector3d(1, 1, 1), options(0.5, 0.01, 0.001));
  REQUIRE(t.size() == 51);
  CHECK(t.states.size() == t.size());
  CHECK(t.controls.size() == t.size());
  CHECK(t.energies.size() == t.size());
  CHECK(t.solve_times.size() == t.size());
  CHECK(t.stale.size() == t.size());
  for (std::size_t k = 1; k < t.size(); ++k) { CHECK(t.times[k] > t.times[k - 1]); }

  std::ostringstream csv;
  write_csv(t, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x1,x2,x3,u1,energy,solve_time");
  int rows = 0;
  while (std::getline(in, line)) { ++rows; }
  CHECK(rows == 51);
}

TEST_CASE("options are validated")
{
  const SystemModel decay = scalar_linear_system(-1.0, 1.0);
  CHECK_THROWS_AS(simulate(decay, zero_law(1), Eigen::VectorXd::Ones(1), options(1.0, 1e-3, 1e-2)), std::invalid_argument);
  CHECK_THROWS_AS(simulate(decay, zero_law(1), Eigen::VectorXd::Ones(1), options(0.0, 1e-3, 1e-4)), std::invalid_argument);
  CHECK_THROWS_AS(simulate(decay, zero_law(1), Eigen::VectorXd::Ones(2), options(1.0, 1e-3, 1e-4)), std::invalid_argument);
}

TEST_CASE("controller failure is reported in the status")
{
  const SystemModel decay = scalar_linear_system(-1.0, 1.0);
  int calls = 0;
  const FeedbackLaw flaky = [&calls](const Eigen::VectorXd &, double) -> ControlSample {
    if (++calls > 3) { throw std::runtime_error("solver exploded"); }
    return ControlSample{Eigen::VectorXd::Zero(1)};
  };
  const Trajectory t = simulate(decay, flaky, Eigen::VectorXd::Ones(1), options(1.0, 0.1, 0.01));
  CHECK(t.status == SimulationStatus::ControllerFailed);
  CHECK(t.failure_message.find("solver exploded") != std::string::npos);
  CHECK(stability_verdict(t) == Verdict::NotStabilized);

  const FeedbackLaw nan_law = [](const Eigen::VectorXd &, double) {
    return ControlSample{Eigen::VectorXd::Constant(1, std::nan(""))};
  };
  CHECK(simulate(decay, nan_law, Eigen::VectorXd::Ones(1), options(1.0, 0.1, 0.01)).status == SimulationStatus::ControllerFailed);
}

TEST_CASE("early stop on convergence")
{
  SimulationOptions o = options(10.0, 0.01, 0.001);
  o.stop_tolerance = 1e-3;
  const Trajectory t = simulate(scalar_linear_system(-1.0, 1.0), zero_law(1), Eigen::VectorXd::Ones(1), o);
  CHECK(t.status == SimulationStatus::Converged);
  CHECK(t.times.back() < 10.0);
}

TEST_CASE("stability verdict")
{
  Trajectory zero;
  for (int k = 0; k <= 100; ++k) {
    zero.times.push_back(0.01 * k);
    zero.states.push_back(Eigen::VectorXd::Zero(3));
  }
  CHECK(stability_verdict(zero) == Verdict::Stabilized);

  Trajectory diverged = zero;
  diverged.status = SimulationStatus::Diverged;
  CHECK(stability_verdict(diverged) == Verdict::NotStabilized);

  Trajectory late = zero;
  late.states[90] = Eigen::Vector3d(0.0, 0.06, 0.0);
  CHECK(stability_verdict(late) == Verdict::NotStabilized);
  Trajectory early = zero;
  early.states[10] = Eigen::Vector3d(0.0, 5.0, 0.0);
  CHECK(stability_verdict(early) == Verdict::Stabilized);
}

TEST_CASE("lqr verdicts on the case study")
{
  const SystemModel sys = case_study_system();
  const SimulationOptions o;
  for (double v : {1.0, 5.0}) {
    const Trajectory t = simulate(sys, case_study_lqr_law(), Eigen::VectorXd::Constant(3, v), o);
    CAPTURE(v);
    CHECK(t.status == SimulationStatus::HorizonReached);
    CHECK(stability_verdict(t) == Verdict::Stabilized);
  }
  const Trajectory bad = simulate(sys, case_study_lqr_law(), Eigen::Vector3d(4, 4, 6), o);
  CHECK(bad.status == SimulationStatus::Diverged);
  CHECK(stability_verdict(bad) == Verdict::NotStabilized);
}

TEST_CASE("ccm and lqr agree near the origin")
{
  auto sys = std::make_shared<const SystemModel>(case_study_system());
  auto ccm = std::make_shared<const CcmController>(std::make_shared<const Metric>(test::fixture_metric()), sys, SolverConfig{},
                                                   std::nullopt);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 0.01);
  const SimulationOptions o;
  const Trajectory a = simulate(*sys, make_feedback(ccm), x0, o);
  const Trajectory b = simulate(*sys, case_study_lqr_law(), x0, o);
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  std::size_t stale = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, (a.states[k] - b.states[k]).cwiseAbs().maxCoeff());
    stale += a.stale[k] ? 1 : 0;
  }
  MESSAGE("max deviation " << worst);
  CHECK(worst < 1e-2 * x0.cwiseAbs().maxCoeff());
  CHECK(stale == 0);
  CHECK(stability_verdict(a) == Verdict::Stabilized);
}

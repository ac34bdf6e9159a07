#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccm/basis.hpp"
#include "support.hpp"

using namespace ccm;
using ccm::test::Gen;

TEST_CASE("cgl nodes")
{
  CHECK(cgl_nodes(1)(0) == 0.0);
  CHECK(cgl_nodes(1)(1) == 1.0);

  const Eigen::VectorXd s2 = cgl_nodes(2);
  CHECK(s2(0) == 0.0);
  CHECK(s2(1) == 0.5);
  CHECK(s2(2) == 1.0);

  const Eigen::VectorXd s4 = cgl_nodes(4);
  const double expected[] = {0.0, 0.14644661, 0.5, 0.85355339, 1.0};
  for (int k = 0; k <= 4; ++k) { CHECK(s4(k) == doctest::Approx(expected[k]).epsilon(1e-8)); }

  CHECK_THROWS_AS(cgl_nodes(0), std::invalid_argument);
  CHECK_THROWS_AS(ccq_weights(0), std::invalid_argument);
}

TEST_CASE("grid invariants")
{
  for (int N = 1; N <= 40; ++N) {
    CAPTURE(N);
    const auto g = ChebyshevGrid<>::make(N);
    CHECK(g.nodes(0) == 0.0);
    CHECK(g.nodes(N) == 1.0);
    for (int k = 0; k < N; ++k) { CHECK(g.nodes(k + 1) > g.nodes(k)); }
    CHECK(std::abs(g.weights.sum() - 1.0) < 1e-14);
    CHECK(g.weights.minCoeff() > 0.0);
  }
}

TEST_CASE("clenshaw-curtis weights for N = 2")
{
  const Eigen::VectorXd w = ccq_weights(2);
  CHECK(w(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(w(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(w(2) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  const Eigen::VectorXd s = cgl_nodes(2);
  CHECK(w.dot(s.array().square().matrix()) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("quadrature is exact for random polynomials up to degree N")
{
  Gen gen(11);
  for (int N = 2; N <= 20; ++N) {
    const auto g = ChebyshevGrid<>::make(N);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = gen.integer(0, N);
      const Eigen::VectorXd a = gen.vector(d + 1, -1.0, 1.0);
      double exact = 0.0;
      for (int p = 0; p <= d; ++p) { exact += a(p) / (p + 1); }
      double q = 0.0;
      for (int k = 0; k <= N; ++k) {
        double v = 0.0;
        for (int p = d; p >= 0; --p) { v = v * g.nodes(k) + a(p); }
        q += g.weights(k) * v;
      }
      CAPTURE(N);
      CAPTURE(d);
      CHECK(std::abs(q - exact) < 1e-12);
    }
  }
}

TEST_CASE("basis table endpoint identities")
{
  const int D = 30;
  Eigen::VectorXd ends(2);
  ends << 0.0, 1.0;
  const auto t = BasisTable<>::make(D, ends);
  for (int j = 0; j <= D; ++j) {
    CHECK(t.values(0, j) == ((j % 2 == 0) ? 1.0 : -1.0));
    CHECK(t.values(1, j) == 1.0);
  }
  const auto g = ChebyshevGrid<>::make(17);
  const auto tg = BasisTable<>::make(D, g.nodes);
  CHECK((tg.values.col(0).array() == 1.0).all());
  CHECK((tg.derivs.col(0).array() == 0.0).all());
}

TEST_CASE("basis values match the trigonometric definition")
{
  const auto g = ChebyshevGrid<>::make(25);
  const auto t = BasisTable<>::make(20, g.nodes);
  for (int k = 0; k <= 25; ++k) {
    for (int j = 0; j <= 20; ++j) { CHECK(std::abs(t.values(k, j) - test::shifted_chebyshev(j, g.nodes(k))) < 1e-12); }
  }
}

TEST_CASE("three-term recurrence holds at the nodes")
{
  const auto g = ChebyshevGrid<>::make(30);
  const auto t = BasisTable<>::make(25, g.nodes);
  for (int k = 0; k <= 30; ++k) {
    const double x = 2.0 * g.nodes(k) - 1.0;
    for (int j = 1; j < 25; ++j) {
      CHECK(std::abs(t.values(k, j + 1) - (2.0 * x * t.values(k, j) - t.values(k, j - 1))) < 1e-13);
    }
  }
}

TEST_CASE("derivatives match central differences at interior nodes")
{
  const int D = 15;
  const auto g = ChebyshevGrid<>::make(20);
  const auto t = BasisTable<>::make(D, g.nodes);
  const double h = 1e-6;
  for (int k = 1; k < 20; ++k) {
    Eigen::VectorXd pm(2);
    pm << g.nodes(k) + h, g.nodes(k) - h;
    const auto f = BasisTable<>::make(D, pm);
    for (int j = 1; j <= D; ++j) {
      const double fd = (f.values(0, j) - f.values(1, j)) / (2 * h);
      const double an = t.derivs(k, j);
      CAPTURE(k);
      CAPTURE(j);
      CHECK(std::abs(fd - an) <= 1e-7 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("eval_curve")
{
  const int n = 3, D = 5;
  const auto g = ChebyshevGrid<>::make(9);
  const auto t = BasisTable<>::make(D, g.nodes);

  SUBCASE("straight line")
  {
    Eigen::VectorXd x0(3), x1(3);
    x0 << 1.0, -2.0, 0.5;
    x1 << 4.0, 3.0, -1.0;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n * (D + 1));
    for (int i = 0; i < n; ++i) {
      c(i * (D + 1)) = x0(i) + (x1(i) - x0(i)) / 2;
      c(i * (D + 1) + 1) = (x1(i) - x0(i)) / 2;
    }
    const auto curve = eval_curve<double>(c, n, t);
    CHECK((curve.points.col(0) - x0).norm() < 1e-15);
    CHECK((curve.points.col(9) - x1).norm() < 1e-15);
    for (int k = 0; k <= 9; ++k) { CHECK((curve.tangents.col(k) - (x1 - x0)).norm() < 1e-14); }
  }

  SUBCASE("zero coefficients")
  {
    const auto curve = eval_curve<double>(Eigen::VectorXd::Zero(n * (D + 1)), n, t);
    CHECK(curve.points.isZero(0));
    CHECK(curve.tangents.isZero(0));
  }

  SUBCASE("single coefficient")
  {
    Eigen::VectorXd half(1);
    half << 0.5;
    const auto th = BasisTable<>::make(2, half);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
    c(2) = 1.0;
    CHECK(eval_curve<double>(c, 1, th).points(0, 0) == -1.0);
  }

  SUBCASE("dimension mismatch")
  {
    CHECK_THROWS_AS(eval_curve<double>(Eigen::VectorXd::Zero(n * (D + 1) - 1), n, t), std::invalid_argument);
  }
}

TEST_CASE("discretization cache returns one shared instance")
{
  const auto a = cached_discretization<double>(6, 10);
  const auto b = cached_discretization<double>(6, 10);
  CHECK(a.get() == b.get());
  CHECK(a->D == 6);
  CHECK(a->grid.N == 10);
}

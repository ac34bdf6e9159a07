#pragma once

/**
 * @file
 * @brief Shifted Chebyshev machinery on [0, 1]: Chebyshev-Gauss-Lobatto nodes,
 * Clenshaw-Curtis weights and basis/derivative tables.
 *
 * Every polynomial here is the shifted Chebyshev polynomial
 * \f$ T^*_j(s) = T_j(2s - 1) \f$, so all quantities live on the unit interval.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace ccm {

template<typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template<typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// CGL nodes s_k = (1 - cos(k pi / N)) / 2, k = 0..N, ascending in [0, 1].
template<typename Scalar = double>
VectorX<Scalar> cgl_nodes(int N)
{
  if (N < 1) { throw std::invalid_argument("cgl_nodes: N must be >= 1, got " + std::to_string(N)); }
  const Scalar pi = std::numbers::pi_v<Scalar>;
  VectorX<Scalar> s(N + 1);
  for (int k = 0; k <= N; ++k) {
    // cos(k pi / N) written as sin(pi (N - 2k) / 2N) so the grid is symmetric and the
    // midpoint is exactly 1/2.
    const Scalar x = std::sin(pi * Scalar(N - 2 * k) / Scalar(2 * N));
    s(k) = (Scalar(1) - x) / Scalar(2);
  }
  return s;
}

/// Clenshaw-Curtis weights for the CGL nodes, scaled to [0, 1] (they sum to 1).
template<typename Scalar = double>
VectorX<Scalar> ccq_weights(int N)
{
  if (N < 1) { throw std::invalid_argument("ccq_weights: N must be >= 1, got " + std::to_string(N)); }
  const Scalar pi = std::numbers::pi_v<Scalar>;
  VectorX<Scalar> w(N + 1);

  // Interior weights from the cosine sum; end weights have a closed form.
  const Scalar end = (N % 2 == 0) ? Scalar(1) / Scalar(N * N - 1) : Scalar(1) / Scalar(N * N);
  w(0) = end;
  w(N) = end;
  for (int k = 1; k < N; ++k) {
    const Scalar theta = pi * Scalar(k) / Scalar(N);
    Scalar v = 1;
    if (N % 2 == 0) {
      for (int j = 1; j < N / 2; ++j) { v -= Scalar(2) * std::cos(Scalar(2 * j) * theta) / Scalar(4 * j * j - 1); }
      v -= std::cos(Scalar(N) * theta) / Scalar(N * N - 1);
    } else {
      for (int j = 1; j <= (N - 1) / 2; ++j) {
        v -= Scalar(2) * std::cos(Scalar(2 * j) * theta) / Scalar(4 * j * j - 1);
      }
    }
    w(k) = Scalar(2) * v / Scalar(N);
  }
  return w / Scalar(2);
}

/// Nodes and quadrature weights of one CGL grid.
template<typename Scalar = double>
struct ChebyshevGrid
{
  int N{0};
  VectorX<Scalar> nodes;
  VectorX<Scalar> weights;

  static ChebyshevGrid make(int N) { return ChebyshevGrid{N, cgl_nodes<Scalar>(N), ccq_weights<Scalar>(N)}; }

  Eigen::Index size() const { return nodes.size(); }
};

/**
 * @brief Values and s-derivatives of T*_0..T*_D at a fixed set of points.
 *
 * Rows index points, columns index degree. Built with the three-term recurrence
 * T*_{j+1} = 2(2s-1) T*_j - T*_{j-1}, which is exact at the endpoints.
 */
template<typename Scalar = double>
struct BasisTable
{
  int D{0};
  MatrixX<Scalar> values;
  MatrixX<Scalar> derivs;

  static BasisTable make(int D, const Eigen::Ref<const VectorX<Scalar>> & points)
  {
    if (D < 0) { throw std::invalid_argument("BasisTable: negative degree"); }
    const Eigen::Index P = points.size();
    BasisTable t{D, MatrixX<Scalar>(P, D + 1), MatrixX<Scalar>(P, D + 1)};
    for (Eigen::Index k = 0; k < P; ++k) {
      const Scalar x = Scalar(2) * points(k) - Scalar(1);
      // dT_j/dx recurrence: T'_{j+1} = 2 T_j + 2x T'_j - T'_{j-1}; chain rule gives d/ds = 2 d/dx.
      Scalar t_prev = 1, t_cur = x;
      Scalar d_prev = 0, d_cur = 1;
      t.values(k, 0) = 1;
      t.derivs(k, 0) = 0;
      if (D >= 1) {
        t.values(k, 1) = x;
        t.derivs(k, 1) = 2;
      }
      for (int j = 1; j < D; ++j) {
        const Scalar t_next = Scalar(2) * x * t_cur - t_prev;
        const Scalar d_next = Scalar(2) * t_cur + Scalar(2) * x * d_cur - d_prev;
        t.values(k, j + 1) = t_next;
        t.derivs(k, j + 1) = Scalar(2) * d_next;
        t_prev = t_cur;
        t_cur = t_next;
        d_prev = d_cur;
        d_cur = d_next;
      }
    }
    return t;
  }

  Eigen::Index points() const { return values.rows(); }
};

/// A CGL grid together with the basis table evaluated on it.
template<typename Scalar = double>
struct Discretization
{
  int D{0};
  ChebyshevGrid<Scalar> grid;
  BasisTable<Scalar> table;

  static Discretization make(int D, int N)
  {
    if (D < 0 || N < 1) { throw std::invalid_argument("Discretization: need D >= 0 and N >= 1"); }
    auto grid = ChebyshevGrid<Scalar>::make(N);
    auto table = BasisTable<Scalar>::make(D, grid.nodes);
    return Discretization{D, std::move(grid), std::move(table)};
  }
};

/**
 * @brief Process-wide cache of discretizations keyed by (D, N).
 *
 * Entries are immutable once built and handed out as shared pointers to const.
 */
template<typename Scalar = double>
std::shared_ptr<const Discretization<Scalar>> cached_discretization(int D, int N)
{
  static std::mutex mutex;
  static std::vector<std::vector<std::shared_ptr<const Discretization<Scalar>>>> cache;
  if (D < 0 || N < 1) { throw std::invalid_argument("cached_discretization: need D >= 0 and N >= 1"); }
  std::lock_guard lock(mutex);
  if (static_cast<std::size_t>(D) >= cache.size()) { cache.resize(D + 1); }
  auto & row = cache[D];
  if (static_cast<std::size_t>(N) >= row.size()) { row.resize(N + 1); }
  if (!row[N]) { row[N] = std::make_shared<const Discretization<Scalar>>(Discretization<Scalar>::make(D, N)); }
  return row[N];
}

/// Curve samples: column k holds gamma(s_k) (or gamma_s(s_k)).
template<typename Scalar = double>
struct CurveSamples
{
  MatrixX<Scalar> points;
  MatrixX<Scalar> tangents;
};

/// View of a flat coefficient vector (c_10..c_1D, c_20.., ...) as an n x (D+1) matrix.
template<typename Scalar>
auto coefficient_matrix(const Eigen::Ref<const VectorX<Scalar>> & c, int n, int D)
{
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
    c.data(), n, D + 1);
}

/// gamma_i(s_k) = sum_j c_ij T*_j(s_k) and the matching s-derivative, for every table point.
template<typename Scalar = double>
CurveSamples<Scalar> eval_curve(const Eigen::Ref<const VectorX<Scalar>> & c, int n, const BasisTable<Scalar> & table)
{
  if (n < 1 || c.size() != static_cast<Eigen::Index>(n) * (table.D + 1)) {
    throw std::invalid_argument("eval_curve: coefficient vector has " + std::to_string(c.size())
                                + " entries, expected n*(D+1) = " + std::to_string(n) + "*"
                                + std::to_string(table.D + 1));
  }
  const auto C = coefficient_matrix<Scalar>(c, n, table.D);
  return CurveSamples<Scalar>{C * table.values.transpose(), C * table.derivs.transpose()};
}

/// Coefficients of the straight line gamma(s) = a + s (b - a) in a degree-D basis.
template<typename Scalar = double>
VectorX<Scalar> straight_line_coefficients(const Eigen::Ref<const VectorX<Scalar>> & a,
                                           const Eigen::Ref<const VectorX<Scalar>> & b, int D)
{
  if (a.size() != b.size()) { throw std::invalid_argument("straight_line_coefficients: endpoint size mismatch"); }
  if (D < 1) { throw std::invalid_argument("straight_line_coefficients: need D >= 1"); }
  const Eigen::Index n = a.size();
  VectorX<Scalar> c = VectorX<Scalar>::Zero(n * (D + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i * (D + 1)) = (a(i) + b(i)) / Scalar(2);
    c(i * (D + 1) + 1) = (b(i) - a(i)) / Scalar(2);
  }
  return c;
}

/// Re-expresses coefficients of degree D_from in degree D_to (zero padding or truncation).
template<typename Scalar = double>
VectorX<Scalar> resize_coefficients(const Eigen::Ref<const VectorX<Scalar>> & c, int n, int D_from, int D_to)
{
  if (c.size() != static_cast<Eigen::Index>(n) * (D_from + 1)) {
    throw std::invalid_argument("resize_coefficients: size mismatch");
  }
  VectorX<Scalar> out = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(n) * (D_to + 1));
  const int keep = std::min(D_from, D_to) + 1;
  for (int i = 0; i < n; ++i) { out.segment(i * (D_to + 1), keep) = c.segment(i * (D_from + 1), keep); }
  return out;
}

}  // namespace ccm

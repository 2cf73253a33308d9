#pragma once

// Reference computations used only by tests. They deliberately share no code
// with the library so that agreement between the two is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "gridrisk/numerics.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Gauss-Jordan elimination with complete pivoting. Returns nullopt when the
// system is (numerically) singular.
inline std::optional<std::vector<double>> gauss_jordan(Matrix a, std::vector<double> b, double eps = 1e-11) {
  const std::size_t n = b.size();
  std::vector<std::size_t> colperm(n);
  for (std::size_t i = 0; i < n; ++i) colperm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a[i][j]) > best) {
          best = std::abs(a[i][j]);
          pr = i;
          pc = j;
        }
    if (best < eps) return std::nullopt;
    std::swap(a[k], a[pr]);
    std::swap(b[k], b[pr]);
    for (auto& row : a) std::swap(row[k], row[pc]);
    std::swap(colperm[k], colperm[pc]);
    const double d = a[k][k];
    for (std::size_t j = 0; j < n; ++j) a[k][j] /= d;
    b[k] /= d;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || a[i][k] == 0.0) continue;
      const double f = a[i][k];
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[colperm[k]] = b[k];
  return x;
}

struct VertexResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

// Minimizes c'x over {A_eq x = b_eq, A_ub x <= b_ub, lower <= x <= upper} by
// enumerating every basic point. All bounds must be finite.
inline VertexResult enumerate_vertices(const gridrisk::LinearProgram& lp, double tol = 1e-9) {
  const std::size_t n = lp.num_variables();
  Matrix eq_rows;
  std::vector<double> eq_rhs;
  for (std::size_t i = 0; i < lp.a_eq.rows(); ++i) {
    auto r = lp.a_eq.row(i);
    eq_rows.emplace_back(r.begin(), r.end());
    eq_rhs.push_back(lp.b_eq[i]);
  }
  Matrix ineq_rows;  // row . x <= rhs
  std::vector<double> ineq_rhs;
  for (std::size_t i = 0; i < lp.a_ub.rows(); ++i) {
    auto r = lp.a_ub.row(i);
    ineq_rows.emplace_back(r.begin(), r.end());
    ineq_rhs.push_back(lp.b_ub[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> up(n, 0.0), lo(n, 0.0);
    up[j] = 1.0;
    lo[j] = -1.0;
    ineq_rows.push_back(up);
    ineq_rhs.push_back(lp.upper[j]);
    ineq_rows.push_back(lo);
    ineq_rhs.push_back(-lp.lower[j]);
  }
  VertexResult best;
  if (eq_rows.size() > n) {
    // Overdetermined equalities: still handled by trying square subsets below.
  }
  const std::size_t k = ineq_rows.size();
  const std::size_t need = n >= eq_rows.size() ? n - eq_rows.size() : 0;
  std::vector<std::size_t> pick(need);
  for (std::size_t i = 0; i < need; ++i) pick[i] = i;

  auto feasible = [&](const std::vector<double>& x) {
    for (std::size_t i = 0; i < eq_rows.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += eq_rows[i][j] * x[j];
      if (std::abs(s - eq_rhs[i]) > tol * (1.0 + std::abs(eq_rhs[i]))) return false;
    }
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ineq_rows[i][j] * x[j];
      if (s > ineq_rhs[i] + tol * (1.0 + std::abs(ineq_rhs[i]))) return false;
    }
    return true;
  };

  auto visit = [&]() {
    Matrix a = eq_rows;
    std::vector<double> b = eq_rhs;
    for (auto idx : pick) {
      a.push_back(ineq_rows[idx]);
      b.push_back(ineq_rhs[idx]);
    }
    if (a.size() != n) return;
    auto x = gauss_jordan(a, b);
    if (!x || !feasible(*x)) return;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * (*x)[j];
    if (!best.feasible || obj < best.objective) {
      best.feasible = true;
      best.objective = obj;
      best.x = *x;
    }
  };

  if (need > k) return best;
  while (true) {
    visit();
    // next combination
    std::size_t i = need;
    while (i > 0 && pick[i - 1] == k - need + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < need; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

enum class Classification { optimal, infeasible, unbounded };

// Classifies an LP whose lower bounds are finite but whose upper bounds may be
// infinite, by enumerating vertices with infinite bounds replaced by M and 2M.
// A bounded problem has the same optimum for both; an unbounded one improves.
inline Classification classify(const gridrisk::LinearProgram& lp, double* objective = nullptr, double big = 1e5) {
  auto boxed = [&](double m) {
    gridrisk::LinearProgram copy = lp;
    for (auto& u : copy.upper)
      if (std::abs(u) >= gridrisk::kInfiniteBound) u = m;
    return enumerate_vertices(copy);
  };
  const auto a = boxed(big);
  if (!a.feasible) return Classification::infeasible;
  const auto b = boxed(2.0 * big);
  if (b.objective < a.objective - 1e-6 * (1.0 + std::abs(a.objective))) return Classification::unbounded;
  if (objective) *objective = a.objective;
  return Classification::optimal;
}

// Small random LP: n <= 6 variables, <= 6 inequality rows, at most one
// equality row, integer data in [-5, 5], finite box bounds.
inline gridrisk::LinearProgram random_lp(std::mt19937_64& rng, bool bounded_box = true) {
  auto uni = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  const std::size_t n = static_cast<std::size_t>(uni(1, 6));
  const std::size_t mu = static_cast<std::size_t>(uni(0, 6));
  const bool with_eq = uni(0, 3) == 0;
  auto lp = gridrisk::LinearProgram::with_variables(n);
  for (auto& c : lp.objective) c = uni(-5, 5);
  for (std::size_t j = 0; j < n; ++j) {
    lp.lower[j] = uni(-4, 1);
    lp.upper[j] = bounded_box ? lp.lower[j] + uni(1, 6) : (uni(0, 1) ? gridrisk::kInf : lp.lower[j] + uni(1, 6));
  }
  std::vector<double> row(n);
  for (std::size_t i = 0; i < mu; ++i) {
    for (auto& v : row) v = uni(-5, 5);
    lp.add_inequality(row, uni(-6, 10));
  }
  if (with_eq) {
    for (auto& v : row) v = uni(-3, 3);
    lp.add_equality(row, uni(-4, 4));
  }
  return lp;
}

}  // namespace oracle

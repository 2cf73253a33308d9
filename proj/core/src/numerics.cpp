#include "gridrisk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridrisk/error.hpp"

namespace gridrisk {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw ValidationError("matrix entries length " + std::to_string(data_.size()) + " != " +
                          std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* a = data_.data() + r * cols_;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += a[c] * x[c];
    y[r] = acc;
  }
  return y;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

LuFactorization::LuFactorization(DenseMatrix a, double pivot_tolerance) : lu_(std::move(a)) {
  const std::size_t n = lu_.rows();
  if (lu_.cols() != n) throw ValidationError("LU factorization needs a square matrix");
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        pivot = i;
      }
    }
    if (!(best >= pivot_tolerance)) {
      throw SingularMatrix("pivot " + std::to_string(best) + " below tolerance at column " +
                           std::to_string(k));
    }
    if (pivot != k) {
      auto rk = lu_.row(k);
      auto rp = lu_.row(pivot);
      std::swap_ranges(rk.begin(), rk.end(), rp.begin());
      std::swap(perm_[k], perm_[pivot]);
    }
    const double diag = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = lu_(i, k) / diag;
      lu_(i, k) = factor;
      if (factor == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
    }
  }
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
  const std::size_t n = size();
  if (b.size() != n) throw ValidationError("right-hand side length does not match matrix");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
    x[i] = acc;
  }
  for (std::size_t i = n; i-- > 0;) {
    double acc = x[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(i, j) * x[j];
    x[i] = acc / lu_(i, i);
  }
  return x;
}

DenseMatrix LuFactorization::inverse() const {
  const std::size_t n = size();
  DenseMatrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    auto col = solve(e);
    e[c] = 0.0;
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
  }
  return inv;
}

std::vector<double> lu_solve(const DenseMatrix& a, std::span<const double> b, double pivot_tolerance) {
  if (a.rows() != b.size()) throw ValidationError("right-hand side length does not match matrix");
  return LuFactorization(a, pivot_tolerance).solve(b);
}

// ---------------------------------------------------------------------------
// LinearProgram

LinearProgram LinearProgram::with_variables(std::size_t n) {
  LinearProgram lp;
  lp.objective.assign(n, 0.0);
  lp.a_eq = DenseMatrix(0, n);
  lp.a_ub = DenseMatrix(0, n);
  lp.lower.assign(n, 0.0);
  lp.upper.assign(n, kInf);
  return lp;
}

namespace {

DenseMatrix append_row(const DenseMatrix& m, std::span<const double> row) {
  std::vector<double> entries = m.entries();
  entries.insert(entries.end(), row.begin(), row.end());
  return DenseMatrix(m.rows() + 1, row.size(), std::move(entries));
}

bool is_infinite(double bound) { return std::abs(bound) >= kInfiniteBound; }

}  // namespace

void LinearProgram::add_equality(std::span<const double> row, double rhs) {
  if (row.size() != num_variables()) throw ValidationError("equality row has wrong length");
  a_eq = append_row(a_eq, row);
  b_eq.push_back(rhs);
}

void LinearProgram::add_inequality(std::span<const double> row, double rhs) {
  if (row.size() != num_variables()) throw ValidationError("inequality row has wrong length");
  a_ub = append_row(a_ub, row);
  b_ub.push_back(rhs);
}

void LinearProgram::validate() const {
  const std::size_t n = num_variables();
  if (lower.size() != n || upper.size() != n) throw ValidationError("bounds length != variable count");
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n)) {
    throw ValidationError("equality constraint dimensions are inconsistent");
  }
  if (a_ub.rows() != b_ub.size() || (a_ub.rows() > 0 && a_ub.cols() != n)) {
    throw ValidationError("inequality constraint dimensions are inconsistent");
  }
  auto finite_all = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite_all(objective) || !finite_all(b_eq) || !finite_all(b_ub) ||
      !finite_all(a_eq.entries()) || !finite_all(a_ub.entries())) {
    throw ValidationError("linear program data must be finite");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      throw ValidationError("variable " + std::to_string(j) + " has lower > upper");
    }
    if (lower[j] >= kInfiniteBound || upper[j] <= -kInfiniteBound) {
      throw ValidationError("variable " + std::to_string(j) + " has an empty bound interval");
    }
  }
}

// ---------------------------------------------------------------------------
// Revised simplex

namespace {

// How an original variable is recovered from standard-form columns:
// x = offset + sign * y[col] (- y[col2] for free variables).
struct VariableMap {
  double offset = 0.0;
  double sign = 1.0;
  std::size_t col = 0;
  std::size_t col2 = static_cast<std::size_t>(-1);
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

class Simplex {
 public:
  enum class Outcome { optimal, unbounded };

  Simplex(std::vector<std::vector<double>> columns, std::vector<double> b, std::vector<std::size_t> basis,
          const LpOptions& options, std::size_t max_iterations)
      : m_(b.size()),
        cols_(std::move(columns)),
        b_(std::move(b)),
        basis_(std::move(basis)),
        position_(cols_.size(), kNone),
        options_(options),
        max_iterations_(max_iterations) {
    for (std::size_t i = 0; i < m_; ++i) position_[basis_[i]] = i;
    refactor();
  }

  Outcome run(const std::vector<double>& cost, const std::vector<char>& can_enter) {
    std::vector<double> y(m_);
    std::vector<double> w(m_);
    bool fresh = true;
    bool bland = false;
    std::size_t degenerate_run = 0;
    std::size_t since_refactor = 0;

    while (true) {
      if (iterations_ >= max_iterations_) {
        throw NumericalBreakdown("simplex iteration cap of " + std::to_string(max_iterations_) + " reached");
      }
      // y' = c_B' B^-1
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t k = 0; k < m_; ++k) {
        const double ck = cost[basis_[k]];
        if (ck == 0.0) continue;
        auto row = binv_.row(k);
        for (std::size_t i = 0; i < m_; ++i) y[i] += ck * row[i];
      }

      std::size_t entering = kNone;
      double best = -options_.optimality_tolerance;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (position_[j] != kNone || !can_enter[j]) continue;
        const auto& col = cols_[j];
        double d = cost[j];
        for (std::size_t i = 0; i < m_; ++i) d -= y[i] * col[i];
        if (bland) {
          if (d < -options_.optimality_tolerance) {
            entering = j;
            break;
          }
        } else if (d < best) {
          best = d;
          entering = j;
        }
      }

      if (entering == kNone) {
        if (!fresh) {
          refactor();
          fresh = true;
          since_refactor = 0;
          continue;
        }
        return Outcome::optimal;
      }

      column_in_basis(entering, w);
      std::size_t leaving = kNone;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (w[i] <= options_.feasibility_tolerance) continue;
        const double ratio = std::max(xb_[i], 0.0) / w[i];
        if (leaving == kNone || ratio < best_ratio - 1e-12 * (1.0 + best_ratio)) {
          leaving = i;
          best_ratio = ratio;
        } else if (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio)) {
          const bool prefer = bland ? basis_[i] < basis_[leaving] : w[i] > w[leaving];
          if (prefer) {
            leaving = i;
            best_ratio = std::min(best_ratio, ratio);
          }
        }
      }
      if (leaving == kNone) return Outcome::unbounded;

      pivot(entering, leaving, w);
      fresh = false;
      ++iterations_;

      if (best_ratio <= options_.feasibility_tolerance) {
        if (++degenerate_run > options_.stall_limit) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      if (++since_refactor >= options_.refactor_interval) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  // Pivots basic columns flagged in `remove` out of the basis where some
  // other column can replace them. Used to expel phase-one artificials.
  void expel(const std::vector<char>& remove) {
    std::vector<double> w(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      if (!remove[basis_[r]]) continue;
      std::size_t best_j = kNone;
      double best_mag = 1e-9;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (position_[j] != kNone || remove[j]) continue;
        double v = 0.0;
        auto row = binv_.row(r);
        const auto& col = cols_[j];
        for (std::size_t i = 0; i < m_; ++i) v += row[i] * col[i];
        if (std::abs(v) > best_mag) {
          best_mag = std::abs(v);
          best_j = j;
        }
      }
      if (best_j == kNone) continue;  // redundant row; the artificial stays at zero
      column_in_basis(best_j, w);
      pivot(best_j, r, w);
    }
    refactor();
  }

  std::vector<double> values() const {
    std::vector<double> x(cols_.size(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) x[basis_[i]] = std::max(xb_[i], 0.0);
    return x;
  }

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  void column_in_basis(std::size_t j, std::vector<double>& w) const {
    const auto& col = cols_[j];
    for (std::size_t i = 0; i < m_; ++i) {
      auto row = binv_.row(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < m_; ++k) acc += row[k] * col[k];
      w[i] = acc;
    }
  }

  void pivot(std::size_t entering, std::size_t leaving_row, const std::vector<double>& w) {
    const double wr = w[leaving_row];
    const double theta = xb_[leaving_row] / wr;
    for (std::size_t i = 0; i < m_; ++i) xb_[i] -= theta * w[i];
    xb_[leaving_row] = theta;

    auto pr = binv_.row(leaving_row);
    for (double& v : pr) v /= wr;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == leaving_row || w[i] == 0.0) continue;
      auto ri = binv_.row(i);
      const double f = w[i];
      for (std::size_t k = 0; k < m_; ++k) ri[k] -= f * pr[k];
    }
    position_[basis_[leaving_row]] = kNone;
    basis_[leaving_row] = entering;
    position_[entering] = leaving_row;
  }

  void refactor() {
    if (m_ == 0) {
      binv_ = DenseMatrix(0, 0);
      xb_.clear();
      return;
    }
    DenseMatrix basis(m_, m_);
    for (std::size_t k = 0; k < m_; ++k) {
      const auto& col = cols_[basis_[k]];
      for (std::size_t i = 0; i < m_; ++i) basis(i, k) = col[i];
    }
    try {
      binv_ = LuFactorization(std::move(basis), options_.pivot_tolerance).inverse();
    } catch (const SingularMatrix& e) {
      throw NumericalBreakdown(std::string("simplex basis became singular: ") + e.what());
    }
    xb_ = binv_.multiply(b_);
  }

  std::size_t m_;
  std::vector<std::vector<double>> cols_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> position_;
  DenseMatrix binv_;
  std::vector<double> xb_;
  LpOptions options_;
  std::size_t max_iterations_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpSolution lp_solve(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  const std::size_t n = lp.num_variables();

  // Map every original variable onto nonnegative standard-form columns.
  std::vector<VariableMap> maps(n);
  std::size_t structural = 0;
  struct BoundRow {
    std::size_t col;
    double width;
  };
  std::vector<BoundRow> bound_rows;
  for (std::size_t j = 0; j < n; ++j) {
    const bool lower_finite = !is_infinite(lp.lower[j]);
    const bool upper_finite = !is_infinite(lp.upper[j]);
    VariableMap& map = maps[j];
    if (lower_finite) {
      map = {lp.lower[j], 1.0, structural++, kNone};
      if (upper_finite) bound_rows.push_back({map.col, lp.upper[j] - lp.lower[j]});
    } else if (upper_finite) {
      map = {lp.upper[j], -1.0, structural++, kNone};
    } else {
      map = {0.0, 1.0, structural, structural + 1};
      structural += 2;
    }
  }

  struct StdRow {
    std::vector<double> coef;  // over structural columns
    double slack = 0.0;        // 0 for equality, +1 for <=
    double rhs = 0.0;
  };
  std::vector<StdRow> rows;
  auto add_original_row = [&](std::span<const double> a, double rhs, bool inequality) {
    StdRow row;
    row.coef.assign(structural, 0.0);
    row.rhs = rhs;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = a[j];
      if (v == 0.0) continue;
      const auto& map = maps[j];
      row.rhs -= v * map.offset;
      row.coef[map.col] += v * map.sign;
      if (map.col2 != kNone) row.coef[map.col2] -= v;
    }
    row.slack = inequality ? 1.0 : 0.0;
    rows.push_back(std::move(row));
  };
  for (std::size_t i = 0; i < lp.a_eq.rows(); ++i) add_original_row(lp.a_eq.row(i), lp.b_eq[i], false);
  for (std::size_t i = 0; i < lp.a_ub.rows(); ++i) add_original_row(lp.a_ub.row(i), lp.b_ub[i], true);
  for (const auto& br : bound_rows) {
    StdRow row;
    row.coef.assign(structural, 0.0);
    row.coef[br.col] = 1.0;
    row.slack = 1.0;
    row.rhs = br.width;
    rows.push_back(std::move(row));
  }

  const std::size_t m = rows.size();
  for (auto& row : rows) {
    if (row.rhs < 0.0) {
      for (double& v : row.coef) v = -v;
      row.slack = -row.slack;
      row.rhs = -row.rhs;
    }
  }

  // Column layout: structural | slacks (one per inequality row) | artificials.
  std::vector<std::vector<double>> columns(structural, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < structural; ++j) columns[j][i] = rows[i].coef[j];

  std::vector<std::size_t> basis(m, kNone);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].slack == 0.0) continue;
    std::vector<double> col(m, 0.0);
    col[i] = rows[i].slack;
    if (rows[i].slack > 0.0) basis[i] = columns.size();
    columns.push_back(std::move(col));
  }
  const std::size_t first_artificial = columns.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] != kNone) continue;
    std::vector<double> col(m, 0.0);
    col[i] = 1.0;
    basis[i] = columns.size();
    columns.push_back(std::move(col));
  }
  const std::size_t total = columns.size();
  const bool needs_phase_one = first_artificial < total;

  std::vector<double> b(m);
  double b_scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = rows[i].rhs;
    b_scale = std::max(b_scale, std::abs(b[i]));
  }

  const std::size_t cap = options.max_iterations > 0 ? options.max_iterations : 10000 * (m + total);
  Simplex simplex(std::move(columns), b, std::move(basis), options, cap);

  std::vector<char> is_artificial(total, 0);
  for (std::size_t j = first_artificial; j < total; ++j) is_artificial[j] = 1;

  LpSolution solution;
  if (needs_phase_one) {
    std::vector<double> phase_one_cost(total, 0.0);
    for (std::size_t j = first_artificial; j < total; ++j) phase_one_cost[j] = 1.0;
    std::vector<char> all(total, 1);
    simplex.run(phase_one_cost, all);
    const auto values = simplex.values();
    double infeasibility = 0.0;
    for (std::size_t j = first_artificial; j < total; ++j) infeasibility += values[j];
    if (infeasibility > options.feasibility_tolerance * b_scale * 10.0) {
      solution.status = LpStatus::infeasible;
      solution.iterations = simplex.iterations();
      return solution;
    }
    simplex.expel(is_artificial);
  }

  std::vector<double> cost(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& map = maps[j];
    cost[map.col] += lp.objective[j] * map.sign;
    if (map.col2 != kNone) cost[map.col2] -= lp.objective[j];
  }
  std::vector<char> can_enter(total, 1);
  for (std::size_t j = first_artificial; j < total; ++j) can_enter[j] = 0;

  const auto outcome = simplex.run(cost, can_enter);
  solution.iterations = simplex.iterations();
  if (outcome == Simplex::Outcome::unbounded) {
    solution.status = LpStatus::unbounded;
    return solution;
  }

  const auto values = simplex.values();
  solution.status = LpStatus::optimal;
  solution.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& map = maps[j];
    double x = map.offset + map.sign * values[map.col];
    if (map.col2 != kNone) x -= values[map.col2];
    solution.x[j] = x;
  }
  double objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) objective += lp.objective[j] * solution.x[j];
  solution.objective_value = objective;
  return solution;
}

}  // namespace gridrisk

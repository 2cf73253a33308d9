#pragma once

// Dense linear algebra and linear programming kernels.
//
// Everything here is dense: an n x n factorization costs O(n^3) and a simplex
// iteration O(m * (m + n)). That is fine for desk-scale networks of a few
// hundred buses and small economic tables; nothing here tries to be sparse.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace gridrisk {

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Row-major entries; throws ValidationError if the size does not match.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& entries() const noexcept { return data_; }

  std::vector<double> multiply(std::span<const double> x) const;
  DenseMatrix transposed() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline constexpr double kDefaultPivotTolerance = 1e-12;

// LU factorization with partial pivoting, reusable across right-hand sides.
class LuFactorization {
 public:
  // Throws SingularMatrix when a pivot magnitude falls below pivot_tolerance.
  explicit LuFactorization(DenseMatrix a, double pivot_tolerance = kDefaultPivotTolerance);

  std::size_t size() const noexcept { return lu_.rows(); }
  std::vector<double> solve(std::span<const double> b) const;
  DenseMatrix inverse() const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

std::vector<double> lu_solve(const DenseMatrix& a, std::span<const double> b,
                             double pivot_tolerance = kDefaultPivotTolerance);

// Bounds at or beyond this magnitude are treated as infinite. Files use it as
// the written form of "no bound"; std::numeric_limits<double>::infinity() is
// accepted as well.
inline constexpr double kInfiniteBound = 1e30;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// minimize c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper.
struct LinearProgram {
  std::vector<double> objective;
  DenseMatrix a_eq;
  std::vector<double> b_eq;
  DenseMatrix a_ub;
  std::vector<double> b_ub;
  std::vector<double> lower;
  std::vector<double> upper;

  // An LP with n variables, no constraints and bounds [0, +inf).
  static LinearProgram with_variables(std::size_t n);
  std::size_t num_variables() const noexcept { return objective.size(); }
  // Appends a row; the row span must have num_variables() entries.
  void add_equality(std::span<const double> row, double rhs);
  void add_inequality(std::span<const double> row, double rhs);
  // Throws ValidationError on inconsistent dimensions, lower > upper or non-finite data.
  void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective_value = 0.0;
  std::size_t iterations = 0;
};

struct LpOptions {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = kDefaultPivotTolerance;
  // 0 selects 10000 * (rows + columns) of the standard form.
  std::size_t max_iterations = 0;
  // Consecutive degenerate pivots under Dantzig pricing before switching to Bland's rule.
  std::size_t stall_limit = 50;
  std::size_t refactor_interval = 64;
};

// Two-phase revised simplex with Dantzig pricing and Bland's rule after a
// stall. Deterministic for identical input. Throws NumericalBreakdown when the
// iteration cap is hit or the basis becomes singular.
LpSolution lp_solve(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace gridrisk

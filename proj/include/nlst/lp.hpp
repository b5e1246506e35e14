#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace nlst {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Le, Eq, Ge };
enum class Direction { Max, Min };

// optimise objective^T x  s.t.  A x (sense) rhs,  lower <= x <= upper.
struct LinearProgram {
  Direction direction = Direction::Max;
  Eigen::SparseMatrix<double> A;  // column major
  std::vector<double> objective;
  std::vector<double> rhs;
  std::vector<Sense> senses;
  std::vector<double> lower, upper;

  LinearProgram() = default;
  // Variables default to x >= 0, rows to <= .
  LinearProgram(Direction d, Eigen::SparseMatrix<double> a, std::vector<double> obj,
                std::vector<double> rhs);
  LinearProgram(Direction d, const Eigen::MatrixXd& a, std::vector<double> obj,
                std::vector<double> rhs);

  std::size_t rows() const { return std::size_t(A.rows()); }
  std::size_t cols() const { return std::size_t(A.cols()); }
  void set_free(std::size_t j) { lower[j] = -kInf; upper[j] = kInf; }
  void validate() const;
};

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };
const char* to_string(LPStatus s);

struct LPSolution {
  LPStatus status = LPStatus::NumericalFailure;
  std::vector<double> x;
  double value = 0.0;
  // Row multipliers and variable-bound multipliers with A^T y + mu = objective
  // and value = rhs^T y + sum_j mu_j * (bound x_j sits at).
  std::vector<double> y;
  std::vector<double> mu;
  std::size_t iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::string message;
};

struct LPOptions {
  double tol = 1e-9;
  std::size_t max_iterations = 2000000;
  std::size_t refactor_every = 64;
  // consecutive degenerate pivots before switching to Bland's rule
  std::size_t bland_after = 50;
};

LPSolution lp_solve(const LinearProgram& lp, const LPOptions& opt = {});

struct DualCheck {
  bool ok = false;
  double worst = 0.0;  // largest violation of a dual constraint
  double bound = 0.0;  // certified bound on the optimum
  std::string message;
};

// Checks the row multipliers y. The variable-bound multipliers are implied
// (mu = objective - A^T y) and must have signs the finite bounds allow.
DualCheck verify_dual_feasible(const LinearProgram& lp, const std::vector<double>& y,
                               double tol = 1e-9);

}  // namespace nlst

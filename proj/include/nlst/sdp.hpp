#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nlst {

// One symmetric entry of a block; (i, j) and (j, i) both receive value.
struct SdpEntry {
  int block;
  int i, j;
  double value;
};

// Block-diagonal pair
//   (P) min <C, X>  s.t. <A_k, X> = b_k,  X >= 0
//   (D) max b^T y   s.t. S = C - sum_k y_k A_k >= 0
// Blocks of dimension 1 are plain non-negative scalars.
struct SdpProblem {
  std::vector<int> blocks;
  std::vector<SdpEntry> C;
  std::vector<std::vector<SdpEntry>> A;
  std::vector<double> b;
  double offset = 0.0;  // added to both objective values

  std::size_t constraints() const { return A.size(); }
  void validate() const;
  std::vector<Eigen::MatrixXd> dense_C() const;
};

enum class SdpStatus { Optimal, PrimalInfeasible, DualInfeasible, IterationLimit, NumericalFailure };
const char* to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  double primal_value = 0.0;  // <C,X> + offset, an upper bound for (D)
  double dual_value = 0.0;    // b^T y + offset
  std::vector<Eigen::MatrixXd> X, S;
  Eigen::VectorXd y;
  std::size_t iterations = 0;
  double primal_residual = 0.0, dual_residual = 0.0, gap = 0.0;
  std::string message;
};

struct SdpOptions {
  double tol = 1e-9;  // relative residual and gap target
  int max_iterations = 120;
  double step = 0.98;
};

SdpSolution sdp_solve(const SdpProblem& p, const SdpOptions& opt = {});

struct SdpDualCheck {
  bool ok = false;
  double min_eig = 0.0;  // smallest eigenvalue of C - sum y A over all blocks
  double bound = 0.0;    // b^T y + offset, a lower bound on the (P) optimum
};
SdpDualCheck verify_dual_feasible(const SdpProblem& p, const Eigen::VectorXd& y, double tol = 1e-7);

// Residuals of a primal point: max |<A_k,X> - b_k| and the smallest eigenvalue.
struct SdpPrimalCheck {
  bool ok = false;
  double residual = 0.0;
  double min_eig = 0.0;
  double value = 0.0;
};
SdpPrimalCheck verify_primal_feasible(const SdpProblem& p, const std::vector<Eigen::MatrixXd>& X,
                                      double tol = 1e-7);

}  // namespace nlst

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace nlst {

// Real symmetric matrix stored as its packed lower triangle (row-major).
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), a_(n * (n + 1) / 2, 0.0) {}

  static SymmetricMatrix identity(std::size_t n);
  // Symmetrises by averaging the two triangles.
  static SymmetricMatrix from_dense(const Eigen::MatrixXd& m);

  std::size_t dim() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[pos(i, j)]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[pos(i, j)]; }
  double trace() const;
  Eigen::MatrixXd dense() const;

 private:
  static std::size_t pos_lower(std::size_t i, std::size_t j) { return i * (i + 1) / 2 + j; }
  std::size_t pos(std::size_t i, std::size_t j) const {
    return i >= j ? pos_lower(i, j) : pos_lower(j, i);
  }
  std::size_t n_ = 0;
  std::vector<double> a_;
};

// Ascending eigenvalues. Throws a domain error on non-finite input.
std::vector<double> eig_symmetric(const SymmetricMatrix& m);
std::vector<double> eig_symmetric(const Eigen::MatrixXd& m);
double min_eigenvalue(const SymmetricMatrix& m);
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace nlst

#include "nlst/linalg.hpp"

#include <cmath>

#include "nlst/error.hpp"

namespace nlst {

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) {
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SymmetricMatrix SymmetricMatrix::from_dense(const Eigen::MatrixXd& d) {
  if (d.rows() != d.cols()) fail(ErrorKind::Shape, "symmetric matrix must be square");
  SymmetricMatrix m(std::size_t(d.rows()));
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = 0.5 * (d(i, j) + d(j, i));
  return m;
}

double SymmetricMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

Eigen::MatrixXd SymmetricMatrix::dense() const {
  Eigen::MatrixXd d(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) d(i, j) = d(j, i) = (*this)(i, j);
  return d;
}

std::vector<double> eig_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::Shape, "eigenvalues need a square matrix");
  if (!m.allFinite()) fail(ErrorKind::Domain, "matrix has non-finite entries");
  if (m.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorKind::Solver, "eigenvalue iteration did not converge");
  const auto& ev = es.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

std::vector<double> eig_symmetric(const SymmetricMatrix& m) { return eig_symmetric(m.dense()); }

double min_eigenvalue(const Eigen::MatrixXd& m) {
  auto ev = eig_symmetric(m);
  return ev.empty() ? 0.0 : ev.front();
}

double min_eigenvalue(const SymmetricMatrix& m) { return min_eigenvalue(m.dense()); }

}  // namespace nlst

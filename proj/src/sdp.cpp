#include "nlst/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlst/error.hpp"
#include "nlst/linalg.hpp"

namespace nlst {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::PrimalInfeasible: return "primal-infeasible";
    case SdpStatus::DualInfeasible: return "dual-infeasible";
    case SdpStatus::IterationLimit: return "iteration-limit";
    case SdpStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  if (blocks.empty()) fail(ErrorKind::Structural, "SDP needs at least one block");
  for (int d : blocks)
    if (d < 1) fail(ErrorKind::Structural, "SDP block dimension must be positive");
  if (b.size() != A.size()) fail(ErrorKind::Structural, "SDP rhs length does not match constraints");
  auto check = [&](const std::vector<SdpEntry>& es) {
    for (const auto& e : es) {
      if (e.block < 0 || std::size_t(e.block) >= blocks.size() || e.i < 0 || e.j < 0 ||
          e.i >= blocks[e.block] || e.j >= blocks[e.block])
        fail(ErrorKind::Structural, "SDP entry outside its block");
      if (!std::isfinite(e.value)) fail(ErrorKind::Domain, "non-finite SDP entry");
    }
  };
  check(C);
  for (const auto& a : A) check(a);
  for (double v : b)
    if (!std::isfinite(v)) fail(ErrorKind::Domain, "non-finite SDP rhs");
}

namespace {

using Blocks = std::vector<Eigen::MatrixXd>;

Blocks zeros(const std::vector<int>& dims) {
  Blocks r;
  for (int d : dims) r.push_back(Eigen::MatrixXd::Zero(d, d));
  return r;
}

void add_entries(Blocks& M, const std::vector<SdpEntry>& es, double scale) {
  for (const auto& e : es) {
    M[e.block](e.i, e.j) += scale * e.value;
    if (e.i != e.j) M[e.block](e.j, e.i) += scale * e.value;
  }
}

double inner(const std::vector<SdpEntry>& es, const Blocks& M) {
  double s = 0.0;
  for (const auto& e : es) s += e.value * (e.i == e.j ? M[e.block](e.i, e.i) : 2.0 * M[e.block](e.i, e.j));
  return s;
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k].array() * b[k].array()).sum();
  return s;
}

double fro(const Blocks& a) { return std::sqrt(inner(a, a)); }

struct Problem {
  const SdpProblem& p;
  Blocks C;
  std::size_t m;
  int n = 0;

  explicit Problem(const SdpProblem& pp) : p(pp), m(pp.A.size()) {
    C = zeros(p.blocks);
    add_entries(C, p.C, 1.0);
    for (int d : p.blocks) n += d;
  }

  Eigen::VectorXd apply(const Blocks& X) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) r[Eigen::Index(k)] = inner(p.A[k], X);
    return r;
  }
  Blocks adjoint(const Eigen::VectorXd& y) const {
    Blocks r = zeros(p.blocks);
    for (std::size_t k = 0; k < m; ++k)
      if (y[Eigen::Index(k)] != 0.0) add_entries(r, p.A[k], y[Eigen::Index(k)]);
    return r;
  }
  double a_norm(std::size_t k) const {
    double s = 0.0;
    for (const auto& e : p.A[k]) s += e.value * e.value * (e.i == e.j ? 1.0 : 2.0);
    return std::sqrt(s);
  }
};

// alpha such that X + alpha dX stays PSD (infinity when unconstrained)
double max_step(const Eigen::MatrixXd& X, const Eigen::MatrixXd& dX) {
  Eigen::LLT<Eigen::MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd T = L.triangularView<Eigen::Lower>().solve(dX);
  T = L.triangularView<Eigen::Lower>().solve(T.transpose()).transpose();
  double e = min_eigenvalue(Eigen::MatrixXd(0.5 * (T + T.transpose())));
  return e < 0 ? -1.0 / e : std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<Eigen::MatrixXd> SdpProblem::dense_C() const {
  Blocks c = zeros(blocks);
  add_entries(c, C, 1.0);
  return c;
}

SdpSolution sdp_solve(const SdpProblem& sp, const SdpOptions& opt) {
  sp.validate();
  Problem P(sp);
  const std::size_t m = P.m;
  const std::size_t nb = sp.blocks.size();
  Eigen::VectorXd b(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) b[Eigen::Index(k)] = sp.b[k];
  const double bnorm = b.norm(), cnorm = fro(P.C);

  double xi = std::max(10.0, std::sqrt(double(P.n)));
  double eta = std::max({10.0, std::sqrt(double(P.n)), cnorm});
  for (std::size_t k = 0; k < m; ++k) {
    double an = P.a_norm(k);
    xi = std::max(xi, double(P.n) * (1.0 + std::abs(sp.b[k])) / (1.0 + an));
    eta = std::max(eta, an);
  }
  Blocks X = zeros(sp.blocks), S = zeros(sp.blocks);
  for (std::size_t k = 0; k < nb; ++k) {
    X[k].diagonal().setConstant(xi);
    S[k].diagonal().setConstant(eta);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(Eigen::Index(m));

  SdpSolution best;
  double best_score = std::numeric_limits<double>::infinity();
  int since_best = 0;
  // a stalled or broken-down run still counts as solved when the best iterate is this accurate
  const double accept = std::max(opt.tol, 1e-6);
  auto finish = [&](SdpStatus fallback, const char* why) {
    if (best_score <= accept) {
      best.status = SdpStatus::Optimal;
      best.message = std::string("converged to ") + std::to_string(best_score) + " (" + why + ")";
    } else {
      best.status = fallback;
      best.message = why;
    }
    return best;
  };
  auto record = [&](int it, double relp, double reld, double relg, double pobj, double dobj) {
    double score = std::max({relp, reld, relg});
    ++since_best;
    if (score < 0.5 * best_score) since_best = 0;
    if (score < best_score) {
      best_score = score;
      best.X = X;
      best.S = S;
      best.y = y;
      best.primal_value = pobj + sp.offset;
      best.dual_value = dobj + sp.offset;
      best.primal_residual = relp;
      best.dual_residual = reld;
      best.gap = relg;
      best.iterations = std::size_t(it);
    }
  };

  for (int it = 0; it <= opt.max_iterations; ++it) {
    Eigen::VectorXd rp = b - P.apply(X);
    Blocks Rd = P.C;
    Blocks Ay = P.adjoint(y);
    for (std::size_t k = 0; k < nb; ++k) Rd[k] -= S[k] + Ay[k];
    double pobj = inner(P.C, X), dobj = b.dot(y);
    double relp = rp.norm() / (1.0 + bnorm);
    double reld = fro(Rd) / (1.0 + cnorm);
    double relg = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    record(it, relp, reld, relg, pobj, dobj);
    if (relp < opt.tol && reld < opt.tol && relg < opt.tol) {
      best.status = SdpStatus::Optimal;
      best.message = "converged";
      return best;
    }
    if (y.norm() > 1e12 || fro(X) > 1e12 || fro(S) > 1e12) {
      // diverging dual ray: (P) infeasible; diverging primal ray: (D) infeasible
      best.status = (y.norm() > 1e12 || fro(S) > 1e12) && dobj > 0 ? SdpStatus::PrimalInfeasible
                                                                    : SdpStatus::DualInfeasible;
      best.message = "iterates diverged";
      return best;
    }
    if (it == opt.max_iterations) break;
    if (since_best > 12 && best_score <= accept) return finish(SdpStatus::IterationLimit, "stalled");
    double mu = inner(X, S) / P.n;

    // Nesterov-Todd scaling W = G G^T with G^T S G = G^{-1} X G^{-T} = diag(lam)
    Blocks G(nb), Ginv(nb), W(nb);
    std::vector<Eigen::VectorXd> lam(nb);
    bool ok = true;
    for (std::size_t k = 0; k < nb && ok; ++k) {
      Eigen::LLT<Eigen::MatrixXd> lx(X[k]), ls(S[k]);
      if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Eigen::MatrixXd Lx = lx.matrixL(), Ls = ls.matrixL();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ls.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
      lam[k] = svd.singularValues();
      if (lam[k].minCoeff() <= 0) {
        ok = false;
        break;
      }
      Eigen::VectorXd isq = lam[k].array().rsqrt();
      G[k] = Lx * svd.matrixV() * isq.asDiagonal();
      // G^{-1} = Sigma^{1/2} V^T Lx^{-1} = Sigma^{-1/2} U^T Ls^T
      Ginv[k] = isq.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
      W[k] = G[k] * G[k].transpose();
    }
    if (!ok) {
      return finish(SdpStatus::NumericalFailure, "iterate lost positive definiteness");
    }

    // Schur complement M_ij = <A_i, W A_j W>
    Eigen::MatrixXd M(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      Blocks WAW = zeros(sp.blocks);
      for (const auto& e : sp.A[j]) {
        const auto& Wk = W[e.block];
        if (e.i == e.j) WAW[e.block] += e.value * Wk.col(e.i) * Wk.col(e.i).transpose();
        else {
          Eigen::MatrixXd t = e.value * Wk.col(e.i) * Wk.col(e.j).transpose();
          WAW[e.block] += t + t.transpose();
        }
      }
      for (std::size_t i = j; i < m; ++i) {
        double v = inner(sp.A[i], WAW);
        M(Eigen::Index(i), Eigen::Index(j)) = M(Eigen::Index(j), Eigen::Index(i)) = v;
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    if (m > 0) {
      ldlt.compute(M);
      if (ldlt.info() != Eigen::Success) {
        M.diagonal().array() += 1e-12 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
        ldlt.compute(M);
      }
    }
    Blocks WRdW(nb);
    for (std::size_t k = 0; k < nb; ++k) WRdW[k] = W[k] * Rd[k] * W[k];
    Eigen::VectorXd base = rp + P.apply(WRdW);

    auto solve = [&](const std::vector<Eigen::MatrixXd>& rhs_scaled, Blocks& dX, Eigen::VectorXd& dy,
                     Blocks& dS) {
      Blocks Rc(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const auto& l = lam[k];
        Eigen::MatrixXd T = rhs_scaled[k];
        for (Eigen::Index i = 0; i < T.rows(); ++i)
          for (Eigen::Index j = 0; j < T.cols(); ++j) T(i, j) *= 2.0 / (l[i] + l[j]);
        Rc[k] = G[k] * T * G[k].transpose();
      }
      Eigen::VectorXd rhs = base - P.apply(Rc);
      dy = m > 0 ? Eigen::VectorXd(ldlt.solve(rhs)) : Eigen::VectorXd();
      for (int ref = 0; ref < 2 && m > 0; ++ref) dy += ldlt.solve(rhs - M * dy);
      Blocks Ady = P.adjoint(dy);
      dS.resize(nb);
      dX.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        dS[k] = Rd[k] - Ady[k];
        dX[k] = Rc[k] - W[k] * dS[k] * W[k];
        dX[k] = 0.5 * (dX[k] + dX[k].transpose());
        dS[k] = 0.5 * (dS[k] + dS[k].transpose());
      }
    };
    auto steps = [&](const Blocks& dX, const Blocks& dS, double& ap, double& ad) {
      ap = ad = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(X[k], dX[k]));
        ad = std::min(ad, max_step(S[k], dS[k]));
      }
    };

    // predictor
    std::vector<Eigen::MatrixXd> rhs(nb);
    for (std::size_t k = 0; k < nb; ++k) rhs[k] = Eigen::MatrixXd(Eigen::VectorXd(-lam[k].array().square()).asDiagonal());
    Blocks dXa, dSa;
    Eigen::VectorXd dya;
    solve(rhs, dXa, dya, dSa);
    double apa, ada;
    steps(dXa, dSa, apa, ada);
    apa = std::min(1.0, apa);
    ada = std::min(1.0, ada);
    double mua = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      mua += ((X[k] + apa * dXa[k]).array() * (S[k] + ada * dSa[k]).array()).sum();
    mua /= P.n;
    double sigma = std::clamp(std::pow(mua / mu, 3.0), 0.0, 1.0);

    // corrector
    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::MatrixXd dxs = Ginv[k] * dXa[k] * Ginv[k].transpose();
      Eigen::MatrixXd dss = G[k].transpose() * dSa[k] * G[k];
      Eigen::MatrixXd corr = 0.5 * (dxs * dss + dss * dxs);
      rhs[k] = -corr;
      rhs[k].diagonal().array() += sigma * mu - lam[k].array().square();
    }
    Blocks dX, dS;
    Eigen::VectorXd dy;
    solve(rhs, dX, dy, dS);
    double ap, ad;
    steps(dX, dS, ap, ad);
    ap = std::min(1.0, opt.step * ap);
    ad = std::min(1.0, opt.step * ad);
    for (std::size_t k = 0; k < nb; ++k) {
      X[k] += ap * dX[k];
      S[k] += ad * dS[k];
    }
    if (m > 0) y += ad * dy;
    if (ap < 1e-10 && ad < 1e-10) {
      return finish(SdpStatus::NumericalFailure, "step length collapsed");
    }
  }
  return finish(SdpStatus::IterationLimit, "iteration limit reached");
}

SdpDualCheck verify_dual_feasible(const SdpProblem& p, const Eigen::VectorXd& y, double tol) {
  p.validate();
  if (std::size_t(y.size()) != p.A.size()) fail(ErrorKind::Shape, "dual vector length does not match");
  Problem P(p);
  Blocks S = P.C;
  Blocks Ay = P.adjoint(y);
  SdpDualCheck r;
  r.min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < S.size(); ++k) r.min_eig = std::min(r.min_eig, min_eigenvalue(Eigen::MatrixXd(S[k] - Ay[k])));
  double bty = 0.0;
  for (std::size_t k = 0; k < p.b.size(); ++k) bty += p.b[k] * y[Eigen::Index(k)];
  r.bound = bty + p.offset;
  r.ok = r.min_eig >= -tol;
  return r;
}

SdpPrimalCheck verify_primal_feasible(const SdpProblem& p, const std::vector<Eigen::MatrixXd>& X,
                                      double tol) {
  p.validate();
  if (X.size() != p.blocks.size()) fail(ErrorKind::Shape, "primal blocks do not match");
  for (std::size_t k = 0; k < X.size(); ++k)
    if (X[k].rows() != p.blocks[k] || X[k].cols() != p.blocks[k])
      fail(ErrorKind::Shape, "primal block has the wrong dimension");
  Problem P(p);
  SdpPrimalCheck r;
  for (std::size_t k = 0; k < p.A.size(); ++k)
    r.residual = std::max(r.residual, std::abs(inner(p.A[k], X) - p.b[k]));
  r.min_eig = std::numeric_limits<double>::infinity();
  for (const auto& x : X) r.min_eig = std::min(r.min_eig, min_eigenvalue(x));
  r.value = inner(P.C, X) + p.offset;
  r.ok = r.residual <= tol && r.min_eig >= -tol;
  return r;
}

}  // namespace nlst

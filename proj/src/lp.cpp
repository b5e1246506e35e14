#include "nlst/lp.hpp"

#include <algorithm>
#include <cmath>

#include "nlst/error.hpp"

namespace nlst {

const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
    case LPStatus::IterationLimit: return "iteration-limit";
    case LPStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

LinearProgram::LinearProgram(Direction d, Eigen::SparseMatrix<double> a, std::vector<double> obj,
                             std::vector<double> r)
    : direction(d), A(std::move(a)), objective(std::move(obj)), rhs(std::move(r)) {
  A.makeCompressed();
  senses.assign(rhs.size(), Sense::Le);
  lower.assign(objective.size(), 0.0);
  upper.assign(objective.size(), kInf);
}

LinearProgram::LinearProgram(Direction d, const Eigen::MatrixXd& a, std::vector<double> obj,
                             std::vector<double> r)
    : LinearProgram(d, Eigen::SparseMatrix<double>(a.sparseView()), std::move(obj), std::move(r)) {}

void LinearProgram::validate() const {
  if (A.rows() == 0) fail(ErrorKind::Structural, "linear program needs at least one row");
  if (objective.size() != cols() || lower.size() != cols() || upper.size() != cols())
    fail(ErrorKind::Structural, "objective or bounds do not match the column count");
  if (rhs.size() != rows() || senses.size() != rows())
    fail(ErrorKind::Structural, "rhs or senses do not match the row count");
  for (std::size_t j = 0; j < cols(); ++j) {
    if (!std::isfinite(objective[j])) fail(ErrorKind::Domain, "non-finite objective entry");
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
      fail(ErrorKind::Domain, "inconsistent variable bounds");
  }
  for (double v : rhs)
    if (!std::isfinite(v)) fail(ErrorKind::Domain, "non-finite rhs entry");
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      if (!std::isfinite(it.value())) fail(ErrorKind::Domain, "non-finite constraint entry");
}

namespace {

// Bounded-variable revised simplex on  min c^T z, [A I_s S_a] z = rhs.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LPOptions& opt) : lp_(lp), opt_(opt) {
    m_ = lp.rows();
    n_ = lp.cols();
    // slack for every inequality row, artificial for every row
    slack_row_.reserve(m_);
    for (std::size_t i = 0; i < m_; ++i)
      if (lp.senses[i] != Sense::Eq) slack_row_.push_back(i);
    ns_ = slack_row_.size();
    total_ = n_ + ns_ + m_;
    lb_.assign(total_, 0.0);
    ub_.assign(total_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      lb_[j] = lp.lower[j];
      ub_[j] = lp.upper[j];
    }
    for (std::size_t k = 0; k < ns_; ++k) {
      bool le = lp.senses[slack_row_[k]] == Sense::Le;
      lb_[n_ + k] = le ? 0.0 : -kInf;
      ub_[n_ + k] = le ? kInf : 0.0;
    }
    art_sign_.assign(m_, 1.0);
    x_.assign(total_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lb_[j])) x_[j] = lb_[j];
      else if (std::isfinite(ub_[j])) x_[j] = ub_[j];
    }
  }

  LPSolution run() {
    LPSolution sol;
    // residual with structural variables at their starting bound
    std::vector<double> r(lp_.rhs);
    for (std::size_t j = 0; j < n_; ++j)
      if (x_[j] != 0.0)
        for (Eigen::SparseMatrix<double>::InnerIterator it(lp_.A, Eigen::Index(j)); it; ++it)
          r[it.row()] -= it.value() * x_[j];
    basis_.assign(m_, 0);
    is_basic_.assign(total_, -1);
    std::vector<std::size_t> slack_of(m_, SIZE_MAX);
    for (std::size_t k = 0; k < ns_; ++k) slack_of[slack_row_[k]] = n_ + k;
    bool need_phase1 = false;
    for (std::size_t i = 0; i < m_; ++i) {
      std::size_t s = slack_of[i];
      std::size_t a = n_ + ns_ + i;
      if (s != SIZE_MAX && r[i] >= lb_[s] && r[i] <= ub_[s]) {
        basis_[i] = s;
        x_[s] = r[i];
        ub_[a] = 0.0;  // artificial unused
      } else {
        art_sign_[i] = r[i] >= 0 ? 1.0 : -1.0;
        basis_[i] = a;
        x_[a] = std::abs(r[i]);
        ub_[a] = kInf;
        need_phase1 = true;
      }
      is_basic_[basis_[i]] = int(i);
    }
    refactor();

    double rscale = 1.0;
    for (double v : lp_.rhs) rscale = std::max(rscale, std::abs(v));

    if (need_phase1) {
      cost_.assign(total_, 0.0);
      for (std::size_t i = 0; i < m_; ++i) cost_[n_ + ns_ + i] = 1.0;
      LPStatus st = iterate();
      if (st != LPStatus::Optimal) {
        sol.status = st == LPStatus::Unbounded ? LPStatus::NumericalFailure : st;
        sol.message = "phase one did not finish";
        sol.iterations = iters_;
        return sol;
      }
      double infeas = 0.0;
      for (std::size_t i = 0; i < m_; ++i) infeas += x_[n_ + ns_ + i];
      if (infeas > 1e-7 * rscale) {
        sol.status = LPStatus::Infeasible;
        sol.message = "phase one optimum " + std::to_string(infeas) + " > 0";
        sol.iterations = iters_;
        return sol;
      }
      for (std::size_t i = 0; i < m_; ++i) {
        std::size_t a = n_ + ns_ + i;
        ub_[a] = 0.0;
        if (is_basic_[a] < 0) x_[a] = 0.0;
      }
    }
    cost_.assign(total_, 0.0);
    double sgn = lp_.direction == Direction::Max ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = sgn * lp_.objective[j];
    LPStatus st = iterate();
    sol.iterations = iters_;
    sol.status = st;
    if (st != LPStatus::Optimal) {
      sol.message = st == LPStatus::Unbounded ? "objective unbounded" : "simplex did not converge";
      if (st == LPStatus::Unbounded) return sol;
    }
    refactor();
    Eigen::VectorXd y = dual_vector();
    sol.x.assign(x_.begin(), x_.begin() + Eigen::Index(n_));
    sol.y.resize(m_);
    sol.mu.resize(n_);
    for (std::size_t i = 0; i < m_; ++i) sol.y[i] = sgn * y[Eigen::Index(i)];
    for (std::size_t j = 0; j < n_; ++j) {
      double d = cost_[j] - col_dot(j, y);
      sol.mu[j] = is_basic_[j] >= 0 ? 0.0 : sgn * d;
    }
    sol.value = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.value += lp_.objective[j] * sol.x[j];
    residuals(sol);
    return sol;
  }

 private:
  template <class F>
  void for_col(std::size_t j, F&& f) const {
    if (j < n_) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(lp_.A, Eigen::Index(j)); it; ++it)
        f(std::size_t(it.row()), it.value());
    } else if (j < n_ + ns_) {
      f(slack_row_[j - n_], 1.0);
    } else {
      std::size_t i = j - n_ - ns_;
      f(i, art_sign_[i]);
    }
  }

  double col_dot(std::size_t j, const Eigen::VectorXd& y) const {
    double s = 0.0;
    for_col(j, [&](std::size_t i, double v) { s += v * y[Eigen::Index(i)]; });
    return s;
  }

  Eigen::VectorXd dual_vector() const {
    Eigen::VectorXd cb(m_);
    for (std::size_t i = 0; i < m_; ++i) cb[Eigen::Index(i)] = cost_[basis_[i]];
    return binv_.transpose() * cb;
  }

  void refactor() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(Eigen::Index(m_), Eigen::Index(m_));
    for (std::size_t k = 0; k < m_; ++k)
      for_col(basis_[k], [&](std::size_t i, double v) { B(Eigen::Index(i), Eigen::Index(k)) = v; });
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    binv_ = lu.inverse();
    recompute_basics();
  }

  // The explicit inverse is refactored only when B * binv drifts from the
  // identity; on large bases the dense LU dominates the run time.
  void refresh() {
    Eigen::VectorXd z(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) z[Eigen::Index(i)] = 1.0 + double(i % 7) / 7.0;
    Eigen::VectorXd v = binv_ * z;
    Eigen::VectorXd bz = Eigen::VectorXd::Zero(Eigen::Index(m_));
    for (std::size_t k = 0; k < m_; ++k)
      for_col(basis_[k], [&](std::size_t i, double a) { bz[Eigen::Index(i)] += a * v[Eigen::Index(k)]; });
    double err = (bz - z).lpNorm<Eigen::Infinity>();
    if (!std::isfinite(err) || err > 1e-10 || refreshes_ >= 16) {
      refactor();
      refreshes_ = 0;
    } else {
      recompute_basics();
      ++refreshes_;
    }
  }

  void recompute_basics() {
    // recompute basic values from the nonbasic ones
    Eigen::VectorXd r(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) r[Eigen::Index(i)] = lp_.rhs[i];
    for (std::size_t j = 0; j < total_; ++j)
      if (is_basic_[j] < 0 && x_[j] != 0.0)
        for_col(j, [&](std::size_t i, double v) { r[Eigen::Index(i)] -= v * x_[j]; });
    Eigen::VectorXd xb = binv_ * r;
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = xb[Eigen::Index(i)];
    since_refactor_ = 0;
  }

  LPStatus iterate() {
    const double tol = opt_.tol;
    std::size_t degenerate = 0;
    Eigen::VectorXd w(static_cast<Eigen::Index>(m_));
    while (true) {
      if (iters_ >= opt_.max_iterations) return LPStatus::IterationLimit;
      if (since_refactor_ >= opt_.refactor_every) refresh();
      Eigen::VectorXd y = dual_vector();
      bool bland = degenerate >= opt_.bland_after;
      // pricing
      std::size_t q = SIZE_MAX;
      double best = 0.0;
      int dir = 0;
      for (std::size_t j = 0; j < total_; ++j) {
        if (is_basic_[j] >= 0 || lb_[j] == ub_[j]) continue;
        double d = cost_[j] - col_dot(j, y);
        int dj = 0;
        if (d < -tol && x_[j] < ub_[j]) dj = 1;
        else if (d > tol && x_[j] > lb_[j]) dj = -1;
        if (!dj) continue;
        if (bland) {
          q = j;
          dir = dj;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dir = dj;
        }
      }
      if (q == SIZE_MAX) return LPStatus::Optimal;

      w.setZero();
      for_col(q, [&](std::size_t i, double v) { w += v * binv_.col(Eigen::Index(i)); });
      // basic i moves by -dir*theta*w_i; Harris two-pass ratio test
      const double ptol = 1e-9;
      double theta_max = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        double rate = dir * w[Eigen::Index(i)];
        std::size_t b = basis_[i];
        if (rate > 1e-9 && std::isfinite(lb_[b]))
          theta_max = std::min(theta_max, (x_[b] - lb_[b] + ptol) / rate);
        else if (rate < -1e-9 && std::isfinite(ub_[b]))
          theta_max = std::min(theta_max, (ub_[b] - x_[b] + ptol) / -rate);
      }
      double flip = ub_[q] - lb_[q];
      std::size_t r = SIZE_MAX;
      double theta;
      if (std::isfinite(flip) && flip <= theta_max) {
        theta = flip;
      } else {
        if (!std::isfinite(theta_max)) return LPStatus::Unbounded;
        double big = 0.0, best_ratio = kInf;
        for (std::size_t i = 0; i < m_; ++i) {
          double rate = dir * w[Eigen::Index(i)];
          std::size_t b = basis_[i];
          double ratio;
          if (rate > 1e-9 && std::isfinite(lb_[b])) ratio = (x_[b] - lb_[b]) / rate;
          else if (rate < -1e-9 && std::isfinite(ub_[b])) ratio = (ub_[b] - x_[b]) / -rate;
          else continue;
          if (ratio > theta_max) continue;
          if (bland) {
            if (ratio < best_ratio - 1e-12 ||
                (ratio <= best_ratio + 1e-12 && (r == SIZE_MAX || b < basis_[r]))) {
              best_ratio = std::min(ratio, best_ratio);
              r = i;
            }
          } else if (std::abs(rate) > big) {
            big = std::abs(rate);
            r = i;
          }
        }
        if (r == SIZE_MAX) return LPStatus::NumericalFailure;
        double rate = dir * w[Eigen::Index(r)];
        std::size_t b = basis_[r];
        theta = rate > 0 ? (x_[b] - lb_[b]) / rate : (ub_[b] - x_[b]) / -rate;
        theta = std::max(theta, 0.0);
      }
      degenerate = theta <= 1e-12 ? degenerate + 1 : 0;
      // move
      x_[q] += dir * theta;
      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * w[Eigen::Index(i)];
      ++iters_;
      if (r == SIZE_MAX) {
        x_[q] = dir > 0 ? ub_[q] : lb_[q];
        continue;
      }
      std::size_t leave = basis_[r];
      double rate = dir * w[Eigen::Index(r)];
      x_[leave] = rate > 0 ? lb_[leave] : ub_[leave];
      is_basic_[leave] = -1;
      basis_[r] = q;
      is_basic_[q] = int(r);
      // eta update of the explicit inverse
      double piv = w[Eigen::Index(r)];
      Eigen::RowVectorXd row = binv_.row(Eigen::Index(r)) / piv;
      binv_.noalias() -= w * row;
      binv_.row(Eigen::Index(r)) = row;
      ++since_refactor_;
    }
  }

  void residuals(LPSolution& sol) const {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(sol.x.data(), Eigen::Index(n_));
    Eigen::VectorXd ax = lp_.A * x;
    double pr = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      double d = ax[Eigen::Index(i)] - lp_.rhs[i];
      switch (lp_.senses[i]) {
        case Sense::Le: pr = std::max(pr, d); break;
        case Sense::Ge: pr = std::max(pr, -d); break;
        case Sense::Eq: pr = std::max(pr, std::abs(d)); break;
      }
    }
    for (std::size_t j = 0; j < n_; ++j)
      pr = std::max({pr, lp_.lower[j] - sol.x[j], sol.x[j] - lp_.upper[j]});
    sol.primal_residual = pr;
    DualCheck dc = verify_dual_feasible(lp_, sol.y, kInf);
    sol.dual_residual = dc.worst;
  }

  const LinearProgram& lp_;
  LPOptions opt_;
  std::size_t m_ = 0, n_ = 0, ns_ = 0, total_ = 0;
  std::vector<std::size_t> slack_row_;
  std::vector<double> art_sign_;
  std::vector<double> lb_, ub_, x_, cost_;
  std::vector<std::size_t> basis_;
  std::vector<int> is_basic_;
  Eigen::MatrixXd binv_;
  std::size_t iters_ = 0, since_refactor_ = 0, refreshes_ = 0;
};

}  // namespace

LPSolution lp_solve(const LinearProgram& lp, const LPOptions& opt) {
  lp.validate();
  Simplex s(lp, opt);
  LPSolution sol = s.run();
  if (sol.status == LPStatus::Optimal) {
    double scale = 1.0;
    for (double v : lp.rhs) scale = std::max(scale, std::abs(v));
    if (sol.primal_residual > 1e-6 * scale || sol.dual_residual > 1e-6) {
      sol.status = LPStatus::NumericalFailure;
      sol.message = "residuals too large: primal " + std::to_string(sol.primal_residual) +
                    ", dual " + std::to_string(sol.dual_residual);
    }
  }
  return sol;
}

DualCheck verify_dual_feasible(const LinearProgram& lp, const std::vector<double>& y, double tol) {
  if (y.size() != lp.rows()) fail(ErrorKind::Shape, "dual vector length does not match the row count");
  DualCheck r;
  const bool mx = lp.direction == Direction::Max;
  double worst = 0.0;
  double bound = 0.0;
  std::string why;
  auto note = [&](double v, const std::string& m) {
    if (v > worst) {
      worst = v;
      why = m;
    }
  };
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    double v = y[i];
    if (!std::isfinite(v)) fail(ErrorKind::Domain, "non-finite dual entry");
    // max: <= rows need y >= 0, >= rows y <= 0; min: reversed
    double wrong = 0.0;
    if (lp.senses[i] == Sense::Le) wrong = mx ? -v : v;
    else if (lp.senses[i] == Sense::Ge) wrong = mx ? v : -v;
    note(wrong, "row " + std::to_string(i) + " multiplier has the wrong sign");
    bound += lp.rhs[i] * v;
  }
  Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), Eigen::Index(y.size()));
  Eigen::VectorXd aty = lp.A.transpose() * yy;
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    double mu = lp.objective[j] - aty[Eigen::Index(j)];
    // for max a positive mu must be paid by a finite upper bound
    bool up = mx ? mu > 0 : mu < 0;
    double lim = up ? lp.upper[j] : lp.lower[j];
    if (mu == 0.0) continue;
    if (!std::isfinite(lim)) {
      note(std::abs(mu), "column " + std::to_string(j) + " reduced cost not covered by a bound");
      continue;
    }
    bound += lim * mu;
  }
  r.worst = worst;
  r.bound = bound;
  r.ok = worst <= tol;
  r.message = r.ok ? "feasible" : why;
  return r;
}

}  // namespace nlst

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "doctest.h"
#include "nlst/error.hpp"
#include "nlst/linalg.hpp"
#include "nlst/lp.hpp"
#include "nlst/nsattack.hpp"
#include "nlst/rng.hpp"
#include "nlst/sdp.hpp"
#include "nlst/systems.hpp"

using namespace nlst;

namespace {

// max c^T x over {A x <= b, x >= 0} by enumerating every basic point:
// choose `n` tight constraints among the rows and the bounds.
double vertex_oracle(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = int(A.rows()), n = int(A.cols());
  Eigen::MatrixXd G(m + n, n);
  Eigen::VectorXd h(m + n);
  G << A, -Eigen::MatrixXd::Identity(n, n);
  h << b, Eigen::VectorXd::Zero(n);
  double best = -kInf;
  std::vector<int> pick(m + n, 0);
  std::fill(pick.end() - n, pick.end(), 1);
  do {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd r(n);
    int k = 0;
    for (int i = 0; i < m + n; ++i)
      if (pick[i]) {
        M.row(k) = G.row(i);
        r[k++] = h[i];
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rank() < n) continue;
    Eigen::VectorXd x = lu.solve(r);
    if (((G * x - h).array() > 1e-9).any()) continue;
    best = std::max(best, c.dot(x));
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("lp examples") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  LinearProgram lp(Direction::Max, A, {1, 1}, {1, 1});
  auto s = lp_solve(lp);
  REQUIRE(s.status == LPStatus::Optimal);
  CHECK(s.value == doctest::Approx(2.0));

  Eigen::MatrixXd B(2, 1);
  B << 1, -1;
  LinearProgram inf(Direction::Max, B, {1}, {1, -2});
  CHECK(lp_solve(inf).status == LPStatus::Infeasible);

  Eigen::MatrixXd C(1, 2);
  C << 1, -1;
  LinearProgram unb(Direction::Max, C, {1, 1}, {1});
  CHECK(lp_solve(unb).status == LPStatus::Unbounded);
}

TEST_CASE("lp single-box distance program") {
  for (double eps : {0.0, 0.1, 0.2}) {
    System box = unbiased_pr_box(eps);
    auto b = distance_objective(box.scenario(), BitFunction::xor_all(1), {0, 0});
    LinearProgram lp = distance_lp_program(box, b);
    auto s = lp_solve(lp);
    REQUIRE(s.status == LPStatus::Optimal);
    CHECK(s.value == doctest::Approx(4 * eps).epsilon(1e-9));
  }
}

TEST_CASE("lp matches vertex enumeration and weak duality") {
  Rng rng = make_rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    int m = 2 + trial % 4, n = 2 + trial % 3;
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd b(m), c(n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = U(rng) * 2 - 0.3;
    for (int j = 0; j < n; ++j) A(0, j) = 0.2 + U(rng);  // keeps the region bounded
    for (int i = 0; i < m; ++i) b[i] = 0.5 + U(rng);
    for (int j = 0; j < n; ++j) c[j] = U(rng) * 2 - 0.5;
    LinearProgram lp(Direction::Max, A, to_vec(c), to_vec(b));
    auto s = lp_solve(lp);
    REQUIRE(s.status == LPStatus::Optimal);
    double ref = vertex_oracle(A, b, c);
    CHECK(s.value == doctest::Approx(ref).epsilon(1e-9));

    // the returned pair closes the gap
    auto own = verify_dual_feasible(lp, s.y);
    CHECK(own.ok);
    CHECK(own.bound == doctest::Approx(s.value).epsilon(1e-9));

    // an independently built dual point: y on row 0 only, scaled to cover c
    double t = 0;
    for (int j = 0; j < n; ++j) t = std::max(t, c[j] / A(0, j));
    std::vector<double> y(m, 0.0);
    y[0] = t;
    auto chk = verify_dual_feasible(lp, y);
    CHECK(chk.ok);
    CHECK(s.value <= chk.bound + 1e-9);
    CHECK(chk.bound == doctest::Approx(t * b[0]));

    // a perturbed dual that is accepted must still bound the optimum
    std::vector<double> z = s.y;
    for (double& e : z) e = std::max(0.0, e + 0.1 * (U(rng) - 0.5));
    auto pz = verify_dual_feasible(lp, z);
    if (pz.ok) CHECK(s.value <= pz.bound + 1e-9);
  }
}

TEST_CASE("lp minimisation, equality rows and free variables") {
  // min x1 + 2 x2  s.t.  x1 + x2 = 1, x1 - x2 <= 0.5, x free: optimum at x2 = 1/4
  Eigen::MatrixXd A(2, 2);
  A << 1, 1, 1, -1;
  LinearProgram lp(Direction::Min, A, {1, 2}, {1, 0.5});
  lp.senses = {Sense::Eq, Sense::Le};
  lp.set_free(0);
  lp.set_free(1);
  auto s = lp_solve(lp);
  REQUIRE(s.status == LPStatus::Optimal);
  CHECK(s.value == doctest::Approx(1.25));
  CHECK(s.x[0] == doctest::Approx(0.75));
  auto chk = verify_dual_feasible(lp, s.y);
  CHECK(chk.ok);
  CHECK(chk.bound == doctest::Approx(1.25));
  // a >= row flipped to its mirror gives the same optimum
  lp.A = (-A).sparseView();
  lp.rhs = {-1, -0.5};
  lp.senses = {Sense::Eq, Sense::Ge};
  auto t = lp_solve(lp);
  REQUIRE(t.status == LPStatus::Optimal);
  CHECK(t.value == doctest::Approx(1.25));
}

TEST_CASE("dual check rejects zero vector against nonzero objective") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  LinearProgram lp(Direction::Max, A, {1, 1}, {1, 1});
  lp.set_free(0);
  auto chk = verify_dual_feasible(lp, {0.0, 0.0});
  CHECK_FALSE(chk.ok);
  CHECK_THROWS_AS(verify_dual_feasible(lp, {0.0}), Error);
}

TEST_CASE("eig_symmetric") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  auto e = eig_symmetric(m);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == doctest::Approx(3.0));
  auto id = eig_symmetric(SymmetricMatrix::identity(5));
  for (double v : id) CHECK(v == doctest::Approx(1.0));

  Rng rng = make_rng(12);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int d = 1; d <= 8; ++d)
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd a(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = N(rng);
      auto ev = eig_symmetric(a);
      CHECK(std::is_sorted(ev.begin(), ev.end()));
      double sum = std::accumulate(ev.begin(), ev.end(), 0.0);
      CHECK(sum == doctest::Approx(a.trace()).epsilon(1e-10));
      if (d <= 4) {
        double prod = 1;
        for (double v : ev) prod *= v;
        CHECK(prod == doctest::Approx(a.fullPivLu().determinant()).epsilon(1e-9));
      }
      CHECK(min_eigenvalue(a) == doctest::Approx(ev.front()));
      CHECK(min_eigenvalue(SymmetricMatrix::from_dense(a)) == doctest::Approx(ev.front()));
    }
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 1) = bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(eig_symmetric(bad), Error);
}

TEST_CASE("sdp: max trace with unit diagonal") {
  SdpProblem p;
  p.blocks = {2};
  p.C = {{0, 0, 0, -1.0}, {0, 1, 1, -1.0}};
  p.A = {{{0, 0, 0, 1.0}}, {{0, 1, 1, 1.0}}};
  p.b = {1.0, 1.0};
  auto s = sdp_solve(p);
  REQUIRE(s.status == SdpStatus::Optimal);
  CHECK(-s.primal_value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(s.dual_value <= s.primal_value + 1e-7);
}

TEST_CASE("sdp: minimum eigenvalue program against a dense oracle") {
  Rng rng = make_rng(13);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int d = 2; d <= 6; ++d)
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::MatrixXd c(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) c(i, j) = c(j, i) = N(rng);
      SdpProblem p;
      p.blocks = {d, 1};
      for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) p.C.push_back({0, i, j, c(i, j)});
      std::vector<SdpEntry> tr;
      for (int i = 0; i < d; ++i) tr.push_back({0, i, i, 1.0});
      tr.push_back({1, 0, 0, 1.0});  // slack scalar: trace(X) + s = 1 keeps it tight at optimum
      p.A = {tr};
      p.b = {1.0};
      auto s = sdp_solve(p);
      REQUIRE(s.status == SdpStatus::Optimal);
      double ref = std::min(0.0, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues()[0]);
      CHECK(s.primal_value == doctest::Approx(ref).epsilon(1e-6));
      CHECK(s.dual_value <= s.primal_value + 1e-7);
      CHECK(std::abs(s.primal_value - s.dual_value) < 1e-6);
      auto dchk = verify_dual_feasible(p, s.y);
      CHECK(dchk.ok);
      CHECK(dchk.bound <= s.primal_value + 1e-7);
      auto pchk = verify_primal_feasible(p, s.X);
      CHECK(pchk.ok);
    }
}

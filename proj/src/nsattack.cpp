#include "nlst/nsattack.hpp"

#include <algorithm>
#include <cmath>

#include "nlst/error.hpp"

namespace nlst {

using Triplet = Eigen::Triplet<double>;

Eigen::SparseMatrix<double> ns_constraint_matrix(const Scenario& sc) {
  std::vector<Triplet> trip;
  std::size_t row = 0;
  for (std::size_t i = sc.parties(); i-- > 0;) {
    if (sc.parties() == 1) break;
    const std::size_t S = sc.stride(i);
    const std::size_t X = std::size_t(sc.outputs(i));
    const std::size_t U = std::size_t(sc.inputs(i));
    const std::size_t B = U * X;
    const std::size_t highs = sc.size() / (S * B);
    for (std::size_t h = 0; h < highs; ++h)
      for (std::size_t l = 0; l < S; ++l)
        for (std::size_t u = 0; u + 1 < U; ++u, ++row)
          for (std::size_t x = 0; x < X; ++x) {
            trip.emplace_back(int(row), int(h * S * B + (u * X + x) * S + l), 1.0);
            trip.emplace_back(int(row), int(h * S * B + ((u + 1) * X + x) * S + l), -1.0);
          }
  }
  Eigen::SparseMatrix<double> A(Eigen::Index(row), Eigen::Index(sc.size()));
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::MatrixXd build_ns_constraint_matrix(const Scenario& sc) {
  auto A = ns_constraint_matrix(sc);
  if (double(A.rows()) * double(A.cols()) > double(kMaxTableSize))
    fail(ErrorKind::Size, "dense constraint matrix exceeds the size cap");
  return Eigen::MatrixXd(A);
}

std::vector<double> distance_objective(const Scenario& sc, const BitFunction& f,
                                       const std::vector<int>& inputs) {
  if (inputs.size() != sc.parties()) fail(ErrorKind::Shape, "one input per party is required");
  for (std::size_t i = 0; i < sc.parties(); ++i)
    if (inputs[i] < 0 || inputs[i] >= sc.inputs(i)) fail(ErrorKind::Domain, "input out of range");
  if (f.domain() != std::size_t(sc.outputs(0)))
    fail(ErrorKind::Shape, "bit function domain does not match the first party's outputs");
  std::vector<double> b(sc.size(), 0.0);
  std::vector<int> u(sc.parties()), x(sc.parties());
  for (std::size_t i = 0; i < sc.size(); ++i) {
    sc.decode(i, u.data(), x.data());
    if (u != inputs) continue;
    b[i] = f.eval(std::uint64_t(x[0])) ? -1.0 : 1.0;
  }
  return b;
}

Eigen::SparseMatrix<double> certificate_matrix(const Scenario& sc) {
  auto A = ns_constraint_matrix(sc);
  const Eigen::Index r = A.rows(), c = A.cols();
  std::vector<Triplet> trip;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      trip.emplace_back(int(it.row()), int(it.col()), it.value());
      trip.emplace_back(int(r + it.row()), int(it.col()), -it.value());
    }
  for (Eigen::Index j = 0; j < c; ++j) {
    trip.emplace_back(int(2 * r + j), int(j), 1.0);
    trip.emplace_back(int(2 * r + c + j), int(j), -1.0);
  }
  Eigen::SparseMatrix<double> M(2 * r + 2 * c, c);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

LinearProgram distance_lp_program(const System& sys, const std::vector<double>& b) {
  const auto& sc = sys.scenario();
  if (b.size() != sc.size()) fail(ErrorKind::Shape, "objective length does not match the table");
  auto M = certificate_matrix(sc);
  const std::size_t r = (std::size_t(M.rows()) - 2 * sc.size()) / 2;
  std::vector<double> rhs(M.rows(), 0.0);
  for (std::size_t j = 0; j < sc.size(); ++j) rhs[2 * r + j] = rhs[2 * r + sc.size() + j] = sys[j];
  LinearProgram lp(Direction::Max, M, b, rhs);
  for (std::size_t j = 0; j < sc.size(); ++j) lp.set_free(j);
  return lp;
}

namespace {

// out[p, o, q] = sum_i M(o, i) in[p, i, q]
std::vector<double> mode_apply(const std::vector<double>& in, std::vector<std::size_t>& dims,
                               std::size_t k, const Eigen::SparseMatrix<double>& M) {
  std::size_t pre = 1, post = 1;
  for (std::size_t j = 0; j < k; ++j) pre *= dims[j];
  for (std::size_t j = k + 1; j < dims.size(); ++j) post *= dims[j];
  const std::size_t I = std::size_t(M.cols()), O = std::size_t(M.rows());
  if (dims[k] != I) fail(ErrorKind::Shape, "mode dimension mismatch");
  std::vector<double> out(pre * O * post, 0.0);
  for (int c = 0; c < M.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, c); it; ++it) {
      const std::size_t o = std::size_t(it.row()), i = std::size_t(it.col());
      const double v = it.value();
      for (std::size_t p = 0; p < pre; ++p) {
        const double* src = in.data() + (p * I + i) * post;
        double* dst = out.data() + (p * O + o) * post;
        for (std::size_t q = 0; q < post; ++q) dst[q] += v * src[q];
      }
    }
  dims[k] = O;
  return out;
}

std::vector<double> kron(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i * b.size() + j] = a[i] * b[j];
  return r;
}

// per joint cell: sum of lambda over rows lying in the +/-I blocks of every factor
std::vector<double> cell_weights(const DualCertificate& c) {
  const std::size_t n = c.factors.size();
  std::vector<double> w = c.lambda;
  std::vector<std::size_t> dims(n);
  for (std::size_t k = 0; k < n; ++k) dims[k] = c.layout_rows(k);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t cells = c.factors[k].size(), r = c.ns_rows[k];
    std::vector<Triplet> trip;
    for (std::size_t j = 0; j < cells; ++j) {
      trip.emplace_back(int(j), int(2 * r + j), 1.0);
      trip.emplace_back(int(j), int(2 * r + cells + j), 1.0);
    }
    Eigen::SparseMatrix<double> S(Eigen::Index(cells), Eigen::Index(dims[k]));
    S.setFromTriplets(trip.begin(), trip.end());
    w = mode_apply(w, dims, k, S);
  }
  return w;
}

void check_layout(const DualCertificate& c) {
  if (c.factors.empty() || c.factors.size() != c.ns_rows.size())
    fail(ErrorKind::Structural, "certificate has no factor layout");
  std::size_t total = 1;
  for (std::size_t k = 0; k < c.factors.size(); ++k) total *= c.layout_rows(k);
  if (total != c.lambda.size()) fail(ErrorKind::Shape, "certificate length does not match its layout");
}

}  // namespace

CertificateCheck verify_certificate(const DualCertificate& c, const std::vector<std::vector<double>>& b,
                                    double tol) {
  check_layout(c);
  if (b.size() != c.factors.size()) fail(ErrorKind::Shape, "one objective per factor is required");
  CertificateCheck r;
  double neg = 0.0;
  for (double v : c.lambda) neg = std::max(neg, -v);
  std::vector<std::size_t> dims(c.factors.size());
  for (std::size_t k = 0; k < dims.size(); ++k) dims[k] = c.layout_rows(k);
  std::vector<double> t = c.lambda;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (b[k].size() != c.factors[k].size()) fail(ErrorKind::Shape, "objective length mismatch");
    Eigen::SparseMatrix<double> Mt = certificate_matrix(c.factors[k]).transpose();
    t = mode_apply(t, dims, k, Mt);
  }
  std::vector<double> bb = b[0];
  for (std::size_t k = 1; k < b.size(); ++k) bb = kron(bb, b[k]);
  double res = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) res = std::max(res, std::abs(t[i] - bb[i]));
  r.worst = std::max(res, neg);
  r.ok = r.worst <= tol;
  r.message = r.ok ? "feasible" : (neg > res ? "negative multiplier" : "A^T lambda differs from b");
  return r;
}

double certified_value(const DualCertificate& c, const System& joint) {
  check_layout(c);
  std::size_t cells = 1;
  for (const auto& f : c.factors) cells *= f.size();
  if (joint.size() != cells) fail(ErrorKind::Shape, "joint system does not match the certificate layout");
  auto w = cell_weights(c);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * joint[i];
  return s;
}

double xor_bound(const DualCertificate& c, const System& joint) { return 0.5 * certified_value(c, joint); }

EventDecomposition dual_event_decomposition(const DualCertificate& c) {
  check_layout(c);
  EventDecomposition e;
  e.weights = cell_weights(c);
  for (double v : e.weights) e.lambda_max = std::max(e.lambda_max, v);
  e.head_prob.resize(e.weights.size(), 0.0);
  if (e.lambda_max > 0)
    for (std::size_t i = 0; i < e.weights.size(); ++i) e.head_prob[i] = e.weights[i] / e.lambda_max;
  return e;
}

AttackResult distance_from_uniform_lp(const System& sys, const BitFunction& f,
                                      const std::vector<int>& inputs, double tol) {
  const auto& sc = sys.scenario();
  NsReport ns = is_nonsignalling(sys, 1e-8, 1);
  if (!ns.ok) fail(ErrorKind::Domain, "system is signalling: " + ns.violations.front());
  std::vector<double> b = distance_objective(sc, f, inputs);
  Eigen::SparseMatrix<double> A = ns_constraint_matrix(sc);
  const std::size_t r = std::size_t(A.rows()), n = sc.size();
  std::size_t rows = std::max<std::size_t>(r, 1);
  if (r == 0) A = Eigen::SparseMatrix<double>(1, Eigen::Index(n));
  LinearProgram lp(Direction::Max, A, b, std::vector<double>(rows, 0.0));
  lp.senses.assign(rows, Sense::Eq);
  for (std::size_t j = 0; j < n; ++j) {
    lp.lower[j] = -sys[j];
    lp.upper[j] = sys[j];
  }
  LPOptions opt;
  opt.tol = tol;
  LPSolution sol = lp_solve(lp, opt);
  if (sol.status != LPStatus::Optimal)
    fail(ErrorKind::Solver, std::string("distance LP: ") + to_string(sol.status) + " " + sol.message);

  AttackResult res;
  res.delta = sol.x;
  res.distance = 0.5 * sol.value;
  DualCertificate cert;
  cert.factors = {sc};
  cert.ns_rows = {r};
  cert.lambda.assign(2 * r + 2 * n, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    cert.lambda[i] = std::max(sol.y[i], 0.0);
    cert.lambda[r + i] = std::max(-sol.y[i], 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) {
    cert.lambda[2 * r + j] = std::max(sol.mu[j], 0.0);
    cert.lambda[2 * r + n + j] = std::max(-sol.mu[j], 0.0);
  }
  res.certificate = cert;
  res.certified = 0.5 * certified_value(cert, sys);

  // witness: P = p P^{z0} + (1-p) P^{z1} with P^{z0} = (P + Delta) / (2p)
  double s = 0.0;
  std::vector<int> u(sc.parties()), x(sc.parties());
  for (std::size_t i = 0; i < n; ++i) {
    sc.decode(i, u.data(), x.data());
    if (u == inputs) s += sol.x[i];
  }
  double p = std::clamp(0.5 * (1.0 + s), 0.0, 1.0);
  res.p = p;
  std::vector<double> t0(n), t1(n);
  for (std::size_t i = 0; i < n; ++i) {
    t0[i] = p > 0 ? std::max(0.0, (sys[i] + sol.x[i]) / (2 * p)) : sys[i];
    t1[i] = p < 1 ? std::max(0.0, (sys[i] - sol.x[i]) / (2 * (1 - p))) : sys[i];
  }
  res.witness.elements.emplace_back(p, System::trusted(sc, t0));
  res.witness.elements.emplace_back(1 - p, System::trusted(sc, t1));
  return res;
}

bool is_partition_element(const System& parent, double p, const System& candidate, double tol) {
  if (parent.scenario() != candidate.scenario())
    fail(ErrorKind::Shape, "partition element has a different scenario");
  if (!(p >= 0.0 && p <= 1.0)) return false;
  if (!check_normalized(candidate.scenario(), candidate.table(), tol).ok) return false;
  if (!is_nonsignalling(candidate, tol, 1).ok) return false;
  for (std::size_t i = 0; i < parent.size(); ++i)
    if (p * candidate[i] > parent[i] + tol) return false;
  return true;
}

NSPartition optimal_single_box_partition(const System& sys, double tol) {
  const auto& sc = sys.scenario();
  if (!sc.is_bipartite_binary()) fail(ErrorKind::Shape, "single-box partition needs a bipartite binary box");
  if (!is_nonsignalling(sys, 1e-9, 1).ok) fail(ErrorKind::Domain, "system is signalling");
  NSPartition part;
  std::vector<double> rest = sys.table();
  double wsum = 0.0;
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          if ((x ^ y) == (u & v)) continue;
          // the strategy wins on the other three input pairs
          LocalStrategy f = {{0, 0}, {0, 0}};
          f[0][u] = x;
          f[1][v] = y;
          f[0][1 - u] = ((1 - u) & v) ^ y;
          f[1][1 - v] = (u & (1 - v)) ^ x;
          int uu[2] = {u, v}, xx[2] = {x, y};
          double w = sys[sc.index(uu, xx)];
          System d = deterministic_system(sc, f);
          for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= w * d[i];
          wsum += w;
          if (w > 0) part.elements.emplace_back(w, d);
        }
  double wpr = 1.0 - wsum;
  for (double v : rest)
    if (v < -tol) fail(ErrorKind::Regime, "remainder is negative: the box is outside the partition's regime");
  if (wpr < -tol) fail(ErrorKind::Regime, "PR-box weight is negative");
  if (wpr > tol) {
    for (double& v : rest) v = std::max(0.0, v / wpr);
    part.elements.emplace_back(wpr, System::trusted(sc, rest));
  }
  return part;
}

LocalPartResult local_part(const System& sys, double vertex_cap) {
  const auto& sc = sys.scenario();
  double count = count_local_vertices(sc);
  if (count > vertex_cap) fail(ErrorKind::Size, "local vertex count exceeds the cap");
  std::vector<LocalStrategy> strategies;
  std::vector<Triplet> trip;
  strategies.reserve(std::size_t(count));
  trip.reserve(std::size_t(count) * sc.input_combos());
  for_each_local_vertex(sc, vertex_cap, [&](const LocalStrategy& f) {
    int col = int(strategies.size());
    for (auto idx : vertex_support(sc, f)) trip.emplace_back(int(idx), col, 1.0);
    strategies.push_back(f);
  });
  Eigen::SparseMatrix<double> D(Eigen::Index(sc.size()), Eigen::Index(strategies.size()));
  D.setFromTriplets(trip.begin(), trip.end());
  LinearProgram lp(Direction::Max, std::move(D), std::vector<double>(strategies.size(), 1.0), sys.table());
  LPSolution sol = lp_solve(lp);
  if (sol.status != LPStatus::Optimal)
    fail(ErrorKind::Solver, std::string("local-part LP: ") + to_string(sol.status) + " " + sol.message);
  LocalPartResult r;
  r.value = sol.value;
  r.dual = sol.y;
  r.vertices = strategies.size();
  r.iterations = sol.iterations;
  for (std::size_t j = 0; j < strategies.size(); ++j)
    if (sol.x[j] > 1e-12) r.mixture.emplace_back(sol.x[j], strategies[j]);
  return r;
}

DualCertificate lambda1_star() {
  Scenario sc = Scenario::binary(2);
  DualCertificate c;
  c.factors = {sc};
  c.ns_rows = {8};
  c.lambda.assign(48, 0.0);
  for (int i : {0, 2, 4, 6}) c.lambda[i] = 0.5;
  for (int i : {1, 3, 5, 7}) c.lambda[8 + i] = 0.5;
  for (int i : {1, 3, 10, 12}) c.lambda[16 + i] = 1.0;
  for (int i : {4, 6, 9, 15}) c.lambda[32 + i] = 1.0;
  return c;
}

DualCertificate tensor_dual(const DualCertificate& a, const DualCertificate& b) {
  check_layout(a);
  check_layout(b);
  DualCertificate c;
  c.factors = a.factors;
  c.factors.insert(c.factors.end(), b.factors.begin(), b.factors.end());
  c.ns_rows = a.ns_rows;
  c.ns_rows.insert(c.ns_rows.end(), b.ns_rows.begin(), b.ns_rows.end());
  if (double(a.lambda.size()) * double(b.lambda.size()) > double(kMaxTableSize))
    fail(ErrorKind::Size, "tensor certificate exceeds the size cap");
  c.lambda = kron(a.lambda, b.lambda);
  return c;
}

DualCertificate tensor_power(const DualCertificate& a, int n) {
  if (n < 1) fail(ErrorKind::Domain, "tensor power needs n >= 1");
  DualCertificate r = a;
  for (int i = 1; i < n; ++i) r = tensor_dual(r, a);
  return r;
}

}  // namespace nlst

#include "nlst/npa.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nlst/error.hpp"
#include "nlst/linalg.hpp"

namespace nlst {

std::optional<Word> canonicalize(const Word& w) {
  Word s = w;
  std::stable_sort(s.begin(), s.end(),
                   [](const Generator& a, const Generator& b) { return a.party < b.party; });
  Word out;
  out.reserve(s.size());
  for (const auto& g : s) {
    if (!out.empty() && out.back().party == g.party && out.back().input == g.input) {
      if (out.back().output == g.output) continue;
      return std::nullopt;
    }
    out.push_back(g);
  }
  return out;
}

Word moment_key(const Word& c) {
  Word r(c.rbegin(), c.rend());
  auto rc = canonicalize(r);
  return std::min(c, *rc);
}

std::string to_string(const Word& w) {
  if (w.empty()) return "1";
  std::ostringstream os;
  for (const auto& g : w) os << char('A' + g.party) << g.input << "^" << g.output;
  return os.str();
}

namespace {

bool graded_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

Word reversed(const Word& w) { return Word(w.rbegin(), w.rend()); }

std::vector<SdpEntry> pattern_entries(const MomentStructure& ms, std::size_t m, int block, double scale) {
  std::vector<SdpEntry> e;
  for (const auto& [i, j] : ms.pattern(m))
    if (i <= j) e.push_back({block, i, j, scale});
  return e;
}

void append(std::vector<SdpEntry>& a, const std::vector<SdpEntry>& b) { a.insert(a.end(), b.begin(), b.end()); }

void require_nonsignalling(const System& p) {
  NsReport r = is_nonsignalling(p, 1e-8, 1);
  if (!r.ok) fail(ErrorKind::NotQuantum, "observed behaviour is signalling: " + r.violations.front());
}


// At boundary behaviours such as the Tsirelson point no optimal certificate
// exists (the optimum is not Lipschitz in P) and the iterates stall. The best
// iterate is kept when its moment blocks are feasible and the gap is small.
SdpSolution solve_moment_program(const SdpProblem& p, const char* what, bool& reduced) {
  SdpSolution s = sdp_solve(p);
  reduced = false;
  if (s.status == SdpStatus::Optimal) return s;
  double gap = std::abs(s.primal_value - s.dual_value);
  if ((s.status == SdpStatus::NumericalFailure || s.status == SdpStatus::IterationLimit) &&
      s.dual_residual <= 1e-6 && s.primal_residual <= 1e-3 && gap <= 1e-3) {
    reduced = true;
    return s;
  }
  fail(ErrorKind::Solver, std::string(what) + ": " + to_string(s.status) + " " + s.message);
}

}  // namespace

MomentStructure::MomentStructure(const Scenario& sc, int level) : sc_(sc), level_(level) {
  if (level < 1 || level > 2) fail(ErrorKind::Domain, "supported NPA levels are 1 and 2");
  std::vector<Generator> gens;
  for (std::size_t p = 0; p < sc.parties(); ++p)
    for (int u = 0; u < sc.inputs(p); ++u)
      for (int x = 0; x + 1 < sc.outputs(p); ++x) gens.push_back({int(p), u, x});
  std::set<Word> seen = {Word{}};
  std::vector<Word> frontier = {Word{}};
  for (int len = 1; len <= level; ++len) {
    std::vector<Word> next;
    for (const auto& w : frontier)
      for (const auto& g : gens) {
        Word e = w;
        e.push_back(g);
        auto c = canonicalize(e);
        if (!c || c->size() != std::size_t(len) || seen.count(*c)) continue;
        seen.insert(*c);
        next.push_back(*c);
      }
    frontier = next;
  }
  words_.assign(seen.begin(), seen.end());
  std::sort(words_.begin(), words_.end(), graded_less);
  for (std::size_t i = 0; i < words_.size(); ++i) word_pos_[words_[i]] = int(i);

  const std::size_t n = words_.size();
  index_.assign(n * n, -1);
  std::map<Word, int> ids;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Word prod = reversed(words_[i]);
      prod.insert(prod.end(), words_[j].begin(), words_[j].end());
      auto c = canonicalize(prod);
      if (!c) continue;
      Word key = moment_key(*c);
      auto it = ids.find(key);
      int id;
      if (it == ids.end()) {
        id = int(moment_words_.size());
        ids.emplace(key, id);
        moment_words_.push_back(key);
      } else {
        id = it->second;
      }
      index_[i * n + j] = index_[j * n + i] = id;
    }
  patterns_.assign(moment_words_.size(), {});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (index_[i * n + j] >= 0) patterns_[index_[i * n + j]].emplace_back(int(i), int(j));
  observable_.assign(moment_words_.size(), 0);
  for (std::size_t m = 0; m < moment_words_.size(); ++m) {
    const Word& w = moment_words_[m];
    bool ok = true;
    for (std::size_t k = 1; k < w.size(); ++k)
      if (w[k].party == w[k - 1].party) ok = false;
    observable_[m] = ok;
  }

  // injection: expand prod_p (E^x or 1 - sum E) per cell
  T_ = Eigen::MatrixXd::Zero(Eigen::Index(sc.size()), Eigen::Index(moment_words_.size()));
  std::vector<int> u(sc.parties()), x(sc.parties());
  for (std::size_t cell = 0; cell < sc.size(); ++cell) {
    sc.decode(cell, u.data(), x.data());
    std::vector<std::vector<std::pair<int, double>>> opts(sc.parties());  // output (-1 = identity), coef
    for (std::size_t p = 0; p < sc.parties(); ++p) {
      int X = sc.outputs(p);
      if (x[p] < X - 1) {
        opts[p].push_back({x[p], 1.0});
      } else {
        opts[p].push_back({-1, 1.0});
        for (int o = 0; o + 1 < X; ++o) opts[p].push_back({o, -1.0});
      }
    }
    std::vector<std::size_t> pick(sc.parties(), 0);
    while (true) {
      Word w;
      double coef = 1.0;
      for (std::size_t p = 0; p < sc.parties(); ++p) {
        auto [o, c] = opts[p][pick[p]];
        coef *= c;
        if (o >= 0) w.push_back({int(p), u[p], o});
      }
      auto it = ids.find(w);
      if (it == ids.end())
        fail(ErrorKind::Shape, "NPA level too low to contain every observable moment");
      T_(static_cast<Eigen::Index>(cell), it->second) += coef;
      std::size_t p = sc.parties();
      bool done = true;
      while (p-- > 0) {
        if (++pick[p] < opts[p].size()) {
          done = false;
          break;
        }
        pick[p] = 0;
      }
      if (done) break;
    }
  }
}

int MomentStructure::word_index(const Word& w) const {
  auto it = word_pos_.find(w);
  return it == word_pos_.end() ? -1 : it->second;
}

std::vector<double> MomentStructure::observed_moments(const System& p) const {
  if (p.scenario() != sc_) fail(ErrorKind::Shape, "system does not match the moment structure");
  std::vector<double> mu(moments(), 0.0);
  std::vector<int> u(sc_.parties()), x(sc_.parties());
  for (std::size_t m = 0; m < moments(); ++m) {
    if (!observable_[m]) continue;
    std::vector<int> want_u(sc_.parties(), 0), want_x(sc_.parties(), -1);
    for (const auto& g : moment_words_[m]) {
      want_u[g.party] = g.input;
      want_x[g.party] = g.output;
    }
    double s = 0.0;
    for (std::size_t cell = 0; cell < p.size(); ++cell) {
      sc_.decode(cell, u.data(), x.data());
      if (u != want_u) continue;
      bool match = true;
      for (std::size_t q = 0; q < sc_.parties(); ++q)
        if (want_x[q] >= 0 && x[q] != want_x[q]) match = false;
      if (match) s += p[cell];
    }
    mu[m] = s;
  }
  return mu;
}

Eigen::MatrixXd MomentStructure::gamma(const std::vector<double>& v) const {
  if (v.size() != moments()) fail(ErrorKind::Shape, "moment vector length mismatch");
  const std::size_t n = dim();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (moment(i, j) >= 0) G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[moment(i, j)];
  return G;
}

Eigen::MatrixXd MomentStructure::equality_rows() const {
  const std::size_t n = dim();
  auto col = [n](std::size_t i, std::size_t j) { return i * n - i * (i - 1) / 2 + (j - i); };
  std::vector<long> first(moments(), -1);
  std::vector<std::pair<long, long>> rows;  // (col, first col or -1)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      int m = moment(i, j);
      long c = long(col(i, j));
      if (m < 0) rows.push_back({c, -1});
      else if (first[m] < 0) first[m] = c;
      else rows.push_back({c, first[m]});
    }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Eigen::Index(rows.size()), Eigen::Index(n * (n + 1) / 2));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    A(static_cast<Eigen::Index>(r), rows[r].first) = 1.0;
    if (rows[r].second >= 0) A(static_cast<Eigen::Index>(r), rows[r].second) = -1.0;
  }
  return A;
}

double MomentStructure::equality_residual(const Eigen::MatrixXd& g) const {
  const std::size_t n = dim();
  if (std::size_t(g.rows()) != n || std::size_t(g.cols()) != n) fail(ErrorKind::Shape, "Gamma dimension mismatch");
  Eigen::VectorXd v(Eigen::Index(n * (n + 1) / 2));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) v[k++] = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  return std::max(asym, (equality_rows() * v).cwiseAbs().maxCoeff());
}

Eigen::VectorXd MomentStructure::projector_vector(int party, int input, int output) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index(dim()));
  int X = sc_.outputs(party);
  if (output < X - 1) {
    v[word_index({{party, input, output}})] = 1.0;
  } else {
    v[0] = 1.0;
    for (int o = 0; o + 1 < X; ++o) v[word_index({{party, input, o}})] -= 1.0;
  }
  return v;
}

double pattern_inner(const MomentStructure& ms, std::size_t m, const Eigen::MatrixXd& M) {
  double s = 0.0;
  for (const auto& [i, j] : ms.pattern(m)) s += M(i, j);
  return s;
}

BellMax max_bell_value(const Scenario& sc, int level, const std::vector<double>& coef) {
  MomentStructure ms(sc, level);
  if (coef.size() != sc.size()) fail(ErrorKind::Shape, "one Bell coefficient per cell is required");
  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coef.data(), Eigen::Index(coef.size()));
  Eigen::VectorXd w = ms.injection().transpose() * c;
  SdpProblem p;
  p.blocks = {int(ms.dim())};
  p.C = pattern_entries(ms, 0, 0, 1.0);
  for (std::size_t m = 1; m < ms.moments(); ++m) {
    p.A.push_back(pattern_entries(ms, m, 0, -1.0));
    p.b.push_back(w[static_cast<Eigen::Index>(m)]);
  }
  p.offset = w[0];
  BellMax r;
  r.sdp = sdp_solve(p);
  if (r.sdp.status != SdpStatus::Optimal)
    fail(ErrorKind::Solver, std::string("Bell SDP: ") + to_string(r.sdp.status));
  r.value = r.sdp.dual_value;
  r.moments.assign(ms.moments(), 0.0);
  r.moments[0] = 1.0;
  for (std::size_t m = 1; m < ms.moments(); ++m) r.moments[m] = r.sdp.y[Eigen::Index(m - 1)];
  return r;
}

BellMax max_chsh(int level) {
  Scenario sc = Scenario::binary(2);
  std::vector<double> c(16, 0.0);
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          if ((x ^ y) == (u & v)) {
            int uu[2] = {u, v}, xx[2] = {x, y};
            c[sc.index(uu, xx)] = 0.25;
          }
  return max_bell_value(sc, level, c);
}

Eigen::MatrixXd tsirelson_moment_matrix(const MomentStructure& ms) {
  if (!ms.scenario().is_bipartite_binary()) fail(ErrorKind::Shape, "Tsirelson construction is bipartite binary");
  Eigen::Matrix2d I = Eigen::Matrix2d::Identity(), Z, X;
  Z << 1, 0, 0, -1;
  X << 0, 1, 1, 0;
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2d obs[2][2] = {{Z, X}, {s * (Z + X), s * (Z - X)}};
  auto kron = [](const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
    Eigen::Matrix4d r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return r;
  };
  Eigen::Vector4d psi(s, 0, 0, s);
  std::vector<Eigen::Matrix4d> ops;
  for (const auto& w : ms.words()) {
    Eigen::Matrix4d O = Eigen::Matrix4d::Identity();
    for (const auto& g : w) {
      Eigen::Matrix2d proj = 0.5 * (I + (g.output == 0 ? 1.0 : -1.0) * obs[g.party][g.input]);
      O = O * (g.party == 0 ? kron(proj, I) : kron(I, proj));
    }
    ops.push_back(O);
  }
  const std::size_t n = ms.dim();
  Eigen::MatrixXd G(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = psi.dot(ops[i].transpose() * ops[j] * psi);
  return G;
}

// ---------------------------------------------------------------- certificates

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

std::vector<double> kron(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i * b.size() + j] = a[i] * b[j];
  return r;
}

// <G_tuple, M> for every moment tuple, one pass over M
std::vector<double> moment_sums(const MomentCertificate& c, const Eigen::MatrixXd& M) {
  const std::size_t nf = c.factors.size();
  std::vector<std::size_t> dims(nf), moms(nf);
  std::size_t D = 1;
  for (std::size_t k = 0; k < nf; ++k) {
    dims[k] = c.factors[k]->dim();
    moms[k] = c.factors[k]->moments();
    D *= dims[k];
  }
  if (std::size_t(M.rows()) != D) fail(ErrorKind::Shape, "certificate block has the wrong dimension");
  std::vector<double> out(c.moment_tuples(), 0.0);
  std::vector<std::size_t> ri(nf), ci(nf);
  for (std::size_t R = 0; R < D; ++R) {
    std::size_t t = R;
    for (std::size_t k = nf; k-- > 0;) {
      ri[k] = t % dims[k];
      t /= dims[k];
    }
    for (std::size_t Cc = 0; Cc < D; ++Cc) {
      std::size_t s = Cc;
      for (std::size_t k = nf; k-- > 0;) {
        ci[k] = s % dims[k];
        s /= dims[k];
      }
      std::size_t tuple = 0;
      bool zero = false;
      for (std::size_t k = 0; k < nf; ++k) {
        int m = c.factors[k]->moment(ri[k], ci[k]);
        if (m < 0) {
          zero = true;
          break;
        }
        tuple = tuple * moms[k] + std::size_t(m);
      }
      if (!zero) out[tuple] += M(Eigen::Index(R), Eigen::Index(Cc));
    }
  }
  return out;
}

// (T_1 x ... x T_n)^T lambda by mode products
std::vector<double> injected_moments(const MomentCertificate& c) {
  const std::size_t nf = c.factors.size();
  std::vector<std::size_t> dims(nf);
  for (std::size_t k = 0; k < nf; ++k) dims[k] = c.factors[k]->scenario().size();
  std::vector<double> t = c.lambda;
  for (std::size_t k = 0; k < nf; ++k) {
    const Eigen::MatrixXd& T = c.factors[k]->injection();
    std::size_t pre = 1, post = 1;
    for (std::size_t j = 0; j < k; ++j) pre *= dims[j];
    for (std::size_t j = k + 1; j < nf; ++j) post *= dims[j];
    const std::size_t I = std::size_t(T.rows()), O = std::size_t(T.cols());
    std::vector<double> out(pre * O * post, 0.0);
    for (std::size_t p = 0; p < pre; ++p)
      for (std::size_t i = 0; i < I; ++i)
        for (std::size_t o = 0; o < O; ++o) {
          double v = T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o));
          if (v == 0.0) continue;
          for (std::size_t q = 0; q < post; ++q) out[(p * O + o) * post + q] += v * t[(p * I + i) * post + q];
        }
    t.swap(out);
    dims[k] = O;
  }
  return t;
}

std::vector<double> lambda_from_nu(const MomentStructure& ms, const std::vector<double>& nu) {
  std::vector<int> obs;
  for (std::size_t m = 0; m < ms.moments(); ++m)
    if (ms.observable(m)) obs.push_back(int(m));
  Eigen::MatrixXd To(ms.injection().rows(), Eigen::Index(obs.size()));
  Eigen::VectorXd no(Eigen::Index(obs.size()));
  for (std::size_t k = 0; k < obs.size(); ++k) {
    To.col(static_cast<Eigen::Index>(k)) = ms.injection().col(obs[k]);
    no[static_cast<Eigen::Index>(k)] = nu[obs[k]];
  }
  Eigen::VectorXd lam = To * (To.transpose() * To).ldlt().solve(no);
  return std::vector<double>(lam.data(), lam.data() + lam.size());
}

}  // namespace

std::size_t MomentCertificate::moment_tuples() const {
  std::size_t r = 1;
  for (const auto& f : factors) r *= f->moments();
  return r;
}

Scenario MomentCertificate::joint_scenario() const {
  Scenario s = factors.at(0)->scenario();
  for (std::size_t k = 1; k < factors.size(); ++k) s = s.concat(factors[k]->scenario());
  return s;
}

MomentCheck verify_moment_certificate(const MomentCertificate& c, double tol) {
  if (c.factors.empty()) fail(ErrorKind::Structural, "certificate has no factors");
  MomentCheck r;
  const std::size_t nt = c.moment_tuples();
  if (c.nu.size() != nt) fail(ErrorKind::Shape, "nu length does not match the moment tuples");
  if (c.lambda.size() != c.joint_scenario().size()) fail(ErrorKind::Shape, "lambda length does not match the cells");
  double res = 0.0;
  std::string why;
  auto upd = [&](double v, const char* m) {
    if (v > res) {
      res = v;
      why = m;
    }
  };
  if (c.kind == MomentCertificate::Kind::Guess) {
    if (c.X.size() != c.B.size()) fail(ErrorKind::Shape, "one objective matrix per block is required");
    for (std::size_t z = 0; z < c.X.size(); ++z) {
      auto sx = moment_sums(c, c.X[z]);
      auto sb = moment_sums(c, c.B[z]);
      for (std::size_t t = 0; t < nt; ++t) upd(std::abs(sx[t] + sb[t] - c.nu[t]), "block moments differ from nu");
    }
  } else {
    if (c.X.size() != 2 || c.B.size() != 1) fail(ErrorKind::Shape, "XOR certificate needs two blocks");
    auto sd = moment_sums(c, c.X[0] - c.X[1]);
    auto ss = moment_sums(c, c.X[0] + c.X[1]);
    auto sb = moment_sums(c, c.B[0]);
    for (std::size_t t = 0; t < nt; ++t) {
      upd(std::abs(sd[t] - sb[t]), "difference block misses the objective");
      upd(std::abs(ss[t] - c.nu[t]), "sum block moments differ from nu");
    }
  }
  auto tl = injected_moments(c);
  for (std::size_t t = 0; t < nt; ++t) upd(std::abs(tl[t] - c.nu[t]), "lambda does not inject to nu");
  r.min_eig = INFINITY;
  for (const auto& X : c.X) r.min_eig = std::min(r.min_eig, min_eigenvalue(Eigen::MatrixXd(0.5 * (X + X.transpose()))));
  r.residual = res;
  r.ok = res <= tol && r.min_eig >= -tol;
  r.message = r.ok ? "feasible" : (res > tol ? why : "block not positive semidefinite");
  return r;
}

double certificate_bound(const MomentCertificate& c, const System& joint) {
  if (joint.size() != c.lambda.size()) fail(ErrorKind::Shape, "system does not match the certificate");
  double s = 0.0;
  for (std::size_t i = 0; i < joint.size(); ++i) s += joint[i] * c.lambda[i];
  return c.kind == MomentCertificate::Kind::Xor ? 0.5 * s : s;
}

MomentCertificate tensor_moment_dual(const MomentCertificate& a, const MomentCertificate& b) {
  if (a.kind != b.kind) fail(ErrorKind::Shape, "cannot tensor guessing and XOR certificates");
  MomentCertificate c;
  c.kind = a.kind;
  c.factors = a.factors;
  c.factors.insert(c.factors.end(), b.factors.begin(), b.factors.end());
  c.nu = kron(a.nu, b.nu);
  c.lambda = kron(a.lambda, b.lambda);
  if (a.kind == MomentCertificate::Kind::Guess) {
    for (std::size_t z1 = 0; z1 < a.X.size(); ++z1)
      for (std::size_t z2 = 0; z2 < b.X.size(); ++z2) {
        c.X.push_back(kron(a.X[z1], b.X[z2]) + kron(a.X[z1], b.B[z2]) + kron(a.B[z1], b.X[z2]));
        c.B.push_back(kron(a.B[z1], b.B[z2]));
      }
  } else {
    c.X.push_back(kron(a.X[0], b.X[0]) + kron(a.X[1], b.X[1]));
    c.X.push_back(kron(a.X[0], b.X[1]) + kron(a.X[1], b.X[0]));
    c.B.push_back(kron(a.B[0], b.B[0]));
  }
  return c;
}

MomentCertificate trivial_moment_certificate() {
  auto ms = std::make_shared<const MomentStructure>(Scenario({1}, {1}), 1);
  MomentCertificate c;
  c.kind = MomentCertificate::Kind::Guess;
  c.factors = {ms};
  c.X = {Eigen::MatrixXd::Zero(1, 1)};
  c.B = {Eigen::MatrixXd::Ones(1, 1)};
  c.nu = {1.0};
  c.lambda = {1.0};
  return c;
}

// ---------------------------------------------------------------- programs

QuantumCheck quantum_membership(const System& observed, int level, double tol) {
  QuantumCheck q;
  NsReport ns = is_nonsignalling(observed, 1e-8, 1);
  if (!ns.ok) {
    q.margin = -ns.worst;
    return q;
  }
  MomentStructure ms(observed.scenario(), level);
  auto mu = ms.observed_moments(observed);
  SdpProblem p;
  p.blocks = {int(ms.dim())};
  for (std::size_t m = 0; m < ms.moments(); ++m) {
    if (ms.observable(m)) append(p.C, pattern_entries(ms, m, 0, mu[m]));
    else {
      p.A.push_back(pattern_entries(ms, m, 0, -1.0));
      p.b.push_back(0.0);
    }
  }
  std::vector<SdpEntry> id;
  for (int i = 0; i < int(ms.dim()); ++i) id.push_back({0, i, i, 1.0});
  p.A.push_back(id);
  p.b.push_back(1.0);
  SdpSolution s = sdp_solve(p);
  if (s.status != SdpStatus::Optimal && s.status != SdpStatus::IterationLimit)
    fail(ErrorKind::Solver, std::string("membership SDP: ") + to_string(s.status));
  q.margin = s.dual_value;
  q.quantum = q.margin >= -tol;
  return q;
}

GuessResult guessing_probability_sdp(const System& observed, const std::vector<int>& fmap, int level,
                                     int key_input) {
  const auto& sc = observed.scenario();
  if (key_input < 0 || key_input >= sc.inputs(0)) fail(ErrorKind::Domain, "key input out of range");
  std::vector<int> f = fmap;
  if (f.empty())
    for (int x = 0; x < sc.outputs(0); ++x) f.push_back(x);
  if (f.size() != std::size_t(sc.outputs(0))) fail(ErrorKind::Shape, "guess map must cover the first party's outputs");
  int F = 0;
  for (int z : f) {
    if (z < 0) fail(ErrorKind::Domain, "guess classes must be non-negative");
    F = std::max(F, z + 1);
  }
  require_nonsignalling(observed);
  auto ms = std::make_shared<const MomentStructure>(sc, level);
  if (sc.parties() > 1 || sc.output_combos() > 1) {
    QuantumCheck qc = quantum_membership(observed, level);
    if (!qc.quantum)
      fail(ErrorKind::NotQuantum, "observed behaviour lies outside NPA level " + std::to_string(level) +
                                      " (margin " + std::to_string(qc.margin) + ")");
  }
  auto mu = ms->observed_moments(observed);
  const std::size_t n = ms->dim(), M = ms->moments();

  std::vector<Eigen::MatrixXd> B(F, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  for (int x = 0; x < sc.outputs(0); ++x) {
    Eigen::VectorXd v = ms->projector_vector(0, key_input, x);
    B[f[x]] += v * v.transpose();
  }
  std::vector<std::vector<double>> beta(F, std::vector<double>(M));
  for (int z = 0; z < F; ++z)
    for (std::size_t m = 0; m < M; ++m) beta[z][m] = pattern_inner(*ms, m, B[z]);

  SdpProblem p;
  p.blocks.assign(F, int(n));
  const int last = F - 1;
  for (std::size_t m = 0; m < M; ++m)
    if (ms->observable(m)) append(p.C, pattern_entries(*ms, m, last, mu[m]));
  for (int z = 0; z < last; ++z)
    for (std::size_t m = 0; m < M; ++m) {
      auto e = pattern_entries(*ms, m, z, -1.0);
      double bb = beta[z][m];
      if (ms->observable(m)) {
        append(e, pattern_entries(*ms, m, last, 1.0));
        bb -= beta[last][m];
      }
      p.A.push_back(e);
      p.b.push_back(bb);
    }
  for (std::size_t m = 0; m < M; ++m)
    if (!ms->observable(m)) {
      p.A.push_back(pattern_entries(*ms, m, last, -1.0));
      p.b.push_back(beta[last][m]);
    }
  for (std::size_t m = 0; m < M; ++m)
    if (ms->observable(m)) p.offset += mu[m] * beta[last][m];

  GuessResult r;
  r.sdp = solve_moment_program(p, "guessing SDP", r.reduced_accuracy);
  r.value = r.sdp.primal_value;
  r.lower = r.sdp.dual_value;

  MomentCertificate& c = r.certificate;
  c.kind = MomentCertificate::Kind::Guess;
  c.factors = {ms};
  c.X = r.sdp.X;
  c.B = B;
  c.nu.assign(M, 0.0);
  for (std::size_t m = 0; m < M; ++m)
    if (ms->observable(m)) {
      double s = 0.0;
      for (int z = 0; z < F; ++z) s += pattern_inner(*ms, m, c.X[z]) + beta[z][m];
      c.nu[m] = s / F;
    }
  c.lambda = lambda_from_nu(*ms, c.nu);
  r.bound = certificate_bound(c, observed);
  return r;
}

GuessResult guessing_probability_sdp(const System& observed, const BitFunction& f, int level, int key_input) {
  const int X = observed.scenario().outputs(0);
  if (f.domain() != std::size_t(X)) fail(ErrorKind::Shape, "bit function domain does not match the first party's outputs");
  std::vector<int> map(X);
  for (int x = 0; x < X; ++x) map[x] = f.eval(std::uint64_t(x));
  return guessing_probability_sdp(observed, map, level, key_input);
}

BitDistanceResult bit_distance_sdp(const System& observed, const BitFunction& f, int level, int key_input) {
  const auto& sc = observed.scenario();
  if (key_input < 0 || key_input >= sc.inputs(0)) fail(ErrorKind::Domain, "key input out of range");
  if (f.domain() != std::size_t(sc.outputs(0)))
    fail(ErrorKind::Shape, "bit function domain does not match the first party's outputs");
  require_nonsignalling(observed);
  QuantumCheck qc = quantum_membership(observed, level);
  if (!qc.quantum)
    fail(ErrorKind::NotQuantum, "observed behaviour lies outside NPA level " + std::to_string(level) +
                                    " (margin " + std::to_string(qc.margin) + ")");
  auto ms = std::make_shared<const MomentStructure>(sc, level);
  auto mu = ms->observed_moments(observed);
  const std::size_t n = ms->dim(), M = ms->moments();
  Eigen::MatrixXd Bd = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (int x = 0; x < sc.outputs(0); ++x) {
    Eigen::VectorXd v = ms->projector_vector(0, key_input, x);
    Bd += (f.eval(std::uint64_t(x)) ? -1.0 : 1.0) * v * v.transpose();
  }
  SdpProblem p;
  p.blocks = {int(n), int(n)};
  for (std::size_t m = 0; m < M; ++m)
    if (ms->observable(m)) {
      append(p.C, pattern_entries(*ms, m, 0, mu[m]));
      append(p.C, pattern_entries(*ms, m, 1, mu[m]));
    }
  // Gamma_d moments: block 0 holds Gamma_g - Gamma_d, block 1 Gamma_g + Gamma_d
  for (std::size_t m = 0; m < M; ++m) {
    auto e = pattern_entries(*ms, m, 0, 1.0);
    append(e, pattern_entries(*ms, m, 1, -1.0));
    p.A.push_back(e);
    p.b.push_back(pattern_inner(*ms, m, Bd));
  }
  for (std::size_t m = 0; m < M; ++m)
    if (!ms->observable(m)) {
      auto e = pattern_entries(*ms, m, 0, -1.0);
      append(e, pattern_entries(*ms, m, 1, -1.0));
      p.A.push_back(e);
      p.b.push_back(0.0);
    }
  BitDistanceResult r;
  r.sdp = solve_moment_program(p, "bit-distance SDP", r.reduced_accuracy);
  r.distance = 0.5 * r.sdp.primal_value;
  r.lower = 0.5 * r.sdp.dual_value;
  MomentCertificate& c = r.certificate;
  c.kind = MomentCertificate::Kind::Xor;
  c.factors = {ms};
  c.X = r.sdp.X;
  c.B = {Bd};
  c.nu.assign(M, 0.0);
  for (std::size_t m = 0; m < M; ++m)
    if (ms->observable(m)) c.nu[m] = pattern_inner(*ms, m, c.X[0] + c.X[1]);
  c.lambda = lambda_from_nu(*ms, c.nu);
  r.bound = certificate_bound(c, observed);
  return r;
}

}  // namespace nlst

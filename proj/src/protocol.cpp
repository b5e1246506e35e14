#include "nlst/protocol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "json.hpp"

#include "nlst/error.hpp"
#include "nlst/npa.hpp"
#include "nlst/nsattack.hpp"

namespace nlst {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log2(e^(-x))
double log2_exp_neg(double x) { return -x / kLn2; }

bool is_prob(double v) { return v >= 0.0 && v <= 1.0; }

double bit_error_entropy(double d) { return binary_entropy(std::min(d, 0.5)); }

}  // namespace

double binary_entropy(double p) {
  if (!is_prob(p)) fail(ErrorKind::Domain, "binary_entropy: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double chernoff_bound(double n, double eps) {
  if (!(n >= 0.0) || !(eps >= 0.0)) fail(ErrorKind::Domain, "chernoff_bound: n and eps must be >= 0");
  return std::exp(-2.0 * n * eps * eps);
}

double sampling_bound(double k, double z, double eps) {
  if (!(k >= 0.0) || !(z >= 1.0) || !(eps >= 0.0))
    fail(ErrorKind::Domain, "sampling_bound: need k >= 0, |Z| >= 1, eps >= 0");
  return z * std::exp(-k * eps * eps / (8.0 * z));
}

double log2_sum(const std::vector<double>& t) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : t) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : t) acc += std::exp2(v - hi);
  return hi + std::log2(acc);
}

double log2_ir_failure_bound(std::size_t n, double delta_prime, std::size_t m) {
  if (!is_prob(delta_prime)) fail(ErrorKind::Domain, "ir bound: delta' must lie in [0, 1]");
  return double(n) * binary_entropy(delta_prime) - double(m);
}

double ir_failure_bound(std::size_t n, double delta_prime, std::size_t m) {
  return std::exp2(log2_ir_failure_bound(n, delta_prime, m));
}

double log2_brassard_salvail_bound(std::size_t n, double delta, double kappa, std::size_t m) {
  if (!is_prob(delta) || !(kappa > 0.0))
    fail(ErrorKind::Domain, "reconciliation bound: need delta in [0, 1] and kappa > 0");
  // beyond 1/2 the entropy term is already >= 2^(n-m); keep h monotone
  return log2_sum({log2_exp_neg(2.0 * kappa * kappa * double(n)),
                   double(n) * bit_error_entropy(delta + kappa) - double(m)});
}

double brassard_salvail_bound(std::size_t n, double delta, double kappa, std::size_t m) {
  return std::exp2(log2_brassard_salvail_bound(n, delta, kappa, m));
}

std::vector<double> log2_pa_distance_terms(std::size_t n, std::size_t s, double eps,
                                           double eta_tilde, std::size_t uv, double lambda_max) {
  if (!(eps >= 0.0) || !(eta_tilde >= 0.0) || uv == 0 || !(lambda_max > 0.0))
    fail(ErrorKind::Domain, "pa bound: need eps, eta~ >= 0, |U||V| >= 1, lambda_max > 0");
  const double nn = double(n), ss = double(s);
  const double a = eta_tilde / (double(uv) * lambda_max);
  return {ss - 1.0 + nn * std::log2((1.0 + eps + eta_tilde) / 2.0),
          ss + log2_exp_neg(nn / 8.0),
          ss + log2_exp_neg(nn / 64.0 * a * a)};
}

double log2_pa_distance_bound(std::size_t n, std::size_t s, double eps, double eta_tilde,
                              std::size_t uv, double lambda_max) {
  return log2_sum(log2_pa_distance_terms(n, s, eps, eta_tilde, uv, lambda_max));
}

double pa_distance_bound(std::size_t n, std::size_t s, double eps, double eta_tilde,
                         std::size_t uv, double lambda_max) {
  return std::exp2(log2_pa_distance_bound(n, s, eps, eta_tilde, uv, lambda_max));
}

double log2_quantum_pa_bound(std::size_t n, std::size_t s, std::size_t m, double pguess, int dim) {
  if (!(pguess > 0.0 && pguess <= 1.0) || dim < 1)
    fail(ErrorKind::Domain, "quantum pa bound: need pguess in (0, 1] and d >= 1");
  const double hmin = double(n) * -std::log2(pguess);
  return double(dim * dim - 1) * std::log2(double(n) + 1.0) -
         0.5 * (hmin - double(m) - double(s));
}

double ns_key_rate(double eps_cert, double delta) {
  if (!(eps_cert >= 0.0)) fail(ErrorKind::Domain, "ns_key_rate: eps must be >= 0");
  if (!(delta >= 0.0 && delta <= 0.5)) fail(ErrorKind::Domain, "ns_key_rate: delta must lie in [0, 1/2]");
  return 1.0 - binary_entropy(delta) - std::log2(1.0 + eps_cert);
}

double ns_certificate_value(double rho) {
  if (!is_prob(rho)) fail(ErrorKind::Domain, "noise parameter must lie in [0, 1]");
  return 2.0 - std::sqrt(2.0) + std::sqrt(2.0) * rho;
}

double ns_key_rate_curve(double rho) {
  if (!(rho >= 0.0 && rho <= 0.5)) fail(ErrorKind::Domain, "ns_key_rate_curve: rho must lie in [0, 1/2]");
  return ns_key_rate(ns_certificate_value(rho), rho);
}

double ns_key_rate_zero() {
  double lo = 1e-6, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (ns_key_rate_curve(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double q_key_rate(double pguess, double delta) {
  if (!(pguess >= 0.5 && pguess <= 1.0)) fail(ErrorKind::Domain, "q_key_rate: pguess must lie in [1/2, 1]");
  if (!(delta >= 0.0 && delta <= 0.5)) fail(ErrorKind::Domain, "q_key_rate: delta must lie in [0, 1/2]");
  return -std::log2(pguess) - binary_entropy(delta);
}

QuantumRatePoint q_key_rate_curve(double rho, int level) {
  if (!(rho >= 0.0 && rho <= 0.5)) fail(ErrorKind::Domain, "q_key_rate_curve: rho must lie in [0, 1/2]");
  GuessResult g = guessing_probability_sdp(noisy_singlet_system(rho), std::vector<int>{}, level, 0);
  QuantumRatePoint q;
  q.rho = rho;
  // the solver's value can sit a hair outside [1/2, 1]
  q.pguess = std::clamp(g.value, 0.5, 1.0);
  q.rate = q_key_rate(q.pguess, rho);
  q.reduced_accuracy = g.reduced_accuracy;
  return q;
}

const char* to_string(Adversary a) {
  return a == Adversary::NonSignalling ? "non-signalling" : "quantum";
}

void ProtocolParams::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) fail(ErrorKind::Domain, std::string("protocol parameters: ") + what);
  };
  need(n > 0, "n must be positive");
  need(k > 0.0 && k < 1.0, "k must lie in (0, 1)");
  need(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
  need(eps >= 0.0, "eps must be >= 0");
  need(pguess >= 0.5 && pguess <= 1.0, "pguess must lie in [1/2, 1]");
  need(delta >= 0.0 && delta <= 0.5, "delta must lie in [0, 1/2]");
  need(eta > 0.0 && eta_bar > 0.0 && eta_tilde >= 0.0, "slacks must be positive");
  need(kappa > 0.0, "kappa must be positive");
  need(lambda_max > 0.0, "lambda_max must be positive");
  need(key_u >= 0 && key_v >= 0, "key inputs must be >= 0");
  need(auto_lengths || s + m <= n, "s + m must not exceed n");
  need(postselection_dim >= 1, "postselection dimension must be >= 1");
}

double PeBounds::eps1() const { return std::exp2(log2_eps1); }
double PeBounds::eps2() const { return std::exp2(log2_eps2); }
double PeBounds::eps_prime() const { return std::exp2(log2_eps_prime); }

namespace {

std::vector<double> yield_terms(const ProtocolParams& pp, double uv) {
  const double n = double(pp.n);
  const double a = (1.0 - pp.p) * (1.0 - pp.k) * (1.0 - pp.k);
  const double b = (1.0 - pp.p) * pp.k * pp.k / uv;
  return {log2_exp_neg(2.0 * n * a * a), std::log2(uv) + log2_exp_neg(2.0 * n * b * b)};
}

}  // namespace

PeBounds ns_pe_bounds(const ProtocolParams& pp, std::size_t u_count, std::size_t v_count) {
  pp.validate();
  const double uv = double(u_count * v_count);
  const double t = pp.k * pp.k * pp.p * double(pp.n);
  const double tp = t / uv;
  const double kp = (1.0 - pp.k) * (1.0 - pp.k) * pp.p * double(pp.n);
  const double a = pp.eta / (uv * pp.lambda_max);
  const double abar = pp.eta_bar / (uv * pp.lambda_max);
  const double first = 1.0 + log2_exp_neg(t / 16.0 * a * a);
  const double second = 1.0 + log2_exp_neg(kp / 16.0 * abar * abar);
  const double err_t = 1.0 + log2_exp_neg(tp / 16.0 * pp.eta * pp.eta);
  const double err_k = 1.0 + log2_exp_neg(kp / 16.0 * pp.eta_bar * pp.eta_bar);
  PeBounds b;
  b.log2_eps1 = log2_sum({first, second});
  b.log2_eps2 = log2_sum({err_t, err_k});
  std::vector<double> robust = {first, err_t};
  for (double v : yield_terms(pp, uv)) robust.push_back(v);
  b.log2_eps_prime = log2_sum(robust);
  return b;
}

PeBounds quantum_pe_bounds(const ProtocolParams& pp, std::size_t u_count, std::size_t v_count,
                           std::size_t x_count, std::size_t y_count) {
  pp.validate();
  const double uv = double(u_count * v_count);
  const double xy = double(x_count * y_count);
  const double tp = pp.k * pp.k * pp.p * double(pp.n) / uv;
  PeBounds b;
  b.log2_eps1 = std::log2(xy * uv) + log2_exp_neg(tp * pp.eta * pp.eta / (8.0 * xy));
  b.log2_eps2 = -std::numeric_limits<double>::infinity();
  std::vector<double> robust = {b.log2_eps1};
  for (double v : yield_terms(pp, uv)) robust.push_back(v);
  b.log2_eps_prime = log2_sum(robust);
  return b;
}

namespace {

struct Layout {
  int nu, nx, nv, ny;
};

Layout bipartite_layout(const Scenario& sc) {
  if (sc.parties() != 2) fail(ErrorKind::Shape, "protocol: the source must be bipartite");
  return {sc.inputs(0), sc.outputs(0), sc.inputs(1), sc.outputs(1)};
}

void check_key_inputs(const ProtocolParams& pp, const Layout& l) {
  if (pp.key_u >= l.nu || pp.key_v >= l.nv)
    fail(ErrorKind::Domain, "protocol: key inputs are outside the source alphabets");
}

std::size_t cell(const Scenario& sc, int u, int x, int v, int y) {
  const int in[2] = {u, v};
  const int out[2] = {x, y};
  return sc.index(in, out);
}

}  // namespace

PeOutcome parameter_estimation(const Frequencies& f, const ProtocolParams& pp,
                               const std::vector<double>& lambda, Adversary adv) {
  pp.validate();
  const Layout l = bipartite_layout(f.scenario);
  check_key_inputs(pp, l);
  const std::size_t uv = std::size_t(l.nu) * std::size_t(l.nv);
  if (f.test_counts.size() != f.scenario.size() || f.input_counts.size() != uv)
    fail(ErrorKind::Structural, "parameter_estimation: count vectors do not match the scenario");
  if (lambda.size() != f.scenario.size())
    fail(ErrorKind::Shape, "parameter_estimation: certificate length does not match the scenario");
  if (f.n != pp.n) fail(ErrorKind::Structural, "parameter_estimation: round count differs from n");
  std::size_t sum = 0;
  for (auto c : f.test_counts) sum += c;
  std::size_t in_sum = 0;
  for (auto c : f.input_counts) in_sum += c;
  if (sum != f.tests || in_sum != f.tests || f.tests + f.key_rounds > f.n ||
      f.key_errors > f.key_rounds)
    fail(ErrorKind::Structural, "parameter_estimation: inconsistent counts");

  PeOutcome o;
  const double n = double(pp.n);
  o.abort_key_yield = double(f.key_rounds) < (1.0 - pp.k) * (1.0 - pp.k) * pp.p * n;
  const double floor_uv = pp.k * pp.k * pp.p * n / double(uv);
  for (auto c : f.input_counts)
    if (double(c) < floor_uv) o.abort_test_yield = true;

  if (f.tests > 0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) acc += lambda[i] * double(f.test_counts[i]);
    o.certificate_estimate = double(uv) * acc / double(f.tests);
  }
  const std::size_t key_pair = std::size_t(pp.key_u) * std::size_t(l.nv) + std::size_t(pp.key_v);
  if (f.input_counts[key_pair] > 0) {
    std::size_t err = 0;
    for (int x = 0; x < l.nx; ++x)
      for (int y = 0; y < l.ny; ++y)
        if (x != y) err += f.test_counts[cell(f.scenario, pp.key_u, x, pp.key_v, y)];
    o.delta_estimate = double(err) / double(f.input_counts[key_pair]);
  } else {
    o.delta_estimate = 1.0;
  }
  const double threshold = adv == Adversary::NonSignalling ? pp.eps : pp.pguess;
  o.abort_certificate = f.tests == 0 || o.certificate_estimate >= threshold;
  o.abort_error_rate = o.delta_estimate >= pp.delta;
  o.accepted = !(o.abort_key_yield || o.abort_test_yield || o.abort_certificate || o.abort_error_rate);
  o.bounds = adv == Adversary::NonSignalling
                 ? ns_pe_bounds(pp, std::size_t(l.nu), std::size_t(l.nv))
                 : quantum_pe_bounds(pp, std::size_t(l.nu), std::size_t(l.nv), std::size_t(l.nx),
                                     std::size_t(l.ny));
  return o;
}

Frequencies sample_frequencies(const System& source, const ProtocolParams& pp, Rng& rng) {
  pp.validate();
  const Scenario& sc = source.scenario();
  const Layout l = bipartite_layout(sc);
  check_key_inputs(pp, l);
  const double uv = double(l.nu) * double(l.nv);

  // categories: key cells (x, y), test cells in table order, discarded rounds
  std::vector<double> prob;
  const double kk = (1.0 - pp.k) * (1.0 - pp.k);
  for (int x = 0; x < l.nx; ++x)
    for (int y = 0; y < l.ny; ++y)
      prob.push_back(kk * source[cell(sc, pp.key_u, x, pp.key_v, y)]);
  for (std::size_t i = 0; i < sc.size(); ++i) prob.push_back(pp.k * pp.k / uv * source[i]);
  prob.push_back(2.0 * pp.k * (1.0 - pp.k));

  std::vector<std::size_t> counts(prob.size(), 0);
  long long left = static_cast<long long>(pp.n);
  double mass = 0.0;
  for (double q : prob) mass += q;
  for (std::size_t c = 0; c + 1 < prob.size() && left > 0; ++c) {
    double q = mass > 0.0 ? std::clamp(prob[c] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<long long> b(left, q);
    long long draw = b(rng);
    counts[c] = static_cast<std::size_t>(draw);
    left -= draw;
    mass -= prob[c];
  }

  Frequencies f;
  f.scenario = sc;
  f.n = pp.n;
  f.test_counts.assign(sc.size(), 0);
  f.input_counts.assign(std::size_t(uv), 0);
  std::size_t c = 0;
  for (int x = 0; x < l.nx; ++x)
    for (int y = 0; y < l.ny; ++y, ++c) {
      f.key_rounds += counts[c];
      if (x != y) f.key_errors += counts[c];
    }
  for (std::size_t i = 0; i < sc.size(); ++i, ++c) {
    f.test_counts[i] = counts[c];
    f.tests += counts[c];
    int u[2], x[2];
    sc.decode(i, u, x);
    f.input_counts[std::size_t(u[0]) * std::size_t(l.nv) + std::size_t(u[1])] += counts[c];
  }
  return f;
}

System ekert_system(double rho) {
  const System singlet = noisy_singlet_system(rho);
  const Scenario sc = Scenario::bipartite(2, 2, 3, 2);
  std::vector<double> t(sc.size(), 0.0);
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 3; ++v)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          double q;
          if (v < 2)
            q = singlet.at({u, v}, {x, y});
          else if (u == 0)
            q = (1.0 - rho) * (x == y ? 0.5 : 0.0) + rho / 4.0;
          else
            q = 0.25;
          t[cell(sc, u, x, v, y)] = q;
        }
  return System(sc, std::move(t));
}

std::vector<double> embed_weights(const Scenario& from, const std::vector<double>& w,
                                  const Scenario& to) {
  if (w.size() != from.size()) fail(ErrorKind::Shape, "embed_weights: weight length mismatch");
  if (from.parties() != to.parties()) fail(ErrorKind::Shape, "embed_weights: party counts differ");
  for (std::size_t i = 0; i < from.parties(); ++i)
    if (from.inputs(i) > to.inputs(i) || from.outputs(i) > to.outputs(i))
      fail(ErrorKind::Shape, "embed_weights: source alphabets do not fit the target");
  std::vector<double> out(to.size(), 0.0);
  std::vector<int> u(from.parties()), x(from.parties());
  for (std::size_t i = 0; i < from.size(); ++i) {
    from.decode(i, u.data(), x.data());
    out[to.index(u, x)] = w[i];
  }
  return out;
}

std::vector<double> lambda1_star_weights() {
  return dual_event_decomposition(lambda1_star()).weights;
}

std::vector<double> ekert_ns_certificate() {
  return embed_weights(Scenario::binary(2), lambda1_star_weights(), Scenario::bipartite(2, 2, 3, 2));
}

namespace {

Frequencies frequencies_from_transcript(const Transcript& tr) {
  const Scenario& sc = tr.scenario;
  const Layout l = bipartite_layout(sc);
  Frequencies f;
  f.scenario = sc;
  f.n = tr.u.size();
  f.test_counts.assign(sc.size(), 0);
  f.input_counts.assign(std::size_t(l.nu) * std::size_t(l.nv), 0);
  for (std::size_t i : tr.test_indices) {
    ++f.test_counts[cell(sc, tr.u[i], tr.x[i], tr.v[i], tr.y[i])];
    ++f.input_counts[std::size_t(tr.u[i]) * std::size_t(l.nv) + tr.v[i]];
    ++f.tests;
  }
  for (std::size_t i : tr.key_indices) {
    ++f.key_rounds;
    if (tr.x[i] != tr.y[i]) ++f.key_errors;
  }
  return f;
}

std::string abort_reason(const PeOutcome& o) {
  std::string s;
  auto add = [&](bool flag, const char* what) {
    if (!flag) return;
    if (!s.empty()) s += ", ";
    s += what;
  };
  add(o.abort_key_yield, "key yield");
  add(o.abort_test_yield, "test yield");
  add(o.abort_certificate, "certificate");
  add(o.abort_error_rate, "error rate");
  return s;
}

std::size_t clamp_length(double v, std::size_t hi) {
  if (!(v > 0.0)) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(std::floor(v)), hi);
}

}  // namespace

SimulationResult simulate(const ProtocolParams& pp, const System& source, Adversary adv,
                          const std::vector<double>& lambda, std::uint64_t seed) {
  pp.validate();
  const Scenario& sc = source.scenario();
  const Layout l = bipartite_layout(sc);
  check_key_inputs(pp, l);
  if (l.nx != 2 || l.ny != 2) fail(ErrorKind::Shape, "simulate: key bits need binary outputs");
  if (l.nu > 256 || l.nv > 256) fail(ErrorKind::Size, "simulate: at most 256 inputs per party");
  if (lambda.size() != sc.size()) fail(ErrorKind::Shape, "simulate: certificate length mismatch");

  SimulationResult res;
  Transcript& tr = res.transcript;
  tr.params = pp;
  tr.seed = seed;
  tr.adversary = adv;
  tr.scenario = sc;
  const std::size_t n = pp.n;
  tr.u.resize(n);
  tr.v.resize(n);
  tr.x.resize(n);
  tr.y.resize(n);
  tr.alice_test.resize(n);
  tr.bob_test.resize(n);

  // cumulative output distribution per input pair, outputs in (x, y) order
  std::vector<std::array<double, 4>> cdf(std::size_t(l.nu) * std::size_t(l.nv));
  for (int u = 0; u < l.nu; ++u)
    for (int v = 0; v < l.nv; ++v) {
      auto& c = cdf[std::size_t(u) * std::size_t(l.nv) + std::size_t(v)];
      double acc = 0.0;
      for (int j = 0; j < 4; ++j) {
        acc += source[cell(sc, u, j >> 1, v, j & 1)];
        c[std::size_t(j)] = acc;
      }
    }

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_u(0, l.nu - 1), pick_v(0, l.nv - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const bool at = unit(rng) < pp.k;
    const bool bt = unit(rng) < pp.k;
    const int u = at ? pick_u(rng) : pp.key_u;
    const int v = bt ? pick_v(rng) : pp.key_v;
    const auto& c = cdf[std::size_t(u) * std::size_t(l.nv) + std::size_t(v)];
    const double r = unit(rng) * c[3];
    int j = 0;
    while (j < 3 && r >= c[std::size_t(j)]) ++j;
    tr.u[i] = static_cast<std::uint8_t>(u);
    tr.v[i] = static_cast<std::uint8_t>(v);
    tr.x[i] = static_cast<std::uint8_t>(j >> 1);
    tr.y[i] = static_cast<std::uint8_t>(j & 1);
    tr.alice_test[i] = at;
    tr.bob_test[i] = bt;
    if (at && bt) tr.test_indices.push_back(i);
    if (!at && !bt) tr.key_indices.push_back(i);
  }
  tr.frequencies = frequencies_from_transcript(tr);

  KeyRateReport& rep = res.report;
  rep.adversary = adv;
  rep.pe = parameter_estimation(tr.frequencies, pp, lambda, adv);
  rep.accepted = rep.pe.accepted;
  rep.n_key = tr.key_indices.size();
  const double d_est = rep.pe.delta_estimate;
  if (adv == Adversary::NonSignalling) {
    const double e = rep.pe.certificate_estimate;
    rep.rate = (e >= 0.0 && d_est <= 0.5) ? ns_key_rate(e, d_est) : kNaN;
    rep.threshold_rate = ns_key_rate(pp.eps, pp.delta);
  } else {
    // P_guess is at least 1/2 for a bit; the estimate may fall outside [1/2, 1]
    const double g = std::clamp(rep.pe.certificate_estimate, 0.5, 1.0);
    rep.rate = d_est <= 0.5 ? q_key_rate(g, d_est) : kNaN;
    rep.threshold_rate = q_key_rate(pp.pguess, pp.delta);
  }
  if (!rep.accepted) {
    rep.status = "aborted: " + abort_reason(rep.pe);
    return res;
  }

  const std::size_t nk = rep.n_key;
  std::size_t m = pp.m, s = pp.s;
  if (pp.auto_lengths) {
    m = std::min<std::size_t>(
        nk, static_cast<std::size_t>(std::ceil(double(nk) * bit_error_entropy(pp.delta + pp.kappa))));
    double room;
    if (adv == Adversary::NonSignalling) {
      room = pp.secrecy_target_log2 + 1.0 - double(m) -
             double(nk) * std::log2((1.0 + pp.eps + pp.eta_tilde) / 2.0);
    } else {
      const double d2 = double(pp.postselection_dim * pp.postselection_dim - 1);
      room = double(nk) * -std::log2(pp.pguess) - double(m) -
             2.0 * (d2 * std::log2(double(nk) + 1.0) - pp.secrecy_target_log2);
    }
    s = clamp_length(room, nk - m);
  } else if (s + m > nk) {
    rep.status = "aborted: fewer key rounds than s + m";
    rep.accepted = false;
    return res;
  }
  rep.s = s;
  rep.m = m;
  rep.finite_rate = double(s) / double(n);

  BitVec xa(nk), yb(nk);
  for (std::size_t i = 0; i < nk; ++i) {
    xa[i] = tr.x[tr.key_indices[i]];
    yb[i] = tr.y[tr.key_indices[i]];
  }
  tr.ir_matrix = Gf2Matrix::random(m, nk, rng);
  tr.pa_matrix = Gf2Matrix::random(s, nk, rng);
  tr.syndrome = tr.ir_matrix.apply(xa);
  tr.key_a = tr.pa_matrix.apply(xa);
  auto dec = decode_bounded(tr.ir_matrix, tr.syndrome, yb, rng, kDecodeBudget);
  if (dec) {
    tr.decoded = dec->decoded;
    tr.key_b = tr.pa_matrix.apply(tr.decoded);
    rep.ir_decoded = true;
    rep.keys_equal = tr.key_a == tr.key_b;
    rep.status = rep.keys_equal ? "key established" : "keys differ";
  } else {
    rep.status = "decode budget exceeded; analytic bounds only";
  }

  rep.log2_correctness = log2_brassard_salvail_bound(nk, pp.delta, pp.kappa, m);
  if (adv == Adversary::NonSignalling) {
    rep.log2_secrecy = log2_pa_distance_bound(nk, s + m, pp.eps, pp.eta_tilde,
                                              std::size_t(l.nu) * std::size_t(l.nv), pp.lambda_max);
  } else {
    rep.log2_secrecy = log2_quantum_pa_bound(nk, s, m, pp.pguess, pp.postselection_dim);
  }
  return res;
}

SimulationResult simulate_ekert(const ProtocolParams& pp, double rho, Adversary adv,
                                std::uint64_t seed, int level) {
  ProtocolParams q = pp;
  q.key_u = 0;
  q.key_v = 2;
  const System src = ekert_system(rho);
  std::vector<double> lambda;
  if (adv == Adversary::NonSignalling) {
    lambda = ekert_ns_certificate();
    q.lambda_max = *std::max_element(lambda.begin(), lambda.end());
  } else {
    GuessResult g = guessing_probability_sdp(noisy_singlet_system(rho), std::vector<int>{}, level, 0);
    lambda = embed_weights(Scenario::binary(2), g.certificate.lambda, src.scenario());
  }
  return simulate(q, src, adv, lambda, seed);
}

namespace {

std::string bits(const std::vector<std::uint8_t>& v) {
  std::string s(v.size(), '0');
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = char('0' + v[i]);
  return s;
}

std::vector<std::string> matrix_rows(const Gf2Matrix& a) {
  std::vector<std::string> rows;
  for (std::size_t r = 0; r < a.rows(); ++r) rows.push_back(a.row_string(r));
  return rows;
}

double round_sig(double v, int precision) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return std::strtod(buf, nullptr);
}

nlohmann::json number(double v, int precision) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig(v, precision);
}

nlohmann::json params_json(const ProtocolParams& p) {
  return {{"n", p.n},
          {"k", p.k},
          {"p", p.p},
          {"eps", p.eps},
          {"pguess", p.pguess},
          {"delta", p.delta},
          {"eta", p.eta},
          {"eta_bar", p.eta_bar},
          {"eta_tilde", p.eta_tilde},
          {"kappa", p.kappa},
          {"auto_lengths", p.auto_lengths},
          {"s", p.s},
          {"m", p.m},
          {"lambda_max", p.lambda_max},
          {"key_u", p.key_u},
          {"key_v", p.key_v},
          {"secrecy_target_log2", p.secrecy_target_log2},
          {"postselection_dim", p.postselection_dim}};
}

}  // namespace

std::string transcript_to_json(const Transcript& t) {
  nlohmann::json freq = {{"n", t.frequencies.n},
                         {"tests", t.frequencies.tests},
                         {"key_rounds", t.frequencies.key_rounds},
                         {"key_errors", t.frequencies.key_errors},
                         {"test_counts", t.frequencies.test_counts},
                         {"input_counts", t.frequencies.input_counts}};
  nlohmann::json j = {{"params", params_json(t.params)},
                      {"seed", t.seed},
                      {"adversary", to_string(t.adversary)},
                      {"inputs", t.scenario.inputs()},
                      {"outputs", t.scenario.outputs()},
                      {"u", bits(t.u)},
                      {"v", bits(t.v)},
                      {"x", bits(t.x)},
                      {"y", bits(t.y)},
                      {"alice_test", bits(t.alice_test)},
                      {"bob_test", bits(t.bob_test)},
                      {"test_indices", t.test_indices},
                      {"key_indices", t.key_indices},
                      {"frequencies", freq},
                      {"ir_matrix", matrix_rows(t.ir_matrix)},
                      {"syndrome", bits(t.syndrome)},
                      {"decoded", bits(t.decoded)},
                      {"pa_matrix", matrix_rows(t.pa_matrix)},
                      {"key_a", bits(t.key_a)},
                      {"key_b", bits(t.key_b)}};
  return j.dump(1) + "\n";
}

std::string report_to_json(const KeyRateReport& r, int precision) {
  auto num = [&](double v) { return number(v, precision); };
  nlohmann::json pe = {{"accepted", r.pe.accepted},
                       {"abort_key_yield", r.pe.abort_key_yield},
                       {"abort_test_yield", r.pe.abort_test_yield},
                       {"abort_certificate", r.pe.abort_certificate},
                       {"abort_error_rate", r.pe.abort_error_rate},
                       {"certificate_estimate", num(r.pe.certificate_estimate)},
                       {"delta_estimate", num(r.pe.delta_estimate)},
                       {"log2_eps1", num(r.pe.bounds.log2_eps1)},
                       {"log2_eps2", num(r.pe.bounds.log2_eps2)},
                       {"log2_eps_prime", num(r.pe.bounds.log2_eps_prime)}};
  nlohmann::json j = {{"adversary", to_string(r.adversary)},
                      {"status", r.status},
                      {"accepted", r.accepted},
                      {"rate", num(r.rate)},
                      {"threshold_rate", num(r.threshold_rate)},
                      {"finite_rate", num(r.finite_rate)},
                      {"n_key", r.n_key},
                      {"s", r.s},
                      {"m", r.m},
                      {"log2_secrecy", num(r.log2_secrecy)},
                      {"log2_correctness", num(r.log2_correctness)},
                      {"ir_decoded", r.ir_decoded},
                      {"keys_equal", r.keys_equal},
                      {"parameter_estimation", pe}};
  return j.dump(1) + "\n";
}

}  // namespace nlst

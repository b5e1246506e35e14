#include "nlst/nsimpossible.hpp"

#include <algorithm>
#include <cmath>

#include "nlst/error.hpp"

namespace nlst {

namespace {

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps <= 0.5)) fail(ErrorKind::Domain, "eps must lie in [0, 1/2]");
}

// in-place Walsh-Hadamard transform (unnormalised)
void fwht(std::vector<double>& a) {
  for (std::size_t h = 1; h < a.size(); h <<= 1)
    for (std::size_t i = 0; i < a.size(); i += h << 1)
      for (std::size_t j = i; j < i + h; ++j) {
        double x = a[j], y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
}

// P0(y) = sum_{x: f(x)=0} P(x, y | 0, 0) for all y
std::vector<double> zero_mass(int n, double eps, const BitFunction& f) {
  if (n < 1 || n > kMaxAttackBits) fail(ErrorKind::Size, "attack distance supports 1 <= n <= 24");
  const std::size_t N = std::size_t(1) << n;
  if (f.domain() != N) fail(ErrorKind::Shape, "function domain must be 2^n");
  std::vector<double> g(N);
  for (std::size_t x = 0; x < N; ++x) g[x] = f.eval(x) ? 0.0 : 1.0;
  fwht(g);
  // transform of the per-error weight: (1/2)^(n-|s|) ((1-2eps)/2)^|s|
  std::vector<double> pw(n + 1);
  for (int k = 0; k <= n; ++k) pw[k] = std::pow(0.5, n - k) * std::pow(0.5 * (1.0 - 2.0 * eps), k);
  for (std::size_t s = 0; s < N; ++s) g[s] *= pw[__builtin_popcountll(s)];
  fwht(g);
  for (auto& v : g) v /= double(N);
  return g;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

double exact_binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace

HammingSystem::HammingSystem(int n_, double eps_) : n(n_), eps(eps_) {
  if (n < 1 || n > 62) fail(ErrorKind::Domain, "number of boxes must lie in [1, 62]");
  check_eps(eps);
}

double HammingSystem::prob(std::uint64_t x, std::uint64_t y, std::uint64_t u, std::uint64_t v) const {
  int d = __builtin_popcountll(x ^ y ^ (u & v));
  return std::pow(0.5 * (1.0 - eps), n - d) * std::pow(0.5 * eps, d);
}

Scenario HammingSystem::scenario() const {
  int N = 1 << n;
  return Scenario::bipartite(N, N, N, N);
}

System HammingSystem::explicit_table() const {
  if (n > kMaxExplicitBoxes) fail(ErrorKind::Size, "explicit tables are limited to 6 boxes");
  const std::size_t N = std::size_t(1) << n;
  std::vector<double> pw(n + 1);
  for (int d = 0; d <= n; ++d) pw[d] = std::pow(0.5 * (1.0 - eps), n - d) * std::pow(0.5 * eps, d);
  std::vector<double> t(N * N * N * N);
  for (std::size_t u = 0; u < N; ++u)
    for (std::size_t x = 0; x < N; ++x)
      for (std::size_t v = 0; v < N; ++v)
        for (std::size_t y = 0; y < N; ++y) t[((u * N + x) * N + v) * N + y] = pw[__builtin_popcountll(x ^ y ^ (u & v))];
  return System::trusted(scenario(), std::move(t));
}

AttackZ0::AttackZ0(HammingSystem b, BitFunction fn) : box(b), f(std::move(fn)) {
  if (f.domain() != (std::size_t(1) << box.n)) fail(ErrorKind::Shape, "function domain must be 2^n");
}

std::pair<double, double> AttackZ0::split(std::uint64_t y, std::uint64_t u, std::uint64_t v) const {
  double p0 = 0.0, p1 = 0.0;
  for (std::uint64_t x = 0; x < f.domain(); ++x) (f.eval(x) ? p1 : p0) += box.prob(x, y, u, v);
  return {p0, p1};
}

namespace {
double z0_factor(bool fx, double p0, double p1) {
  if (std::abs(p0 - p1) <= 1e-14 * (p0 + p1)) return 1.0;
  if (p0 < p1) return fx ? (p1 - p0) / p1 : 2.0;
  return fx ? 0.0 : (p0 + p1) / p0;
}
}  // namespace

double AttackZ0::factor(std::uint64_t x, std::uint64_t y, std::uint64_t u, std::uint64_t v) const {
  auto [p0, p1] = split(y, u, v);
  return z0_factor(f.eval(x), p0, p1);
}

Z0Attack build_z0_attack(int n, double eps, const BitFunction& f, int cap) {
  if (!(eps > 0.0 && eps <= 0.5)) fail(ErrorKind::Domain, "the z0 attack needs 0 < eps <= 1/2");
  if (n > cap || n > kMaxExplicitBoxes) fail(ErrorKind::Size, "explicit z0 table exceeds the box cap");
  HammingSystem box(n, eps);
  AttackZ0 a(box, f);
  System parent = box.explicit_table();
  const std::size_t N = std::size_t(1) << n;
  std::vector<double> t(parent.size());
  std::vector<char> fx(N);
  for (std::size_t x = 0; x < N; ++x) fx[x] = f.eval(x);
  for (std::size_t u = 0; u < N; ++u)
    for (std::size_t v = 0; v < N; ++v)
      for (std::size_t y = 0; y < N; ++y) {
        double p0 = 0.0, p1 = 0.0;
        for (std::size_t x = 0; x < N; ++x) (fx[x] ? p1 : p0) += parent[((u * N + x) * N + v) * N + y];
        for (std::size_t x = 0; x < N; ++x) {
          std::size_t i = ((u * N + x) * N + v) * N + y;
          t[i] = z0_factor(fx[x], p0, p1) * parent[i];
        }
      }
  return {a, std::move(parent), System::trusted(box.scenario(), std::move(t))};
}

AttackTerms attack_terms(int n, double eps, const BitFunction& f) {
  check_eps(eps);
  auto p0 = zero_mass(n, eps, f);
  const double row = std::ldexp(1.0, -n);
  AttackTerms r;
  double diff = 0.0;
  for (double a : p0) {
    double b = row - a;
    diff += a - b;
    r.min_sum += std::min(a, b);
  }
  r.bias = 0.5 * std::abs(diff);
  return r;
}

double attack_distance(int n, double eps, const BitFunction& f) { return attack_terms(n, eps, f).distance(); }

AttackTerms attack_terms_bruteforce(int n, double eps, const BitFunction& f, std::uint64_t u, std::uint64_t v) {
  if (n < 1 || n > kMaxBruteForceBits) fail(ErrorKind::Size, "reference sum supports 1 <= n <= 14");
  HammingSystem box(n, eps);
  AttackZ0 a(box, f);
  const std::uint64_t N = std::uint64_t(1) << n;
  if (u >= N || v >= N) fail(ErrorKind::Domain, "input out of range");
  AttackTerms r;
  double diff = 0.0;
  for (std::uint64_t y = 0; y < N; ++y) {
    auto [p0, p1] = a.split(y, u, v);
    diff += p0 - p1;
    r.min_sum += std::min(p0, p1);
  }
  r.bias = 0.5 * std::abs(diff);
  return r;
}

AttackTerms attack_terms_symmetric(int n, double eps, const std::vector<int>& g) {
  check_eps(eps);
  if (n < 1 || n > 1000) fail(ErrorKind::Size, "symmetric path supports 1 <= n <= 1000");
  if (g.size() != std::size_t(n + 1)) fail(ErrorKind::Shape, "weight table needs n + 1 entries");
  const double a = 0.5 * (1.0 - eps), b = 0.5 * eps;
  std::vector<double> pw(n + 1);
  for (int d = 0; d <= n; ++d) pw[d] = std::pow(a, n - d) * std::pow(b, d);
  AttackTerms r;
  double diff = 0.0;
  for (int k = 0; k <= n; ++k) {  // |y| = k
    double p0 = 0.0, p1 = 0.0;
    for (int j = 0; j <= n; ++j)  // |x| = j
      for (int i = std::max(0, j - (n - k)); i <= std::min(j, k); ++i) {
        double w = binom(k, i) * binom(n - k, j - i) * pw[(k - i) + (j - i)];
        (g[j] ? p1 : p0) += w;
      }
    double cnt = binom(n, k);
    diff += cnt * (p0 - p1);
    r.min_sum += cnt * std::min(p0, p1);
  }
  r.bias = 0.5 * std::abs(diff);
  return r;
}

double attack_distance_symmetric(int n, double eps, const std::vector<int>& g) {
  return attack_terms_symmetric(n, eps, g).distance();
}

double xor_attack_distance_closed_form(int n, double eps) {
  check_eps(eps);
  if (n < 1) fail(ErrorKind::Domain, "n must be positive");
  double s = 0.0;
  for (int i = 0; n - 2 * i - 1 >= 0; ++i) {
    int k = n - 2 * i - 1;
    s += binom(n, k) * std::pow(1.0 - eps, k) * std::pow(eps, 2 * i + 1);
  }
  return s;
}

std::vector<double> xor_attack_polynomial(int n) {
  if (n < 1 || n > 60) fail(ErrorKind::Domain, "polynomial form supports 1 <= n <= 60");
  std::vector<double> c(n + 1, 0.0);
  for (int i = 0; n - 2 * i - 1 >= 0; ++i) {
    int k = n - 2 * i - 1;
    for (int j = 0; j <= k; ++j) c[n - k + j] += exact_binom(n, k) * exact_binom(k, j) * ((j & 1) ? -1.0 : 1.0);
  }
  return c;
}

double general_lower_bound(double eps) {
  if (!(eps >= 0.0 && eps <= 0.5)) fail(ErrorKind::Domain, "eps must lie in [0, 1/2]");
  if (eps == 0.0) return 0.0;
  return (-1.0 + std::sqrt(1.0 + 64.0 * eps * eps)) / (32.0 * eps);
}

MlCorrelation ml_correlation(int n, double eps, const BitFunction& f) {
  check_eps(eps);
  auto p0 = zero_mass(n, eps, f);
  const double row = std::ldexp(1.0, -n);
  MlCorrelation r;
  r.g.resize(p0.size());
  double fbal = 0.0, gbal = 0.0;
  for (std::size_t y = 0; y < p0.size(); ++y) {
    double a = p0[y], b = row - a;
    r.g[y] = a >= b ? 0 : 1;
    r.correlation += std::abs(a - b);
    fbal += a - b;
    gbal += r.g[y] ? -row : row;
  }
  r.d_fx = 0.5 * std::abs(fbal);
  r.d_gy = 0.5 * std::abs(gbal);
  return r;
}

namespace {
const std::vector<std::vector<int>> kTwoBoxGroups = {{0, 2}, {1, 3}};
}

TwoBoxDecomposition two_box_local_decomposition(double eps) {
  if (!(eps >= 0.0)) fail(ErrorKind::Domain, "eps must be non-negative");
  if (eps > 0.25) fail(ErrorKind::Regime, "the two-box decomposition needs eps <= 1/4");
  const Scenario sc = Scenario::binary(4);
  // u1u2 -> x1x2 written as 2-bit strings, first box most significant
  const int fa[2][4] = {{0, 0, 0, 1}, {0, 0, 0, 0}};
  const int fb[2][4] = {{0, 0, 2, 0}, {0, 0, 0, 0}};
  std::vector<System> base;
  for (int s = 0; s < 2; ++s) {
    std::vector<double> t(sc.size(), 0.0);
    for (int u = 0; u < 4; ++u)
      for (int v = 0; v < 4; ++v) {
        int x = fa[s][u], y = fb[s][v];
        int uu[4] = {u >> 1, v >> 1, u & 1, v & 1};
        int xx[4] = {x >> 1, y >> 1, x & 1, y & 1};
        t[sc.index(uu, xx)] = 1.0;
      }
    base.push_back(System::trusted(sc, std::move(t)));
  }
  std::vector<std::vector<System>> orbit(2);
  std::vector<std::vector<double>> avg(2, std::vector<double>(sc.size(), 0.0));
  for (int s = 0; s < 2; ++s)
    for (int k1 = 0; k1 < 8; ++k1)
      for (int k2 = 0; k2 < 8; ++k2) {
        System d = depolarize_boxes(base[s], {k1, k2});
        for (std::size_t i = 0; i < sc.size(); ++i) avg[s][i] += d[i] / 64.0;
        orbit[s].push_back(std::move(d));
      }
  const System target = tensor_power(unbiased_pr_box(eps), 2);
  const System pr2 = tensor_power(pr_box(), 2);
  const double wpr = 1.0 - 4.0 * eps;
  std::vector<double> rest(sc.size());
  for (std::size_t i = 0; i < sc.size(); ++i) rest[i] = target[i] - wpr * pr2[i];
  // least squares for the two orbit weights
  double g00 = 0, g01 = 0, g11 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = 0; i < sc.size(); ++i) {
    g00 += avg[0][i] * avg[0][i];
    g01 += avg[0][i] * avg[1][i];
    g11 += avg[1][i] * avg[1][i];
    r0 += avg[0][i] * rest[i];
    r1 += avg[1][i] * rest[i];
  }
  double det = g00 * g11 - g01 * g01;
  double a = (r0 * g11 - r1 * g01) / det, b = (g00 * r1 - g01 * r0) / det;
  TwoBoxDecomposition out;
  out.weight_joint = a;
  out.weight_product = b;
  out.weight_pr = wpr;
  for (std::size_t i = 0; i < sc.size(); ++i)
    out.residual = std::max(out.residual, std::abs(a * avg[0][i] + b * avg[1][i] - rest[i]));
  if (a < -1e-12 || b < -1e-12) fail(ErrorKind::Regime, "orbit weights came out negative");
  const double w[2] = {std::max(a, 0.0), std::max(b, 0.0)};
  for (int s = 0; s < 2; ++s)
    if (w[s] > 0.0)
      for (auto& d : orbit[s]) out.partition.elements.push_back({w[s] / 64.0, group_parties(d, kTwoBoxGroups)});
  if (wpr > 0.0) out.partition.elements.push_back({wpr, group_parties(pr2, kTwoBoxGroups)});
  return out;
}

}  // namespace nlst

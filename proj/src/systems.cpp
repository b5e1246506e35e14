#include "nlst/systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "nlst/error.hpp"

namespace nlst {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Degenerate: return "degenerate-conditioning";
    case ErrorKind::Size: return "size";
    case ErrorKind::Regime: return "out-of-regime";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::NotQuantum: return "not-quantum-representable";
    case ErrorKind::Verification: return "verification";
  }
  return "unknown";
}

Scenario::Scenario(std::vector<int> inputs, std::vector<int> outputs)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  if (inputs_.empty()) fail(ErrorKind::Structural, "scenario needs at least one party");
  if (inputs_.size() != outputs_.size())
    fail(ErrorKind::Structural, "inputs and outputs lists differ in length");
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    if (inputs_[i] < 1 || outputs_[i] < 1)
      fail(ErrorKind::Structural, "alphabet sizes must be at least 1");
  const std::size_t n = inputs_.size();
  stride_.assign(n, 1);
  double total = 1.0;
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n)
      stride_[i] = stride_[i + 1] * std::size_t(inputs_[i + 1]) * std::size_t(outputs_[i + 1]);
    total *= double(inputs_[i]) * double(outputs_[i]);
  }
  if (total > double(kMaxTableSize))
    fail(ErrorKind::Size, "scenario table exceeds the size cap");
  size_ = stride_[0] * std::size_t(inputs_[0]) * std::size_t(outputs_[0]);
}

Scenario Scenario::bipartite(int nu, int nx, int nv, int ny) {
  return Scenario({nu, nv}, {nx, ny});
}

Scenario Scenario::binary(int parties) {
  return Scenario(std::vector<int>(parties, 2), std::vector<int>(parties, 2));
}

std::size_t Scenario::input_combos() const {
  std::size_t r = 1;
  for (int u : inputs_) r *= std::size_t(u);
  return r;
}

std::size_t Scenario::output_combos() const {
  std::size_t r = 1;
  for (int x : outputs_) r *= std::size_t(x);
  return r;
}

std::size_t Scenario::index(const int* u, const int* x) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    idx += (std::size_t(u[i]) * std::size_t(outputs_[i]) + std::size_t(x[i])) * stride_[i];
  return idx;
}

void Scenario::decode(std::size_t idx, int* u, int* x) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    std::size_t block = idx / stride_[i];
    idx %= stride_[i];
    u[i] = int(block / std::size_t(outputs_[i]));
    x[i] = int(block % std::size_t(outputs_[i]));
  }
}

Scenario Scenario::concat(const Scenario& o) const {
  auto in = inputs_;
  auto out = outputs_;
  in.insert(in.end(), o.inputs_.begin(), o.inputs_.end());
  out.insert(out.end(), o.outputs_.begin(), o.outputs_.end());
  return Scenario(std::move(in), std::move(out));
}

bool Scenario::is_bipartite_binary() const {
  return parties() == 2 && inputs_[0] == 2 && inputs_[1] == 2 && outputs_[0] == 2 &&
         outputs_[1] == 2;
}

namespace {

std::size_t input_combo_of(const Scenario& sc, const int* u) {
  std::size_t id = 0;
  for (std::size_t i = 0; i < sc.parties(); ++i) id = id * std::size_t(sc.inputs(i)) + std::size_t(u[i]);
  return id;
}

void require_bipartite_binary(const Scenario& sc, const char* what) {
  if (!sc.is_bipartite_binary())
    fail(ErrorKind::Shape, std::string(what) + " needs a bipartite system with binary inputs and outputs");
}

}  // namespace

NsReport check_normalized(const Scenario& sc, const std::vector<double>& t, double tol) {
  if (t.size() != sc.size())
    fail(ErrorKind::Structural, "table length " + std::to_string(t.size()) +
                                    " does not match scenario size " + std::to_string(sc.size()));
  NsReport rep;
  std::vector<double> sums(sc.input_combos(), 0.0);
  std::vector<int> u(sc.parties()), x(sc.parties());
  for (std::size_t i = 0; i < t.size(); ++i) {
    double v = t[i];
    if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) {
      rep.ok = false;
      double bad = std::isfinite(v) ? std::max(-v, v - 1.0) : INFINITY;
      rep.worst = std::max(rep.worst, bad);
      if (rep.violations.size() < 32)
        rep.violations.push_back("entry " + std::to_string(i) + " out of range");
    }
    sc.decode(i, u.data(), x.data());
    sums[input_combo_of(sc, u.data())] += v;
  }
  for (std::size_t c = 0; c < sums.size(); ++c) {
    double d = std::abs(sums[c] - 1.0);
    if (d > tol) {
      rep.ok = false;
      rep.worst = std::max(rep.worst, d);
      if (rep.violations.size() < 32)
        rep.violations.push_back("input combination " + std::to_string(c) + " sums to " +
                                 std::to_string(sums[c]));
    }
  }
  return rep;
}

System::System(Scenario sc, std::vector<double> table, double tol)
    : sc_(std::move(sc)), p_(std::move(table)) {
  NsReport r = check_normalized(sc_, p_, tol);
  if (!r.ok)
    fail(ErrorKind::Structural,
         "table is not a normalised system: " + (r.violations.empty() ? std::string() : r.violations.front()));
}

System System::trusted(Scenario sc, std::vector<double> table) {
  if (table.size() != sc.size()) fail(ErrorKind::Structural, "table length does not match scenario");
  System s;
  s.sc_ = std::move(sc);
  s.p_ = std::move(table);
  return s;
}

NsReport is_nonsignalling(const Scenario& sc, const std::vector<double>& t, double tol,
                          std::size_t max_report) {
  if (t.size() != sc.size())
    fail(ErrorKind::Structural, "table length does not match scenario size");
  NsReport rep;
  for (std::size_t i = 0; i < sc.parties(); ++i) {
    const std::size_t S = sc.stride(i);
    const std::size_t X = std::size_t(sc.outputs(i));
    const std::size_t U = std::size_t(sc.inputs(i));
    const std::size_t B = U * X;
    const std::size_t highs = sc.size() / (S * B);
    for (std::size_t h = 0; h < highs; ++h) {
      for (std::size_t l = 0; l < S; ++l) {
        double prev = 0.0;
        for (std::size_t u = 0; u < U; ++u) {
          double m = 0.0;
          for (std::size_t x = 0; x < X; ++x) m += t[h * S * B + (u * X + x) * S + l];
          if (u > 0) {
            double d = std::abs(m - prev);
            rep.worst = std::max(rep.worst, d);
            if (d > tol) {
              rep.ok = false;
              if (rep.violations.size() < max_report) {
                std::ostringstream os;
                os << "party " << i << " inputs " << (u - 1) << "/" << u << " context "
                   << (h * S + l) << ": marginals differ by " << d;
                rep.violations.push_back(os.str());
              }
            }
          }
          prev = m;
        }
      }
    }
  }
  return rep;
}

NsReport is_nonsignalling(const System& s, double tol, std::size_t max_report) {
  return is_nonsignalling(s.scenario(), s.table(), tol, max_report);
}

double chsh_value(const System& s) {
  require_bipartite_binary(s.scenario(), "CHSH value");
  const auto& sc = s.scenario();
  double acc = 0.0;
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          if ((x ^ y) == (u & v)) {
            int uu[2] = {u, v}, xx[2] = {x, y};
            acc += s[sc.index(uu, xx)];
          }
  return acc / 4.0;
}

double braunstein_caves_value(const System& s, int N) {
  const auto& sc = s.scenario();
  if (N < 2 || sc.parties() != 2 || sc.inputs(0) != N || sc.inputs(1) != N ||
      sc.outputs(0) != 2 || sc.outputs(1) != 2)
    fail(ErrorKind::Shape, "chained inequality needs a bipartite system with N inputs and binary outputs");
  auto p = [&](int u, int v, bool equal) {
    double acc = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        if ((x == y) == equal) {
          int uu[2] = {u, v}, xx[2] = {x, y};
          acc += s[sc.index(uu, xx)];
        }
    return acc;
  };
  double acc = 0.0;
  for (int u = 0; u < N; ++u) {
    acc += p(u, u, true);
    if (u + 1 < N) acc += p(u, u + 1, true);
  }
  acc += p(N - 1, 0, false);
  return acc / (2.0 * N);
}

System unbiased_pr_box(double eps) {
  if (!(eps >= 0.0 && eps <= 0.5)) fail(ErrorKind::Domain, "error parameter must lie in [0, 1/2]");
  Scenario sc = Scenario::binary(2);
  std::vector<double> t(16);
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          int uu[2] = {u, v}, xx[2] = {x, y};
          t[sc.index(uu, xx)] = ((x ^ y) == (u & v)) ? (1.0 - eps) / 2.0 : eps / 2.0;
        }
  return System::trusted(sc, std::move(t));
}

System pr_box() { return unbiased_pr_box(0.0); }

System tsirelson_system() { return unbiased_pr_box((2.0 - std::sqrt(2.0)) / 4.0); }

System uniform_system(const Scenario& sc) {
  return System::trusted(sc, std::vector<double>(sc.size(), 1.0 / double(sc.output_combos())));
}

System mix(const System& a, const System& b, double wa) {
  if (a.scenario() != b.scenario()) fail(ErrorKind::Shape, "mixing systems of different scenarios");
  if (!(wa >= 0.0 && wa <= 1.0)) fail(ErrorKind::Domain, "mixing weight outside [0, 1]");
  std::vector<double> t(a.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = wa * a[i] + (1.0 - wa) * b[i];
  return System::trusted(a.scenario(), std::move(t));
}

System noisy_singlet_system(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) fail(ErrorKind::Domain, "noise parameter must lie in [0, 1]");
  return mix(tsirelson_system(), uniform_system(Scenario::binary(2)), 1.0 - rho);
}

System chained_pr_box(int N) {
  if (N < 2) fail(ErrorKind::Domain, "chain length must be at least 2");
  Scenario sc({N, N}, {2, 2});
  std::vector<double> t(sc.size(), 0.0);
  for (int u = 0; u < N; ++u)
    for (int v = 0; v < N; ++v)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          int flip = (u == N - 1 && v == 0) ? 1 : 0;
          int uu[2] = {u, v}, xx[2] = {x, y};
          t[sc.index(uu, xx)] = ((x ^ y) == flip) ? 0.5 : 0.0;
        }
  return System::trusted(sc, std::move(t));
}

System tensor(const System& a, const System& b) {
  Scenario sc = a.scenario().concat(b.scenario());
  std::vector<double> t(sc.size());
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < nb; ++j) t[i * nb + j] = a[i] * b[j];
  return System::trusted(sc, std::move(t));
}

System tensor_power(const System& a, int n) {
  if (n < 1) fail(ErrorKind::Domain, "tensor power needs n >= 1");
  System r = a;
  for (int i = 1; i < n; ++i) r = tensor(r, a);
  return r;
}

System marginal(const System& s, const std::vector<int>& keep) {
  const auto& sc = s.scenario();
  std::vector<char> kept(sc.parties(), 0);
  for (int k : keep) {
    if (k < 0 || std::size_t(k) >= sc.parties()) fail(ErrorKind::Domain, "party index out of range");
    if (kept[k]) fail(ErrorKind::Domain, "party listed twice");
    kept[k] = 1;
  }
  if (keep.empty()) fail(ErrorKind::Domain, "marginal needs at least one party");
  std::vector<int> in, out;
  for (int k : keep) {
    in.push_back(sc.inputs(k));
    out.push_back(sc.outputs(k));
  }
  Scenario ms(in, out);
  std::vector<double> t(ms.size(), 0.0);
  std::vector<int> u(sc.parties()), x(sc.parties()), mu(keep.size()), mx(keep.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    sc.decode(i, u.data(), x.data());
    bool skip = false;
    for (std::size_t p = 0; p < sc.parties(); ++p)
      if (!kept[p] && u[p] != 0) skip = true;
    if (skip) continue;
    for (std::size_t j = 0; j < keep.size(); ++j) {
      mu[j] = u[keep[j]];
      mx[j] = x[keep[j]];
    }
    t[ms.index(mu.data(), mx.data())] += s[i];
  }
  return System::trusted(ms, std::move(t));
}

System condition(const System& s, int party, int input, int output) {
  const auto& sc = s.scenario();
  if (party < 0 || std::size_t(party) >= sc.parties()) fail(ErrorKind::Domain, "party index out of range");
  if (sc.parties() < 2) fail(ErrorKind::Shape, "conditioning needs at least two parties");
  if (input < 0 || input >= sc.inputs(party) || output < 0 || output >= sc.outputs(party))
    fail(ErrorKind::Domain, "conditioning input or output out of range");
  System m = marginal(s, {party});
  double pm = m.table()[std::size_t(input) * sc.outputs(party) + output];
  if (!(pm > 1e-15)) fail(ErrorKind::Degenerate, "conditioning on an outcome of probability zero");
  std::vector<int> rest;
  for (std::size_t p = 0; p < sc.parties(); ++p)
    if (int(p) != party) rest.push_back(int(p));
  std::vector<int> in, out;
  for (int r : rest) {
    in.push_back(sc.inputs(r));
    out.push_back(sc.outputs(r));
  }
  Scenario cs(in, out);
  std::vector<double> t(cs.size(), 0.0);
  std::vector<int> u(sc.parties()), x(sc.parties()), cu(rest.size()), cx(rest.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    sc.decode(i, u.data(), x.data());
    if (u[party] != input || x[party] != output) continue;
    for (std::size_t j = 0; j < rest.size(); ++j) {
      cu[j] = u[rest[j]];
      cx[j] = x[rest[j]];
    }
    t[cs.index(cu.data(), cx.data())] = s[i] / pm;
  }
  return System::trusted(cs, std::move(t));
}

System group_parties(const System& s, const std::vector<std::vector<int>>& groups) {
  const auto& sc = s.scenario();
  std::vector<int> seen(sc.parties(), 0);
  std::vector<int> in, out;
  for (const auto& g : groups) {
    if (g.empty()) fail(ErrorKind::Domain, "empty party group");
    std::size_t ni = 1, no = 1;
    for (int p : g) {
      if (p < 0 || std::size_t(p) >= sc.parties()) fail(ErrorKind::Domain, "party index out of range");
      if (seen[p]++) fail(ErrorKind::Domain, "party listed in two groups");
      ni *= std::size_t(sc.inputs(p));
      no *= std::size_t(sc.outputs(p));
    }
    in.push_back(int(ni));
    out.push_back(int(no));
  }
  for (int c : seen)
    if (c != 1) fail(ErrorKind::Domain, "every party must belong to exactly one group");
  Scenario gs(in, out);
  std::vector<double> t(gs.size(), 0.0);
  std::vector<int> u(sc.parties()), x(sc.parties()), gu(groups.size()), gx(groups.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    sc.decode(i, u.data(), x.data());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      int a = 0, b = 0;
      for (int p : groups[g]) {
        a = a * sc.inputs(p) + u[p];
        b = b * sc.outputs(p) + x[p];
      }
      gu[g] = a;
      gx[g] = b;
    }
    t[gs.index(gu.data(), gx.data())] = s[i];
  }
  return System::trusted(gs, std::move(t));
}

namespace {

// (u,x,v,y) -> relabelled cell under map k = 4*flip + step
void relabel(int k, int& u, int& x, int& v, int& y) {
  if (k / 4) {
    x ^= 1;
    y ^= 1;
  }
  switch (k % 4) {
    case 1:
      x ^= u;
      v ^= 1;
      break;
    case 2:
      y ^= v;
      u ^= 1;
      break;
    case 3:
      x ^= u ^ 1;
      y ^= v;
      u ^= 1;
      v ^= 1;
      break;
    default:
      break;
  }
}

}  // namespace

System depolarize_map(const System& s, int k) {
  require_bipartite_binary(s.scenario(), "depolarisation");
  if (k < 0 || k >= 8) fail(ErrorKind::Domain, "depolarisation map index must be in [0, 8)");
  return depolarize_boxes(s, {k});
}

System depolarize_boxes(const System& s, const std::vector<int>& ks) {
  const auto& sc = s.scenario();
  if (sc.parties() != 2 * ks.size())
    fail(ErrorKind::Shape, "depolarisation needs one map per bipartite box");
  for (std::size_t p = 0; p < sc.parties(); ++p)
    if (sc.inputs(p) != 2 || sc.outputs(p) != 2)
      fail(ErrorKind::Shape, "depolarisation needs binary inputs and outputs");
  std::vector<double> t(s.size(), 0.0);
  std::vector<int> u(sc.parties()), x(sc.parties());
  for (std::size_t i = 0; i < s.size(); ++i) {
    sc.decode(i, u.data(), x.data());
    for (std::size_t b = 0; b < ks.size(); ++b)
      relabel(ks[b], u[2 * b], x[2 * b], u[2 * b + 1], x[2 * b + 1]);
    t[sc.index(u.data(), x.data())] = s[i];
  }
  return System::trusted(sc, std::move(t));
}

System depolarize_expectation(const System& s) {
  require_bipartite_binary(s.scenario(), "depolarisation");
  std::vector<double> t(s.size(), 0.0);
  for (int k = 0; k < 8; ++k) {
    System m = depolarize_map(s, k);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += m[i] / 8.0;
  }
  return System::trusted(s.scenario(), std::move(t));
}

System depolarize(const System& s, Rng& rng) {
  std::uniform_int_distribution<int> d(0, 7);
  return depolarize_map(s, d(rng));
}

double count_local_vertices(const Scenario& sc) {
  double c = 1.0;
  for (std::size_t p = 0; p < sc.parties(); ++p)
    c *= std::pow(double(sc.outputs(p)), double(sc.inputs(p)));
  return c;
}

void for_each_local_vertex(const Scenario& sc, double cap,
                           const std::function<void(const LocalStrategy&)>& fn) {
  double count = count_local_vertices(sc);
  if (count > cap) fail(ErrorKind::Size, "local vertex count exceeds the cap");
  const std::size_t n = sc.parties();
  LocalStrategy f(n);
  for (std::size_t p = 0; p < n; ++p) f[p].assign(sc.inputs(p), 0);
  while (true) {
    fn(f);
    // odometer: last party's last input changes fastest
    std::size_t p = n;
    bool done = true;
    while (p-- > 0) {
      std::size_t u = f[p].size();
      bool carry = true;
      while (u-- > 0) {
        if (++f[p][u] < sc.outputs(p)) {
          carry = false;
          break;
        }
        f[p][u] = 0;
      }
      if (!carry) {
        done = false;
        break;
      }
    }
    if (done) break;
  }
}

std::vector<System> local_deterministic_vertices(const Scenario& sc, double cap) {
  std::vector<System> out;
  for_each_local_vertex(sc, cap, [&](const LocalStrategy& f) { out.push_back(deterministic_system(sc, f)); });
  return out;
}

std::vector<std::uint32_t> vertex_support(const Scenario& sc, const LocalStrategy& f) {
  const std::size_t n = sc.parties();
  std::vector<std::uint32_t> idx;
  idx.reserve(sc.input_combos());
  std::vector<int> u(n, 0), x(n, 0);
  while (true) {
    for (std::size_t p = 0; p < n; ++p) x[p] = f[p][u[p]];
    idx.push_back(std::uint32_t(sc.index(u.data(), x.data())));
    std::size_t p = n;
    bool done = true;
    while (p-- > 0) {
      if (++u[p] < sc.inputs(p)) {
        done = false;
        break;
      }
      u[p] = 0;
    }
    if (done) break;
  }
  return idx;
}

System deterministic_system(const Scenario& sc, const LocalStrategy& f) {
  if (f.size() != sc.parties()) fail(ErrorKind::Shape, "strategy does not match scenario");
  for (std::size_t p = 0; p < sc.parties(); ++p) {
    if (f[p].size() != std::size_t(sc.inputs(p))) fail(ErrorKind::Shape, "strategy does not match scenario");
    for (int v : f[p])
      if (v < 0 || v >= sc.outputs(p)) fail(ErrorKind::Domain, "strategy output out of range");
  }
  std::vector<double> t(sc.size(), 0.0);
  for (auto i : vertex_support(sc, f)) t[i] = 1.0;
  return System::trusted(sc, std::move(t));
}

PartitionCheck check_partition(const System& parent, const NSPartition& w, double tol) {
  PartitionCheck r;
  std::vector<double> acc(parent.size(), 0.0);
  double wsum = 0.0;
  for (std::size_t e = 0; e < w.elements.size(); ++e) {
    const auto& [p, s] = w.elements[e];
    if (s.scenario() != parent.scenario()) {
      r.ok = false;
      r.message = "element " + std::to_string(e) + " has a different scenario";
      return r;
    }
    if (p < -tol) {
      r.ok = false;
      r.message = "negative weight at element " + std::to_string(e);
    }
    wsum += p;
    NsReport nr = check_normalized(s.scenario(), s.table(), tol);
    NsReport ns = is_nonsignalling(s, tol);
    if (!nr.ok || !ns.ok) {
      r.ok = false;
      r.message = "element " + std::to_string(e) + (nr.ok ? " is signalling" : " is not normalised");
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p * s[i];
  }
  r.weight_error = std::abs(wsum - 1.0);
  for (std::size_t i = 0; i < acc.size(); ++i)
    r.reconstruction_error = std::max(r.reconstruction_error, std::abs(acc[i] - parent[i]));
  if (r.weight_error > tol) {
    r.ok = false;
    r.message = "weights do not sum to one";
  }
  if (r.reconstruction_error > tol) {
    r.ok = false;
    r.message = "elements do not reproduce the parent system";
  }
  return r;
}

System system_from_json(const std::string& text, double tol) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::Structural, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("inputs") || !j.contains("outputs") || !j.contains("table"))
    fail(ErrorKind::Structural, "system JSON needs inputs, outputs and table");
  std::vector<int> in, out;
  std::vector<double> t;
  try {
    in = j.at("inputs").get<std::vector<int>>();
    out = j.at("outputs").get<std::vector<int>>();
    t = j.at("table").get<std::vector<double>>();
  } catch (const std::exception& e) {
    fail(ErrorKind::Structural, std::string("malformed system JSON: ") + e.what());
  }
  return System(Scenario(in, out), t, tol);
}

std::string system_to_json(const System& s) {
  nlohmann::json j;
  j["inputs"] = s.scenario().inputs();
  j["outputs"] = s.scenario().outputs();
  j["table"] = s.table();
  return j.dump();
}

}  // namespace nlst

// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "montecarlo.hpp"
#include "nlst/npa.hpp"
#include "nlst/nsattack.hpp"
#include "nlst/nsimpossible.hpp"
#include "nlst/protocol.hpp"
#include "nlst/rng.hpp"
#include "nlst/systems.hpp"
#include "oracles.hpp"

using namespace nlst;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream note;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) note << "; ";
      ok = false;
      note << what;
    }
  }
};

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

const BitFunction kBit = BitFunction::mask(1, 1);

void c1(Check& c) {
  double worst = 0;
  for (double eps : {0.0, 0.05, 0.1, 0.2, 0.25}) {
    auto r = distance_from_uniform_lp(unbiased_pr_box(eps), kBit, {0, 0});
    worst = std::max(worst, std::abs(r.distance - 2 * eps));
  }
  c.expect(worst <= 1e-7, "max |d - 2 eps| = " + num(worst));
  c.note << (c.ok ? "max |d - 2 eps| = " + num(worst) : "");
}

void c2(Check& c) {
  auto lam = lambda1_star();
  auto b = distance_objective(Scenario::binary(2), kBit, {0, 0});
  c.expect(verify_certificate(lam, {b}).ok, "lambda1* rejected");
  double worst = 0;
  for (double eps : {0.0, 0.05, 0.1, 0.2, 0.25}) {
    auto t = oracle::eps_box_table(eps);
    double err = 0;
    for (int u = 0; u < 2; ++u)
      for (int v = 0; v < 2; ++v)
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y)
            if ((x ^ y) != (u & v)) err += t[oracle::cell(u, x, v, y)];
    worst = std::max({worst, std::abs(certified_value(lam, unbiased_pr_box(eps)) - err),
                      std::abs(err - 4 * eps)});
  }
  c.expect(worst <= 1e-12, "max deviation " + num(worst));
}

void c3(Check& c) {
  auto b = distance_objective(Scenario::binary(2), kBit, {0, 0});
  double worst = 0;
  for (int n = 1; n <= 4; ++n) {
    auto lam = tensor_power(lambda1_star(), n);
    std::vector<std::vector<double>> bs(std::size_t(n), b);
    c.expect(verify_certificate(lam, bs).ok, "tensor power rejected at n = " + std::to_string(n));
    for (double eps : {0.05, 0.1, 0.2}) {
      double v = xor_bound(lam, tensor_power(unbiased_pr_box(eps), n));
      worst = std::max(worst, std::abs(v - std::pow(4 * eps, n) / 2));
    }
  }
  c.expect(worst <= 1e-10, "max |bound - (4 eps)^n / 2| = " + num(worst));
}

void c4(Check& c) {
  for (double eps : {0.05, 0.1, 0.2}) {
    auto one = local_part(unbiased_pr_box(eps));
    c.expect(one.vertices == 16, "single box vertex count");
    c.expect(std::abs(one.value - 4 * eps) <= 1e-9, "single box eps " + num(eps) + ": " + num(one.value));
    System two = group_parties(tensor_power(unbiased_pr_box(eps), 2), {{0, 2}, {1, 3}});
    auto r = local_part(two);
    c.expect(r.vertices == 65536, "two box vertex count " + std::to_string(r.vertices));
    c.expect(std::abs(r.value - 4 * eps) <= 1e-6, "two boxes eps " + num(eps) + ": " + num(r.value));
  }
}

void c5(Check& c) {
  auto m = max_chsh(1);
  double target = (2 + std::sqrt(2.0)) / 4;
  c.expect(std::abs(m.value - target) <= 1e-6, "level-1 CHSH " + num(m.value));
  MomentStructure ms(Scenario::binary(2), 1);
  auto g = tsirelson_moment_matrix(ms);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  c.expect(es.eigenvalues().minCoeff() >= -1e-12, "Gamma min eigenvalue " + num(es.eigenvalues().minCoeff()));
  c.expect(ms.equality_residual(g) <= 1e-14, "A_qb residual " + num(ms.equality_residual(g)));
}

void c6(Check& c) {
  const double rho[] = {0, 0.003, 0.03, 0.09, 0.15, 0.3};
  const double fig[] = {0.5000, 0.5546, 0.6670, 0.7771, 0.8605, 1.0000};
  for (int i = 0; i < 6; ++i) {
    auto g = guessing_probability_sdp(noisy_singlet_system(rho[i]), std::vector<int>{}, 2);
    c.expect(std::abs(g.value - fig[i]) <= 5e-3, "rho " + num(rho[i]) + ": " + num(g.value));
    c.note << (i ? " " : "") << num(g.value);
  }
}

void c7(Check& c) {
  const double rho[] = {0, 0.06, 0.078};
  const double fig[] = {1, 0.1296, 0.0041};
  for (int i = 0; i < 3; ++i) {
    auto p = q_key_rate_curve(rho[i], 2);
    c.expect(std::abs(p.rate - fig[i]) <= 5e-3, "rho " + num(rho[i]) + ": " + num(p.rate));
    c.note << (i ? " " : "") << num(p.rate);
  }
}

void c8(Check& c) {
  double worst = 0;
  for (int i = 0; i <= 500; ++i) {
    double r = i / 1000.0;
    double h = r == 0 ? 0 : -r * std::log2(r) - (1 - r) * std::log2(1 - r);
    worst = std::max(worst, std::abs(ns_key_rate_curve(r) - (1 - h - std::log2(3 - std::sqrt(2.0) + std::sqrt(2.0) * r))));
  }
  c.expect(worst <= 1e-14, "transcription deviation " + num(worst));
  double z = ns_key_rate_zero();
  c.expect(z >= 0.047 && z <= 0.049, "zero at " + num(z));
  c.note << (c.ok ? "zero at " + num(z) : "");
}

void c9(Check& c) {
  double worst = 0;
  for (int n = 1; n <= 12; ++n)
    for (double eps : {0.01, 0.05, 0.1, 0.2, 0.3, 0.5}) {
      double ref = 0;
      for (int i = 0; 2 * i + 1 <= n; ++i)
        ref += oracle::binom(n, 2 * i + 1) * std::pow(1 - eps, n - 2 * i - 1) * std::pow(eps, 2 * i + 1);
      worst = std::max(worst, std::abs(attack_distance(n, eps, BitFunction::xor_all(n)) - ref));
      if (n <= 5) {
        // figure polynomials n (-2 eps)^k C(n, k) / (-2 n)
        double poly = 0;
        for (int k = 1; k <= n; ++k) poly += -0.5 * oracle::binom(n, k) * std::pow(-2 * eps, k);
        worst = std::max(worst, std::abs(attack_distance(n, eps, BitFunction::xor_all(n)) - poly));
      }
    }
  c.expect(worst <= 1e-12, "xor deviation " + num(worst));
  Rng rng(make_rng(9));
  for (int n = 1; n <= 6; ++n) {
    std::vector<BitFunction> fs = {BitFunction::xor_all(n), BitFunction::mask(1, n)};
    std::vector<std::uint8_t> t(std::size_t(1) << n);
    std::bernoulli_distribution coin(0.5);
    for (auto& b : t) b = coin(rng);
    fs.push_back(BitFunction::table(t));
    for (const auto& f : fs) {
      auto z = build_z0_attack(n, 0.1, f);
      c.expect(is_partition_element(z.parent, 0.5, z.table, 1e-12),
               "z0 rejected at n = " + std::to_string(n) + " f = " + f.describe());
    }
  }
}

void c10(Check& c) {
  double slack = 1e9;
  for (int n : {4, 8, 12})
    for (double eps : {0.05, 0.1, 0.2}) {
      Rng rng(child_seed(10, std::uint64_t(n) * 1000 + std::uint64_t(eps * 100)));
      std::bernoulli_distribution coin(0.5);
      double lb = general_lower_bound(eps);
      for (int k = 0; k < 100; ++k) {
        std::vector<std::uint8_t> t(std::size_t(1) << n);
        for (auto& b : t) b = coin(rng);
        double d = attack_distance(n, eps, BitFunction::table(t));
        slack = std::min(slack, d - lb);
        c.expect(d >= lb, "n " + std::to_string(n) + " eps " + num(eps) + " below bound");
      }
    }
  c.note << (c.ok ? "min slack " + num(slack) : "");
}

void c11(Check& c) {
  const std::size_t trials = 10000;
  int cells = 0;
  for (std::size_t n : {12, 16, 20})
    for (double dp : {1.0 / 16, 1.0 / 8}) {
      std::size_t flips = std::size_t(std::floor(dp * double(n)));
      for (std::size_t m = 2; m <= n; m += 2, ++cells) {
        auto e = mc::ir_failure(n, flips, m, trials, 1000 * n + m + (dp > 0.1));
        double b = ir_failure_bound(n, dp, m);
        c.expect(mc::within_bound(e, b), "IR n " + std::to_string(n) + " m " + std::to_string(m) +
                                             ": " + num(e.rate()) + " > " + num(b));
      }
    }
  auto lam = lambda1_star_weights();
  for (double eps : {0.0, 0.05, 0.1}) {
    auto pp = mc::honest_params(eps, 400000);
    auto h = mc::pe_outcomes(unbiased_pr_box(eps), pp, lam, trials, 500 + std::uint64_t(eps * 100));
    c.expect(mc::within_bound(h.aborts, h.bounds.eps_prime()),
             "PE eps " + num(eps) + ": abort " + num(h.aborts.rate()) + " > " + num(h.bounds.eps_prime()));
    if (eps == 0.05) c.note << (c.ok ? "IR cells " + std::to_string(cells) + ", PE eps' " + num(h.bounds.eps_prime()) : "");
  }
}

void c12(Check& c) {
  const std::vector<std::string> suites = {NLST_UNIT_BINARIES};
  for (const auto& s : suites) {
    std::string cmd = "\"" + s + "\" > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    c.expect(rc == 0, s.substr(s.find_last_of('/') + 1) + " failed");
  }
  if (c.ok) c.note << suites.size() << " suites green";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"single-box NS distance", c1},       {"dual certificate lambda1*", c2},
      {"XOR bound", c3},                     {"local part", c4},
      {"Tsirelson", c5},                    {"guessing probability figure", c6},
      {"quantum key rate", c7},             {"NS key rate", c8},
      {"z0 attack", c9},                    {"impossibility bound", c10},
      {"protocol Monte-Carlo", c11},        {"property suites", c12},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !c.ok;
    std::printf("criterion %2zu %-28s %s (%.1f s)%s%s\n", i + 1, criteria[i].first, c.ok ? "PASS" : "FAIL", secs,
                c.note.str().empty() ? "" : "  ", c.note.str().c_str());
    std::fflush(stdout);
  }
  return failed;
}

#include <cmath>
#include <set>

#include "doctest.h"
#include "nlst/error.hpp"
#include "nlst/systems.hpp"
#include "oracles.hpp"

using namespace nlst;
using oracle::cell;

namespace {

void check_normalised_exactly(const System& s) {
  const auto& sc = s.scenario();
  std::size_t outs = sc.output_combos();
  std::size_t ins = sc.input_combos();
  REQUIRE(s.size() == ins * outs);
  std::vector<double> sums(ins, 0.0);
  std::vector<int> u(sc.parties()), x(sc.parties());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i] >= 0.0);
    sc.decode(i, u.data(), x.data());
    std::size_t key = 0;
    for (std::size_t p = 0; p < sc.parties(); ++p) key = key * sc.inputs(p) + u[p];
    sums[key] += s[i];
  }
  for (double v : sums) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

}  // namespace

TEST_CASE("table layout") {
  Scenario sc = Scenario::bipartite(2, 2, 2, 2);
  for (int u = 0; u < 2; ++u)
    for (int x = 0; x < 2; ++x)
      for (int v = 0; v < 2; ++v)
        for (int y = 0; y < 2; ++y) {
          int uu[2] = {u, v}, xx[2] = {x, y};
          CHECK(sc.index(uu, xx) == cell(u, x, v, y));
          int du[2], dx[2];
          sc.decode(cell(u, x, v, y), du, dx);
          CHECK(du[0] == u);
          CHECK(dx[1] == y);
        }
}

TEST_CASE("constructors match reference tables and are normalised") {
  CHECK(pr_box().table() == oracle::pr_table());
  for (double eps : {0.0, 0.05, 0.1, 0.25, 0.5}) {
    auto t = unbiased_pr_box(eps).table();
    auto r = oracle::eps_box_table(eps);
    for (std::size_t i = 0; i < 16; ++i) CHECK(t[i] == doctest::Approx(r[i]).epsilon(1e-15));
    check_normalised_exactly(unbiased_pr_box(eps));
  }
  auto ts = tsirelson_system();
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          double ref = ((x ^ y) == (u & v)) ? (2 + std::sqrt(2.0)) / 8 : (2 - std::sqrt(2.0)) / 8;
          CHECK(ts[cell(u, x, v, y)] == doctest::Approx(ref).epsilon(1e-15));
        }
  check_normalised_exactly(ts);
  for (double rho : {0.0, 0.03, 0.3, 1.0}) {
    auto ns = noisy_singlet_system(rho);
    check_normalised_exactly(ns);
    for (std::size_t i = 0; i < 16; ++i)
      CHECK(ns[i] == doctest::Approx((1 - rho) * ts[i] + rho / 4).epsilon(1e-15));
  }
  check_normalised_exactly(uniform_system(Scenario({3, 2}, {2, 5})));
  for (int N : {2, 3, 5}) check_normalised_exactly(chained_pr_box(N));
  check_normalised_exactly(mix(pr_box(), tsirelson_system(), 0.3));
  check_normalised_exactly(tensor(unbiased_pr_box(0.1), tsirelson_system()));
  check_normalised_exactly(tensor_power(unbiased_pr_box(0.2), 3));
}

TEST_CASE("constructor domain errors") {
  CHECK_THROWS_AS(unbiased_pr_box(-0.1), Error);
  CHECK_THROWS_AS(unbiased_pr_box(0.6), Error);
  CHECK_THROWS_AS(noisy_singlet_system(1.5), Error);
  CHECK_THROWS_AS(System(Scenario::binary(2), std::vector<double>(15, 0.25)), Error);
  CHECK_THROWS_AS(System(Scenario::binary(2), std::vector<double>(16, 0.3)), Error);
}

TEST_CASE("chsh values") {
  CHECK(chsh_value(pr_box()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(chsh_value(tsirelson_system()) == doctest::Approx((2 + std::sqrt(2.0)) / 4).epsilon(1e-14));
  CHECK(chsh_value(unbiased_pr_box((2 - std::sqrt(2.0)) / 4)) ==
        doctest::Approx((2 + std::sqrt(2.0)) / 4).epsilon(1e-14));
  CHECK(chsh_value(unbiased_pr_box(0.5)) == doctest::Approx(0.5));
  CHECK(chsh_value(noisy_singlet_system(0.3)) ==
        doctest::Approx(0.5 + 0.7 * std::sqrt(2.0) / 4).epsilon(1e-14));
  Rng rng = make_rng(3);
  for (int k = 0; k < 20; ++k) {
    System s = oracle::random_ns_system(rng);
    CHECK(chsh_value(s) == doctest::Approx(oracle::chsh(s.table())).epsilon(1e-14));
  }
  CHECK_THROWS_AS(chsh_value(uniform_system(Scenario({3, 2}, {2, 2}))), Error);
}

TEST_CASE("braunstein-caves chain") {
  CHECK(braunstein_caves_value(chained_pr_box(2), 2) == doctest::Approx(1.0));
  for (int N : {2, 3, 4, 6}) {
    Scenario sc = Scenario::bipartite(N, 2, N, 2);
    CHECK(braunstein_caves_value(uniform_system(sc), N) == doctest::Approx(0.5));
    LocalStrategy zero{std::vector<int>(N, 0), std::vector<int>(N, 0)};
    CHECK(braunstein_caves_value(deterministic_system(sc, zero), N) ==
          doctest::Approx(1 - 1.0 / (2 * N)));
    // brute force over all local deterministic points
    double best = 0;
    for (const auto& d : local_deterministic_vertices(sc)) best = std::max(best, braunstein_caves_value(d, N));
    CHECK(best == doctest::Approx(1 - 1.0 / (2 * N)));
    CHECK(braunstein_caves_value(chained_pr_box(N), N) == doctest::Approx(1.0));
  }
}

TEST_CASE("non-signalling check") {
  CHECK(is_nonsignalling(pr_box()).ok);
  CHECK(is_nonsignalling(tensor(pr_box(), pr_box())).ok);
  // x := v
  std::vector<double> t(16, 0.0);
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) t[cell(u, v, v, 0)] = 1.0;
  auto rep = is_nonsignalling(Scenario::binary(2), t);
  CHECK_FALSE(rep.ok);
  CHECK_FALSE(rep.violations.empty());
  CHECK(rep.worst == doctest::Approx(oracle::signalling(t)));
  CHECK_THROWS_AS(is_nonsignalling(Scenario::binary(2), std::vector<double>(8, 0.5)), Error);

  Rng rng = make_rng(4);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> r(16);
    std::uniform_real_distribution<double> U(0, 1);
    for (int uv = 0; uv < 4; ++uv) {
      double s = 0;
      for (int o = 0; o < 4; ++o) s += (r[(uv / 2) * 8 + (uv % 2) * 2 + (o / 2) * 4 + (o % 2)] = U(rng));
      for (int o = 0; o < 4; ++o) r[(uv / 2) * 8 + (uv % 2) * 2 + (o / 2) * 4 + (o % 2)] /= s;
    }
    CHECK(is_nonsignalling(Scenario::binary(2), r, 1e-9).ok == (oracle::signalling(r) <= 1e-9));
  }
}

TEST_CASE("tensor then marginal returns the first factor") {
  Rng rng = make_rng(5);
  for (int k = 0; k < 10; ++k) {
    System a = oracle::random_ns_system(rng), b = oracle::random_ns_system(rng);
    System ab = tensor(a, b);
    CHECK(is_nonsignalling(ab).ok);
    System back = marginal(ab, {0, 1});
    REQUIRE(back.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(back[i] == doctest::Approx(a[i]).epsilon(1e-14));
  }
  // P^{2,eps} entries
  double e = 0.1;
  System two = tensor(unbiased_pr_box(e), unbiased_pr_box(e));
  std::set<long long> vals;
  for (double v : two.table()) vals.insert(std::llround(v * 1e12));
  std::set<long long> expect = {std::llround((1 - e) * (1 - e) / 4 * 1e12),
                                std::llround((e - e * e) / 4 * 1e12), std::llround(e * e / 4 * 1e12)};
  CHECK(vals == expect);
}

TEST_CASE("marginal and condition examples") {
  System a = marginal(pr_box(), {0});
  CHECK(a.scenario() == Scenario({2}, {2}));
  for (double v : a.table()) CHECK(v == doctest::Approx(0.5));
  System c = condition(pr_box(), 1, 0, 0);
  REQUIRE(c.size() == 4);
  // x = 0 for both u
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(0.0));
  CHECK(c[2] == doctest::Approx(1.0));
  CHECK(c[3] == doctest::Approx(0.0));
  LocalStrategy f{{0, 0}, {0, 0}};
  CHECK_THROWS_AS(condition(deterministic_system(Scenario::binary(2), f), 1, 0, 1), Error);
}

TEST_CASE("condition and marginal preserve non-signalling") {
  Rng rng = make_rng(6);
  for (int k = 0; k < 10; ++k) {
    System s = tensor(oracle::random_ns_system(rng), oracle::random_ns_system(rng));
    REQUIRE(is_nonsignalling(s).ok);
    CHECK(is_nonsignalling(marginal(s, {0, 2, 3})).ok);
    CHECK(is_nonsignalling(marginal(s, {1, 2})).ok);
    for (int party = 0; party < 4; ++party)
      for (int out = 0; out < 2; ++out) {
        System m = marginal(s, {party});
        if (m[out] < 1e-9) continue;
        CHECK(is_nonsignalling(condition(s, party, 0, out)).ok);
      }
  }
}

TEST_CASE("depolarisation") {
  for (double eps : {0.0, 0.1, 0.3}) {
    System d = depolarize_expectation(unbiased_pr_box(eps));
    for (std::size_t i = 0; i < 16; ++i) CHECK(d[i] == doctest::Approx(unbiased_pr_box(eps)[i]));
  }
  CHECK(depolarize_expectation(pr_box()).table() == pr_box().table());
  Rng rng = make_rng(7);
  for (int k = 0; k < 20; ++k) {
    System s = oracle::random_ns_system(rng);
    System d = depolarize_expectation(s);
    System dd = depolarize_expectation(d);
    for (std::size_t i = 0; i < 16; ++i) CHECK(dd[i] == doctest::Approx(d[i]).epsilon(1e-14));
    CHECK(chsh_value(d) == doctest::Approx(oracle::chsh(s.table())).epsilon(1e-14));
    // result is the unbiased box with error 1 - chsh
    auto ref = oracle::eps_box_table(1 - oracle::chsh(s.table()));
    for (std::size_t i = 0; i < 16; ++i) CHECK(d[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    for (int m = 0; m < 8; ++m) CHECK(chsh_value(depolarize_map(s, m)) == doctest::Approx(chsh_value(s)));
    System r = depolarize(s, rng);
    CHECK(chsh_value(r) == doctest::Approx(chsh_value(s)));
  }
}

TEST_CASE("local deterministic vertices") {
  auto v = local_deterministic_vertices(Scenario::binary(2));
  CHECK(v.size() == 16);
  std::set<std::vector<double>> distinct;
  for (const auto& s : v) {
    CHECK(is_nonsignalling(s).ok);
    CHECK(chsh_value(s) <= 0.75 + 1e-15);
    distinct.insert(s.table());
  }
  CHECK(distinct.size() == 16);
  // enumerate the reference strategies and check each appears once
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      int fa[2] = {a & 1, a >> 1}, fb[2] = {b & 1, b >> 1};
      CHECK(distinct.count(oracle::deterministic_table(fa, fb)) == 1);
    }
  CHECK(count_local_vertices(Scenario::bipartite(4, 4, 4, 4)) == 65536.0);
  CHECK(local_deterministic_vertices(Scenario({1}, {2})).size() == 2);
  CHECK_THROWS_AS(local_deterministic_vertices(Scenario::bipartite(4, 4, 4, 4), 1000), Error);
}

TEST_CASE("partition check and json round trip") {
  NSPartition w{{{0.5, pr_box()}, {0.5, unbiased_pr_box(0.5)}}};
  System parent = mix(pr_box(), unbiased_pr_box(0.5), 0.5);
  CHECK(check_partition(parent, w).ok);
  NSPartition bad{{{0.6, pr_box()}, {0.5, unbiased_pr_box(0.5)}}};
  CHECK_FALSE(check_partition(parent, bad).ok);
  System s = system_from_json(system_to_json(tsirelson_system()));
  CHECK(s.table() == tsirelson_system().table());
  CHECK_THROWS_AS(system_from_json("{\"inputs\": [2]}"), Error);
}

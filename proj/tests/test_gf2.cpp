#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "nlst/error.hpp"
#include "nlst/gf2.hpp"
#include "nlst/rng.hpp"

using namespace nlst;

namespace {

using IntMatrix = std::vector<std::vector<int>>;

IntMatrix to_int(const Gf2Matrix& a) {
  IntMatrix m(a.rows(), std::vector<int>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m[i][j] = a.get(i, j);
  return m;
}

IntMatrix mul_mod2(const IntMatrix& a, const IntMatrix& b) {
  std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  IntMatrix c(n, std::vector<int>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      int s = 0;
      for (std::size_t l = 0; l < k; ++l) s += a[i][l] * b[l][j];
      c[i][j] = s % 2;
    }
  return c;
}

std::size_t rank_mod2(IntMatrix a) {
  std::size_t r = 0, cols = a.empty() ? 0 : a[0].size();
  for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
    std::size_t p = r;
    while (p < a.size() && !a[p][c]) ++p;
    if (p == a.size()) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (i != r && a[i][c])
        for (std::size_t j = 0; j < cols; ++j) a[i][j] ^= a[r][j];
    ++r;
  }
  return r;
}

BitVec random_bits(std::size_t n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  BitVec v(n);
  for (auto& b : v) b = coin(rng);
  return v;
}

BitVec apply_ref(const IntMatrix& a, const BitVec& x) {
  BitVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    int s = 0;
    for (std::size_t j = 0; j < x.size(); ++j) s += a[i][j] * x[j];
    r[i] = s % 2;
  }
  return r;
}

}  // namespace

TEST_CASE("matrix products agree with an integer mod-2 reference") {
  Rng rng = make_rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    Gf2Matrix a = Gf2Matrix::random(8, 8, rng), b = Gf2Matrix::random(8, 8, rng), c = Gf2Matrix::random(8, 8, rng);
    CHECK(to_int(a.multiply(b)) == mul_mod2(to_int(a), to_int(b)));
    CHECK(a.multiply(b).multiply(c) == a.multiply(b.multiply(c)));
    CHECK(a.multiply(Gf2Matrix::identity(8)) == a);
    CHECK(a.rank() == rank_mod2(to_int(a)));
  }
  const std::size_t dims[][3] = {{3, 70, 5}, {65, 130, 2}, {1, 1, 1}, {10, 64, 64}};
  for (const auto& d : dims) {
    std::size_t r = d[0], k = d[1], m = d[2];
    Gf2Matrix a = Gf2Matrix::random(r, k, rng), b = Gf2Matrix::random(k, m, rng);
    CHECK(to_int(a.multiply(b)) == mul_mod2(to_int(a), to_int(b)));
    CHECK(a.transpose().transpose() == a);
    CHECK(to_int(a.transpose())[0][0] == a.get(0, 0));
    CHECK(a.rank() == rank_mod2(to_int(a)));
    BitVec x = random_bits(k, rng);
    CHECK(a.apply(x) == apply_ref(to_int(a), x));
  }
}

TEST_CASE("random matrices keep the padding bits clear") {
  Rng rng = make_rng(52);
  Gf2Matrix a = Gf2Matrix::random(5, 70, rng);
  Gf2Matrix b(5, 70);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 70; ++j) b.set(i, j, a.get(i, j));
  CHECK(a == b);
  CHECK(a.vstack(b).rows() == 10);
  CHECK(a.vstack(b).row_range(5, 5) == b);
  CHECK(a.row_string(0).size() == 70);
}

TEST_CASE("linearity: A(x ^ x') = Ax ^ Ax'") {
  Rng rng = make_rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + trial % 150, m = 1 + trial % 37;
    Gf2Matrix a = Gf2Matrix::random(m, n, rng);
    BitVec x = random_bits(n, rng), y = random_bits(n, rng);
    CHECK(a.apply(xor_bits(x, y)) == xor_bits(a.apply(x), a.apply(y)));
  }
}

TEST_CASE("random linear hashes are two-universal") {
  Rng rng = make_rng(54);
  const std::size_t n = 40, trials = 40000;
  for (std::size_t m : {1, 2, 4, 6}) {
    BitVec x = random_bits(n, rng), y = x;
    y[3] ^= 1;
    y[17] ^= 1;
    std::size_t coll = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      Gf2Matrix a = Gf2Matrix::random(m, n, rng);
      coll += a.apply(x) == a.apply(y);
    }
    double p = std::ldexp(1.0, -int(m));
    double sigma = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(double(coll) / trials - p) <= 4 * sigma);
  }
}

TEST_CASE("minimum-distance decoding against exhaustive search") {
  Rng rng = make_rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 4 + trial % 9, m = 1 + trial % n;
    Gf2Matrix a = Gf2Matrix::random(m, n, rng);
    BitVec x = random_bits(n, rng), y = random_bits(n, rng);
    BitVec syn = a.apply(x);
    std::size_t best = n + 1, count = 0;
    for (std::uint64_t c = 0; c < (1u << n); ++c) {
      BitVec z(n);
      for (std::size_t j = 0; j < n; ++j) z[j] = (c >> j) & 1;
      if (a.apply(z) != syn) continue;
      std::size_t d = hamming_distance(z, y);
      if (d < best) best = d, count = 0;
      if (d == best) ++count;
    }
    auto r = decode_min_distance(a, syn, y, rng);
    CHECK(a.apply(r.decoded) == syn);
    CHECK(r.weight == best);
    CHECK(hamming_distance(r.decoded, y) == best);
    CHECK(r.candidates == count);
    auto b = decode_bounded(a, syn, y, rng, std::size_t(1) << 20);
    REQUIRE(b.has_value());
    CHECK(b->weight == best);
  }
  // budget exhaustion
  Gf2Matrix a = Gf2Matrix::random(30, 60, rng);
  BitVec x = random_bits(60, rng), y = random_bits(60, rng);
  CHECK_FALSE(decode_bounded(a, a.apply(x), y, rng, 100).has_value());
  CHECK_THROWS_AS(decode_min_distance(Gf2Matrix::random(3, 25, rng), BitVec(3), BitVec(25), rng), Error);
}

TEST_CASE("reconciliation and privacy amplification") {
  Rng rng = make_rng(56);
  BitVec x = random_bits(20, rng), y = x;
  y[4] ^= 1;
  auto r = info_reconcile(x, y, 20, rng);  // full rank with high probability
  CHECK(r.syndrome == r.matrix.apply(x));
  if (r.matrix.rank() == 20) CHECK(r.success);
  CHECK(r.success == (r.decoded == x));
  auto p = privacy_amplify(x, 7, rng);
  CHECK(p.key == p.matrix.apply(x));
  CHECK(p.key.size() == 7);
  CHECK_THROWS_AS(info_reconcile(BitVec(25), BitVec(25), 5, rng), Error);
}

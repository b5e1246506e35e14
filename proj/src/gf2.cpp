#include "nlst/gf2.hpp"

#include <algorithm>
#include <bit>
#include <random>

#include "nlst/error.hpp"

namespace nlst {

namespace {

std::uint64_t tail_mask(std::size_t cols) {
  std::size_t r = cols % 64;
  return r == 0 ? ~0ULL : ((1ULL << r) - 1);
}

void check_bits(const BitVec& v, const char* what) {
  for (auto b : v)
    if (b > 1) fail(ErrorKind::Structural, std::string(what) + ": entries must be 0 or 1");
}

}  // namespace

Gf2Matrix::Gf2Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), data_(rows * wpr_, 0) {}

Gf2Matrix Gf2Matrix::random(std::size_t rows, std::size_t cols, Rng& rng) {
  Gf2Matrix m(rows, cols);
  const std::uint64_t tail = tail_mask(cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t w = 0; w < m.wpr_; ++w) {
      std::uint64_t word = rng();
      if (w + 1 == m.wpr_) word &= tail;
      m.data_[r * m.wpr_ + w] = word;
    }
  return m;
}

Gf2Matrix Gf2Matrix::identity(std::size_t n) {
  Gf2Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

void Gf2Matrix::set(std::size_t r, std::size_t c, bool v) {
  std::uint64_t& w = data_[r * wpr_ + c / 64];
  const std::uint64_t bit = 1ULL << (c % 64);
  w = v ? (w | bit) : (w & ~bit);
}

BitVec Gf2Matrix::apply(const BitVec& x) const {
  if (x.size() != cols_) fail(ErrorKind::Shape, "gf2 apply: vector length does not match columns");
  check_bits(x, "gf2 apply");
  std::vector<std::uint64_t> packed(wpr_, 0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) packed[i / 64] |= 1ULL << (i % 64);
  BitVec out(rows_, 0);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::uint64_t acc = 0;
    const std::uint64_t* row_r = row(r);
    for (std::size_t w = 0; w < wpr_; ++w) acc ^= row_r[w] & packed[w];
    out[r] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return out;
}

Gf2Matrix Gf2Matrix::multiply(const Gf2Matrix& b) const {
  if (cols_ != b.rows_) fail(ErrorKind::Shape, "gf2 multiply: inner dimensions differ");
  Gf2Matrix out(rows_, b.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k)
      if (get(r, k)) {
        std::uint64_t* dst = out.data_.data() + r * out.wpr_;
        const std::uint64_t* src = b.row(k);
        for (std::size_t w = 0; w < out.wpr_; ++w) dst[w] ^= src[w];
      }
  return out;
}

Gf2Matrix Gf2Matrix::transpose() const {
  Gf2Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      if (get(r, c)) t.set(c, r, true);
  return t;
}

Gf2Matrix Gf2Matrix::vstack(const Gf2Matrix& below) const {
  if (below.rows_ > 0 && rows_ > 0 && below.cols_ != cols_)
    fail(ErrorKind::Shape, "gf2 vstack: column counts differ");
  Gf2Matrix out(rows_ + below.rows_, rows_ > 0 ? cols_ : below.cols_);
  std::copy(data_.begin(), data_.end(), out.data_.begin());
  std::copy(below.data_.begin(), below.data_.end(), out.data_.begin() + data_.size());
  return out;
}

Gf2Matrix Gf2Matrix::row_range(std::size_t first, std::size_t count) const {
  if (first + count > rows_) fail(ErrorKind::Shape, "gf2 row_range: out of range");
  Gf2Matrix out(count, cols_);
  std::copy(data_.begin() + first * wpr_, data_.begin() + (first + count) * wpr_,
            out.data_.begin());
  return out;
}

std::size_t Gf2Matrix::rank() const {
  std::vector<std::uint64_t> m = data_;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols_ && rank < rows_; ++c) {
    const std::size_t w = c / 64;
    const std::uint64_t bit = 1ULL << (c % 64);
    std::size_t piv = rank;
    while (piv < rows_ && !(m[piv * wpr_ + w] & bit)) ++piv;
    if (piv == rows_) continue;
    if (piv != rank)
      for (std::size_t k = 0; k < wpr_; ++k) std::swap(m[piv * wpr_ + k], m[rank * wpr_ + k]);
    for (std::size_t r = 0; r < rows_; ++r)
      if (r != rank && (m[r * wpr_ + w] & bit))
        for (std::size_t k = 0; k < wpr_; ++k) m[r * wpr_ + k] ^= m[rank * wpr_ + k];
    ++rank;
  }
  return rank;
}

std::uint64_t Gf2Matrix::column_bits(std::size_t c) const {
  if (rows_ > 64) fail(ErrorKind::Size, "gf2 column_bits: more than 64 rows");
  std::uint64_t out = 0;
  for (std::size_t r = 0; r < rows_; ++r)
    if (get(r, c)) out |= 1ULL << r;
  return out;
}

std::string Gf2Matrix::row_string(std::size_t r) const {
  std::string s(cols_, '0');
  for (std::size_t c = 0; c < cols_; ++c)
    if (get(r, c)) s[c] = '1';
  return s;
}

std::size_t hamming_distance(const BitVec& a, const BitVec& b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "hamming_distance: lengths differ");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
  return d;
}

BitVec xor_bits(const BitVec& a, const BitVec& b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "xor_bits: lengths differ");
  BitVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

namespace {

struct PatternSearch {
  std::size_t n = 0, words = 0, budget = 0, tried = 0;
  std::vector<std::uint64_t> cols;  // column c at cols[c * words]
  std::vector<std::uint64_t> target;
  std::vector<std::uint64_t> stack;  // partial sums, one row per depth
  std::vector<std::size_t> chosen;
  std::vector<std::vector<std::size_t>> hits;
  bool exhausted = false;

  bool equal_target(const std::uint64_t* s) const {
    for (std::size_t w = 0; w < words; ++w)
      if (s[w] != target[w]) return false;
    return true;
  }

  // choose `left` more columns from [start, n)
  void walk(std::size_t start, std::size_t left, std::size_t depth) {
    if (exhausted) return;
    const std::uint64_t* cur = stack.data() + depth * words;
    if (left == 0) {
      if (++tried > budget) {
        exhausted = true;
        return;
      }
      if (equal_target(cur)) hits.push_back(chosen);
      return;
    }
    for (std::size_t c = start; c + left <= n; ++c) {
      std::uint64_t* next = stack.data() + (depth + 1) * words;
      const std::uint64_t* col = cols.data() + c * words;
      for (std::size_t w = 0; w < words; ++w) next[w] = cur[w] ^ col[w];
      chosen.push_back(c);
      walk(c + 1, left - 1, depth + 1);
      chosen.pop_back();
      if (exhausted) return;
    }
  }
};

std::optional<DecodeResult> decode_search(const Gf2Matrix& a, const BitVec& syndrome,
                                          const BitVec& y, Rng& rng, std::size_t budget) {
  const std::size_t n = a.cols();
  if (syndrome.size() != a.rows() || y.size() != n)
    fail(ErrorKind::Shape, "decode: syndrome or string length does not match the matrix");
  check_bits(syndrome, "decode");

  PatternSearch ps;
  ps.n = n;
  ps.words = std::max<std::size_t>(1, (a.rows() + 63) / 64);
  ps.budget = budget;
  const Gf2Matrix at = a.transpose();
  ps.cols.assign(n * ps.words, 0);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t w = 0; w < at.words_per_row(); ++w) ps.cols[c * ps.words + w] = at.row(c)[w];
  // error pattern e with A e = syndrome ^ A y
  const BitVec t = xor_bits(syndrome, a.apply(y));
  ps.target.assign(ps.words, 0);
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i]) ps.target[i / 64] |= 1ULL << (i % 64);
  ps.stack.assign((n + 1) * ps.words, 0);

  std::size_t weight = 0;
  for (; weight <= n; ++weight) {
    ps.walk(0, weight, 0);
    if (ps.exhausted) return std::nullopt;
    if (!ps.hits.empty()) break;
  }
  if (ps.hits.empty()) fail(ErrorKind::Degenerate, "decode: syndrome is not in the column space");

  std::size_t pick = 0;
  if (ps.hits.size() > 1) {
    std::uniform_int_distribution<std::size_t> d(0, ps.hits.size() - 1);
    pick = d(rng);
  }
  DecodeResult r;
  r.decoded = y;
  for (std::size_t c : ps.hits[pick]) r.decoded[c] ^= 1;
  r.weight = weight;
  r.candidates = ps.hits.size();
  return r;
}

}  // namespace

DecodeResult decode_min_distance(const Gf2Matrix& a, const BitVec& syndrome, const BitVec& y,
                                 Rng& rng) {
  if (a.cols() > kMaxDecodeBits)
    fail(ErrorKind::Size, "decode: brute-force decoding is limited to " +
                              std::to_string(kMaxDecodeBits) + " bits");
  return *decode_search(a, syndrome, y, rng, std::size_t(1) << kMaxDecodeBits);
}

std::optional<DecodeResult> decode_bounded(const Gf2Matrix& a, const BitVec& syndrome,
                                           const BitVec& y, Rng& rng, std::size_t budget) {
  return decode_search(a, syndrome, y, rng, budget);
}

IrResult info_reconcile_with(const Gf2Matrix& a, const BitVec& x, const BitVec& y, Rng& rng) {
  if (x.size() != y.size()) fail(ErrorKind::Shape, "info_reconcile: x and y lengths differ");
  IrResult r;
  r.matrix = a;
  r.syndrome = a.apply(x);
  DecodeResult d = decode_min_distance(a, r.syndrome, y, rng);
  r.decoded = std::move(d.decoded);
  r.candidates = d.candidates;
  r.success = (r.decoded == x);
  return r;
}

IrResult info_reconcile(const BitVec& x, const BitVec& y, std::size_t m, Rng& rng) {
  if (x.size() > kMaxDecodeBits)
    fail(ErrorKind::Size, "info_reconcile: brute-force decoding is limited to " +
                              std::to_string(kMaxDecodeBits) + " bits");
  Gf2Matrix a = Gf2Matrix::random(m, x.size(), rng);
  return info_reconcile_with(a, x, y, rng);
}

PaResult privacy_amplify(const BitVec& x, std::size_t s, Rng& rng) {
  if (s > x.size()) fail(ErrorKind::Domain, "privacy_amplify: key longer than the raw string");
  PaResult r;
  r.matrix = Gf2Matrix::random(s, x.size(), rng);
  r.key = r.matrix.apply(x);
  return r;
}

}  // namespace nlst

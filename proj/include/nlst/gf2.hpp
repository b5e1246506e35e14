#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlst/rng.hpp"

namespace nlst {

// One bit per entry, values 0 or 1.
using BitVec = std::vector<std::uint8_t>;

// Dense matrix over GF(2), rows packed into 64-bit words (column j of a row is
// bit j % 64 of word j / 64).
class Gf2Matrix {
 public:
  Gf2Matrix() = default;
  Gf2Matrix(std::size_t rows, std::size_t cols);
  // uniformly random entries
  static Gf2Matrix random(std::size_t rows, std::size_t cols, Rng& rng);
  static Gf2Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return wpr_; }
  bool get(std::size_t r, std::size_t c) const {
    return (data_[r * wpr_ + c / 64] >> (c % 64)) & 1U;
  }
  void set(std::size_t r, std::size_t c, bool v);
  const std::uint64_t* row(std::size_t r) const { return data_.data() + r * wpr_; }

  BitVec apply(const BitVec& x) const;
  Gf2Matrix multiply(const Gf2Matrix& b) const;
  Gf2Matrix transpose() const;
  // rows of *this followed by rows of below
  Gf2Matrix vstack(const Gf2Matrix& below) const;
  Gf2Matrix row_range(std::size_t first, std::size_t count) const;
  std::size_t rank() const;
  // column c as an integer (row i is bit i), rows <= 64
  std::uint64_t column_bits(std::size_t c) const;
  // row r as a 0/1 string
  std::string row_string(std::size_t r) const;

  bool operator==(const Gf2Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0, wpr_ = 0;
  std::vector<std::uint64_t> data_;
};

// Brute-force syndrome decoding is limited to this many bits.
inline constexpr std::size_t kMaxDecodeBits = 24;

std::size_t hamming_distance(const BitVec& a, const BitVec& b);
BitVec xor_bits(const BitVec& a, const BitVec& b);

struct DecodeResult {
  BitVec decoded;
  std::size_t weight = 0;     // d_H(y, decoded)
  std::size_t candidates = 0; // minimum-weight preimages found (1 = no tie)
};
// y' with A y' = syndrome and d_H(y, y') minimal; ties broken uniformly by rng.
// Requires cols <= kMaxDecodeBits.
DecodeResult decode_min_distance(const Gf2Matrix& a, const BitVec& syndrome, const BitVec& y,
                                 Rng& rng);
// Same search for any length, enumerating error patterns by increasing weight;
// nullopt once more than `budget` patterns were tried without finishing a weight.
std::optional<DecodeResult> decode_bounded(const Gf2Matrix& a, const BitVec& syndrome,
                                           const BitVec& y, Rng& rng, std::size_t budget);

struct IrResult {
  Gf2Matrix matrix;
  BitVec syndrome;
  BitVec decoded;
  bool success = false;  // decoded == x
  std::size_t candidates = 0;
};
// Fresh random m x n matrix, syndrome of x, minimum-distance decode of y.
IrResult info_reconcile(const BitVec& x, const BitVec& y, std::size_t m, Rng& rng);
IrResult info_reconcile_with(const Gf2Matrix& a, const BitVec& x, const BitVec& y, Rng& rng);

// S = A x with a fresh random s x n matrix
struct PaResult {
  Gf2Matrix matrix;
  BitVec key;
};
PaResult privacy_amplify(const BitVec& x, std::size_t s, Rng& rng);

}  // namespace nlst

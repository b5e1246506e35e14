#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nlst {

// Binary function of one party's output index. Multi-bit outputs use the
// integer x = sum_i x_i 2^(n-1-i), so the first box is the most significant bit.
class BitFunction {
 public:
  enum class Kind { Mask, Table };

  // parity of all n bits
  static BitFunction xor_all(int nbits);
  // parity of x & mask
  static BitFunction mask(std::uint64_t mask, int nbits);
  static BitFunction table(std::vector<std::uint8_t> values);
  // "xor", "mask:<hex>" or "table:<path>"; the table file holds whitespace
  // or comma separated 0/1 entries.
  static BitFunction parse(const std::string& text, int nbits);

  int eval(std::uint64_t x) const {
    if (kind_ == Kind::Mask) return __builtin_parityll(x & mask_);
    return table_[x];
  }
  std::size_t domain() const { return domain_; }
  Kind kind() const { return kind_; }
  std::uint64_t mask_bits() const { return mask_; }
  int nbits() const { return nbits_; }
  bool is_linear() const { return kind_ == Kind::Mask; }
  std::vector<std::uint8_t> values() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Mask;
  std::uint64_t mask_ = 0;
  int nbits_ = 0;
  std::size_t domain_ = 1;
  std::vector<std::uint8_t> table_;
};

}  // namespace nlst

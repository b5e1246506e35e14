#include "nlst/bitfunction.hpp"

#include <fstream>
#include <sstream>

#include "nlst/error.hpp"

namespace nlst {

BitFunction BitFunction::xor_all(int nbits) {
  if (nbits < 1 || nbits > 62) fail(ErrorKind::Domain, "bit count must be in [1, 62]");
  return mask((std::uint64_t(1) << nbits) - 1, nbits);
}

BitFunction BitFunction::mask(std::uint64_t m, int nbits) {
  if (nbits < 1 || nbits > 62) fail(ErrorKind::Domain, "bit count must be in [1, 62]");
  if (m >> nbits) fail(ErrorKind::Domain, "mask has bits beyond the output width");
  BitFunction f;
  f.kind_ = Kind::Mask;
  f.mask_ = m;
  f.nbits_ = nbits;
  f.domain_ = std::size_t(1) << nbits;
  return f;
}

BitFunction BitFunction::table(std::vector<std::uint8_t> values) {
  if (values.empty()) fail(ErrorKind::Domain, "empty function table");
  for (auto v : values)
    if (v > 1) fail(ErrorKind::Domain, "function table entries must be 0 or 1");
  BitFunction f;
  f.kind_ = Kind::Table;
  f.domain_ = values.size();
  int n = 0;
  while ((std::size_t(1) << n) < values.size()) ++n;
  f.nbits_ = (std::size_t(1) << n) == values.size() ? n : -1;
  f.table_ = std::move(values);
  return f;
}

BitFunction BitFunction::parse(const std::string& text, int nbits) {
  if (text == "xor") return xor_all(nbits);
  if (text.rfind("mask:", 0) == 0) {
    std::string hex = text.substr(5);
    if (hex.rfind("0x", 0) == 0 || hex.rfind("0X", 0) == 0) hex = hex.substr(2);
    if (hex.empty() || hex.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
      fail(ErrorKind::Domain, "mask must be hexadecimal");
    return mask(std::stoull(hex, nullptr, 16), nbits);
  }
  if (text.rfind("table:", 0) == 0) {
    std::ifstream in(text.substr(6));
    if (!in) fail(ErrorKind::Domain, "cannot open function table " + text.substr(6));
    std::stringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    for (char& c : body)
      if (c == ',') c = ' ';
    std::istringstream is(body);
    std::vector<std::uint8_t> v;
    int b;
    while (is >> b) {
      if (b != 0 && b != 1) fail(ErrorKind::Domain, "function table entries must be 0 or 1");
      v.push_back(std::uint8_t(b));
    }
    if (!is.eof()) fail(ErrorKind::Domain, "unreadable entry in function table");
    BitFunction f = table(std::move(v));
    if (nbits > 0 && f.domain() != (std::size_t(1) << nbits))
      fail(ErrorKind::Domain, "function table length does not match 2^n");
    return f;
  }
  fail(ErrorKind::Domain, "unknown function '" + text + "' (expected xor, mask:<hex> or table:<path>)");
}

std::vector<std::uint8_t> BitFunction::values() const {
  std::vector<std::uint8_t> v(domain_);
  for (std::size_t x = 0; x < domain_; ++x) v[x] = std::uint8_t(eval(x));
  return v;
}

std::string BitFunction::describe() const {
  if (kind_ == Kind::Table) return "table[" + std::to_string(domain_) + "]";
  if (mask_ == (std::uint64_t(1) << nbits_) - 1) return "xor";
  std::ostringstream os;
  os << "mask:" << std::hex << mask_;
  return os.str();
}

}  // namespace nlst

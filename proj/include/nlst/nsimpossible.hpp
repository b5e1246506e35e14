#pragma once

#include <cstdint>
#include <vector>

#include "nlst/bitfunction.hpp"
#include "nlst/systems.hpp"

namespace nlst {

// Largest n for which 2^n x 2^n x 4^n tables are materialised.
inline constexpr int kMaxExplicitBoxes = 6;
// Largest n accepted by the Walsh-Hadamard evaluation of the attack distance.
inline constexpr int kMaxAttackBits = 24;
// Largest n accepted by the 4^n reference sum.
inline constexpr int kMaxBruteForceBits = 14;

// n unbiased PR boxes with error eps, grouped as one bipartite system whose
// inputs and outputs are n-bit strings (box 0 is the most significant bit).
struct HammingSystem {
  int n = 1;
  double eps = 0.0;

  HammingSystem(int n, double eps);
  // ((1-eps)/2)^(n-d) (eps/2)^d with d = |x ^ y ^ (u & v)|
  double prob(std::uint64_t x, std::uint64_t y, std::uint64_t u, std::uint64_t v) const;
  Scenario scenario() const;
  System explicit_table() const;
};

// The attack element P^{z0} = c * P with the four-case factor. Rows with
// P0(y) == P1(y) keep c = 1.
struct AttackZ0 {
  HammingSystem box;
  BitFunction f;

  AttackZ0(HammingSystem box, BitFunction f);
  double factor(std::uint64_t x, std::uint64_t y, std::uint64_t u, std::uint64_t v) const;
  double prob(std::uint64_t x, std::uint64_t y, std::uint64_t u, std::uint64_t v) const {
    return factor(x, y, u, v) * box.prob(x, y, u, v);
  }
  // P0(y), P1(y) at input (u, v): mass on f(x) = 0 and f(x) = 1
  std::pair<double, double> split(std::uint64_t y, std::uint64_t u, std::uint64_t v) const;
};

struct Z0Attack {
  AttackZ0 attack;
  System parent;  // explicit P^{n,eps}
  System table;   // explicit P^{z0}
};
// Explicit tables for n <= cap (Size error beyond).
Z0Attack build_z0_attack(int n, double eps, const BitFunction& f, int cap = kMaxExplicitBoxes);

struct AttackTerms {
  double bias = 0.0;      // 1/2 |P(B=0) - P(B=1)|
  double min_sum = 0.0;   // sum_y min(P0(y), P1(y))
  double distance() const { return bias > min_sum ? bias : min_sum; }
};

// Distance from uniform of f(X) under the z0 attack, via a Walsh-Hadamard
// convolution at input 0 (the value is input independent).
AttackTerms attack_terms(int n, double eps, const BitFunction& f);
double attack_distance(int n, double eps, const BitFunction& f);
// Reference 4^n summation at an arbitrary input pair.
AttackTerms attack_terms_bruteforce(int n, double eps, const BitFunction& f, std::uint64_t u = 0,
                                    std::uint64_t v = 0);
// f(x) = g[|x|] for a table g over Hamming weights 0..n.
AttackTerms attack_terms_symmetric(int n, double eps, const std::vector<int>& g);
double attack_distance_symmetric(int n, double eps, const std::vector<int>& g);

// sum_i C(n, n-2i-1) (1-eps)^(n-2i-1) eps^(2i+1)
double xor_attack_distance_closed_form(int n, double eps);
// coefficients c_0..c_n of the XOR distance as a polynomial in eps (c_0 = 0)
std::vector<double> xor_attack_polynomial(int n);

// (-1 + sqrt(1 + 64 eps^2)) / (32 eps); 0 at eps = 0.
double general_lower_bound(double eps);

struct MlCorrelation {
  double correlation = 0.0;  // c_{f(X) g(Y)} with g the maximum-likelihood guess
  double d_fx = 0.0;         // d(f(X))
  double d_gy = 0.0;         // d(g(Y))
  std::vector<std::uint8_t> g;
};
MlCorrelation ml_correlation(int n, double eps, const BitFunction& f);

// Local part 4 eps of two eps-boxes: the 64 relabellings of the two joint
// strategies plus PR x PR with weight 1 - 4 eps. Elements are bipartite
// (Alice = A1A2, Bob = B1B2, first box most significant); the joint strategy
// is signalling between A1 and A2 and only local across the Alice/Bob cut.
struct TwoBoxDecomposition {
  NSPartition partition;
  double weight_joint = 0.0;    // total weight on the orbit of the joint strategy
  double weight_product = 0.0;  // total weight on the orbit of the all-zero strategy
  double weight_pr = 0.0;
  double residual = 0.0;        // max |reconstruction - P^{2,eps}|
};
TwoBoxDecomposition two_box_local_decomposition(double eps);

}  // namespace nlst

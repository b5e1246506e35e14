#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlst/bitfunction.hpp"
#include "nlst/sdp.hpp"
#include "nlst/systems.hpp"

namespace nlst {

// Projector E^output_input of one party. Only outputs 0..X-2 are generators;
// the last output is 1 minus the others.
struct Generator {
  int party = 0, input = 0, output = 0;
  auto operator<=>(const Generator&) const = default;
};
using Word = std::vector<Generator>;

// Stable sort by party, then per party collapse equal neighbours and
// annihilate same-input different-output neighbours. nullopt is the zero word.
std::optional<Word> canonicalize(const Word& w);
// Representative of {w, w^dagger} used as the moment key.
Word moment_key(const Word& canonical);
std::string to_string(const Word& w);

class MomentStructure {
 public:
  MomentStructure(const Scenario& sc, int level);

  const Scenario& scenario() const { return sc_; }
  int level() const { return level_; }
  std::size_t dim() const { return words_.size(); }
  const std::vector<Word>& words() const { return words_; }
  std::size_t moments() const { return moment_words_.size(); }
  const Word& moment_word(std::size_t m) const { return moment_words_[m]; }
  // -1 for the zero word
  int moment(std::size_t i, std::size_t j) const { return index_[i * dim() + j]; }
  bool observable(std::size_t m) const { return observable_[m]; }
  // all (i, j) with moment(i, j) == m, both triangles
  const std::vector<std::pair<int, int>>& pattern(std::size_t m) const { return patterns_[m]; }
  int word_index(const Word& w) const;

  // cells x moments: P = T mu for every non-signalling P
  const Eigen::MatrixXd& injection() const { return T_; }
  // observable moments of a table (marginals read at input 0 of the absent parties)
  std::vector<double> observed_moments(const System& p) const;
  Eigen::MatrixXd gamma(const std::vector<double>& moment_values) const;

  // Rows over the upper triangle of Gamma (i <= j, row-major): entries sharing
  // a moment equal its first occurrence, zero-word entries vanish.
  Eigen::MatrixXd equality_rows() const;
  // max |A_qb vec(Gamma)|
  double equality_residual(const Eigen::MatrixXd& gamma) const;

  // coefficient vector of the projector of (party, input, output) in the word basis
  Eigen::VectorXd projector_vector(int party, int input, int output) const;

 private:
  Scenario sc_;
  int level_;
  std::vector<Word> words_;
  std::vector<Word> moment_words_;
  std::vector<int> index_;
  std::vector<char> observable_;
  std::vector<std::vector<std::pair<int, int>>> patterns_;
  std::map<Word, int> word_pos_;
  Eigen::MatrixXd T_;
};

// <G_m, M> where G_m is the 0/1 pattern of moment m
double pattern_inner(const MomentStructure& ms, std::size_t m, const Eigen::MatrixXd& M);

// Largest Bell value sum_cells c * P over Gamma >= 0, Gamma(1,1) = 1.
struct BellMax {
  double value = 0.0;
  std::vector<double> moments;
  SdpSolution sdp;
};
BellMax max_bell_value(const Scenario& sc, int level, const std::vector<double>& coefficients);
BellMax max_chsh(int level);

// Explicit moment matrix of the maximally entangled two-qubit state with the
// CHSH-optimal measurements reproducing the Tsirelson system.
Eigen::MatrixXd tsirelson_moment_matrix(const MomentStructure& ms);

// Dual certificate of a guessing or key-bit-distance program, possibly a
// tensor product of several. lambda over observed cells, nu over moment
// tuples, blocks X (one per guess outcome tuple, or the pair X1, X2).
struct MomentCertificate {
  enum class Kind { Guess, Xor };
  Kind kind = Kind::Guess;
  std::vector<std::shared_ptr<const MomentStructure>> factors;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> B;  // objective matrix per block (Xor: B[0] only)
  std::vector<double> nu;
  std::vector<double> lambda;

  std::size_t moment_tuples() const;
  Scenario joint_scenario() const;
};

struct MomentCheck {
  bool ok = false;
  double residual = 0.0;  // worst linear residual
  double min_eig = 0.0;
  std::string message;
};
MomentCheck verify_moment_certificate(const MomentCertificate& c, double tol = 1e-6);
// P^T lambda (Guess) or P^T lambda / 2 (Xor)
double certificate_bound(const MomentCertificate& c, const System& joint);

MomentCertificate tensor_moment_dual(const MomentCertificate& a, const MomentCertificate& b);
// single party, one input, one output: bound 1
MomentCertificate trivial_moment_certificate();

struct QuantumCheck {
  bool quantum = false;
  double margin = 0.0;  // max t with Gamma - t I >= 0
};
QuantumCheck quantum_membership(const System& observed, int level, double tol = 1e-6);

struct GuessResult {
  double value = 0.0;  // primal SDP value (upper bound on P_guess)
  double lower = 0.0;  // dual value
  double bound = 0.0;  // P^T lambda from the certificate
  // solver stalled (boundary behaviour); value and lower agree only to ~1e-3
  bool reduced_accuracy = false;
  MomentCertificate certificate;
  SdpSolution sdp;
};

// Probability that a quantum adversary guesses f(x) of party 0 at key_input.
// f maps each output of party 0 to a guess class; empty means identity.
GuessResult guessing_probability_sdp(const System& observed, const std::vector<int>& f, int level,
                                     int key_input = 0);
GuessResult guessing_probability_sdp(const System& observed, const BitFunction& f, int level,
                                     int key_input = 0);

struct BitDistanceResult {
  double distance = 0.0;
  double lower = 0.0;
  double bound = 0.0;
  bool reduced_accuracy = false;
  MomentCertificate certificate;
  SdpSolution sdp;
};
BitDistanceResult bit_distance_sdp(const System& observed, const BitFunction& f, int level,
                                   int key_input = 0);

}  // namespace nlst

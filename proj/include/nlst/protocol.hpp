#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nlst/gf2.hpp"
#include "nlst/rng.hpp"
#include "nlst/systems.hpp"

namespace nlst {

// h(p) in bits, h(0) = h(1) = 0
double binary_entropy(double p);
// e^(-2 n eps^2)
double chernoff_bound(double n, double eps);
// |Z| e^(-k eps^2 / (8 |Z|))
double sampling_bound(double k, double z, double eps);
// log2(sum_i 2^(t_i)); -inf for an empty list
double log2_sum(const std::vector<double>& log2_terms);

double log2_ir_failure_bound(std::size_t n, double delta_prime, std::size_t m);
// 2^(n h(delta') - m), not capped at 1
double ir_failure_bound(std::size_t n, double delta_prime, std::size_t m);
double log2_brassard_salvail_bound(std::size_t n, double delta, double kappa, std::size_t m);
// e^(-2 kappa^2 n) + 2^(n h(delta + kappa) - m)
double brassard_salvail_bound(std::size_t n, double delta, double kappa, std::size_t m);

// 2^s/2 ((1+eps+eta~)/2)^n + 2^s e^(-n/8) + 2^s e^(-(n/64)(eta~/(|U||V| lambda_max))^2)
double log2_pa_distance_bound(std::size_t n, std::size_t s, double eps, double eta_tilde,
                              std::size_t uv, double lambda_max);
double pa_distance_bound(std::size_t n, std::size_t s, double eps, double eta_tilde,
                         std::size_t uv, double lambda_max);
// the three terms above, in log2
std::vector<double> log2_pa_distance_terms(std::size_t n, std::size_t s, double eps,
                                           double eta_tilde, std::size_t uv, double lambda_max);
// (n+1)^(d^2-1) 2^(-(n (-log2 pguess) - m - s)/2)
double log2_quantum_pa_bound(std::size_t n, std::size_t s, std::size_t m, double pguess,
                             int dim);

// 1 - h(delta) - log2(1 + eps)
double ns_key_rate(double eps_cert, double delta);
// lambda1* value on the noisy singlet: 2 - sqrt2 + sqrt2 rho
double ns_certificate_value(double rho);
// 1 - h(rho) - log2(3 - sqrt2 + sqrt2 rho)
double ns_key_rate_curve(double rho);
// root of the curve in (0, 1/2), by bisection
double ns_key_rate_zero();
// -log2 pguess - h(delta)
double q_key_rate(double pguess, double delta);

struct QuantumRatePoint {
  double rho = 0.0;
  double pguess = 0.0;
  double rate = 0.0;
  bool reduced_accuracy = false;
};
// guessing probability of Alice's bit on the noisy singlet, with delta = rho
QuantumRatePoint q_key_rate_curve(double rho, int level = 2);

enum class Adversary { NonSignalling, Quantum };
const char* to_string(Adversary a);

struct ProtocolParams {
  std::size_t n = 10000;
  double k = 0.5;            // probability of a uniformly chosen test input
  double p = 0.9;            // yield floor factor
  double eps = 0.7;          // certificate threshold |U||V| P_est^T lambda (non-signalling)
  double pguess = 0.9;       // certificate threshold for the guessing probability (quantum)
  double delta = 0.05;       // error-rate threshold at the key inputs
  double eta = 0.05;
  double eta_bar = 0.05;
  double eta_tilde = 0.01;
  double kappa = 0.05;       // slack of the reconciliation correctness bound
  bool auto_lengths = true;  // choose s and m from the thresholds
  std::size_t s = 0;
  std::size_t m = 0;
  double lambda_max = 1.0;
  int key_u = 0;
  int key_v = 0;
  double secrecy_target_log2 = -10.0;  // automatic s keeps the leading secrecy term below this
  int postselection_dim = 4;           // d in (n+1)^(d^2-1)

  void validate() const;  // Domain error on out-of-range fields
};

// Counts from one run. Test cells use the source scenario layout.
struct Frequencies {
  Scenario scenario;
  std::size_t n = 0;
  std::vector<std::size_t> test_counts;   // per cell (u, x, v, y)
  std::vector<std::size_t> input_counts;  // per (u, v), u * |V| + v
  std::size_t tests = 0;                  // t: rounds where both chose a uniform input
  std::size_t key_rounds = 0;             // rounds where both kept the key input
  std::size_t key_errors = 0;             // x != y among key rounds
};

struct PeBounds {
  // non-signalling: filter, error-rate filter, robustness; quantum: filter, 0, robustness
  double log2_eps1 = 0.0, log2_eps2 = 0.0, log2_eps_prime = 0.0;
  double eps1() const;
  double eps2() const;
  double eps_prime() const;
};
PeBounds ns_pe_bounds(const ProtocolParams& pp, std::size_t u_count, std::size_t v_count);
PeBounds quantum_pe_bounds(const ProtocolParams& pp, std::size_t u_count, std::size_t v_count,
                           std::size_t x_count, std::size_t y_count);

struct PeOutcome {
  bool accepted = false;
  bool abort_key_yield = false;
  bool abort_test_yield = false;
  bool abort_certificate = false;
  bool abort_error_rate = false;
  double certificate_estimate = 0.0;  // |U||V| P_est^T lambda
  double delta_estimate = 0.0;        // P_est(X != Y | u_k, v_k) on the test rounds
  PeBounds bounds;
};

// lambda is indexed like the source scenario cells. The certificate threshold is
// pp.eps (non-signalling) or pp.pguess (quantum).
PeOutcome parameter_estimation(const Frequencies& f, const ProtocolParams& pp,
                               const std::vector<double>& lambda, Adversary adv);

// Counts of n rounds on an i.i.d. source, drawn directly from the multinomial
// distribution of (branch pair, inputs, outputs).
Frequencies sample_frequencies(const System& source, const ProtocolParams& pp, Rng& rng);

// Bipartite source with Alice inputs {0, 1} and Bob inputs {0, 1, 2}: the noisy
// singlet on v < 2, and on v = 2 Bob measures along Alice's input 0.
System ekert_system(double rho);
// lambda1* on the v < 2 cells of ekert_system, zero elsewhere
std::vector<double> ekert_ns_certificate();
// cells of `from` copied into the matching cells of `to` (inputs and outputs of
// `from` must fit inside `to`), zero elsewhere
std::vector<double> embed_weights(const Scenario& from, const std::vector<double>& w,
                                  const Scenario& to);
// lambda1* as cell weights on the 2x2 binary scenario
std::vector<double> lambda1_star_weights();

struct KeyRateReport {
  Adversary adversary = Adversary::NonSignalling;
  double rate = 0.0;            // asymptotic rate at the estimated parameters
  double threshold_rate = 0.0;  // asymptotic rate at the acceptance thresholds
  double finite_rate = 0.0;     // s / n
  std::size_t n_key = 0, s = 0, m = 0;
  double log2_secrecy = 0.0;      // privacy amplification bound
  double log2_correctness = 0.0;  // reconciliation bound on the key rounds
  PeOutcome pe;
  bool accepted = false;
  bool ir_decoded = false;  // Bob's decode ran (false when skipped)
  bool keys_equal = false;
  std::string status;
};

struct Transcript {
  ProtocolParams params;
  std::uint64_t seed = 0;
  Adversary adversary = Adversary::NonSignalling;
  Scenario scenario;
  std::vector<std::uint8_t> u, v, x, y;
  std::vector<std::uint8_t> alice_test, bob_test;  // 1 = uniform test input branch
  std::vector<std::size_t> test_indices, key_indices;
  Frequencies frequencies;
  Gf2Matrix ir_matrix;
  BitVec syndrome;
  BitVec decoded;
  Gf2Matrix pa_matrix;
  BitVec key_a, key_b;
};

struct SimulationResult {
  Transcript transcript;
  KeyRateReport report;
};

// Weighted error-pattern enumeration stops after this many candidates; Bob's
// key is then not produced and only the analytic bound is reported.
inline constexpr std::size_t kDecodeBudget = std::size_t(1) << 24;

SimulationResult simulate(const ProtocolParams& pp, const System& source, Adversary adv,
                          const std::vector<double>& lambda, std::uint64_t seed);
// ekert_system(rho) with lambda1* (non-signalling) or the level-`level`
// guessing certificate of the noisy singlet (quantum)
SimulationResult simulate_ekert(const ProtocolParams& pp, double rho, Adversary adv,
                                std::uint64_t seed, int level = 2);

std::string transcript_to_json(const Transcript& t);
std::string report_to_json(const KeyRateReport& r, int precision = 6);

}  // namespace nlst

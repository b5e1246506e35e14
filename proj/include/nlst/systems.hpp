#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nlst/rng.hpp"

namespace nlst {

// Largest dense table the library will allocate.
inline constexpr std::size_t kMaxTableSize = std::size_t(1) << 28;

// Alphabet sizes of a multi-party box. Tables are flattened party by party,
// (input, output) inside a party, first party slowest, last output fastest.
class Scenario {
 public:
  Scenario() = default;
  Scenario(std::vector<int> inputs, std::vector<int> outputs);

  static Scenario bipartite(int nu, int nx, int nv, int ny);
  static Scenario binary(int parties);  // every party: 2 inputs, 2 outputs

  std::size_t parties() const { return inputs_.size(); }
  const std::vector<int>& inputs() const { return inputs_; }
  const std::vector<int>& outputs() const { return outputs_; }
  int inputs(std::size_t party) const { return inputs_[party]; }
  int outputs(std::size_t party) const { return outputs_[party]; }

  std::size_t size() const { return size_; }
  std::size_t input_combos() const;
  std::size_t output_combos() const;
  // stride of the (u_i, x_i) block of party i
  std::size_t stride(std::size_t party) const { return stride_[party]; }

  std::size_t index(const int* u, const int* x) const;
  std::size_t index(const std::vector<int>& u, const std::vector<int>& x) const {
    return index(u.data(), x.data());
  }
  void decode(std::size_t idx, int* u, int* x) const;

  Scenario concat(const Scenario& other) const;
  bool is_bipartite_binary() const;

  bool operator==(const Scenario& o) const {
    return inputs_ == o.inputs_ && outputs_ == o.outputs_;
  }
  bool operator!=(const Scenario& o) const { return !(*this == o); }

 private:
  std::vector<int> inputs_, outputs_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

// Table whose entries need not be normalised (weighted systems, LP deltas).
struct SubnormalizedSystem {
  Scenario scenario;
  std::vector<double> table;
};

class System {
 public:
  System() = default;
  // Validates entries and per-input normalisation.
  System(Scenario sc, std::vector<double> table, double tol = 1e-9);
  // Skips validation; for tables already known to be well formed.
  static System trusted(Scenario sc, std::vector<double> table);

  const Scenario& scenario() const { return sc_; }
  const std::vector<double>& table() const { return p_; }
  double operator[](std::size_t i) const { return p_[i]; }
  double at(const std::vector<int>& u, const std::vector<int>& x) const {
    return p_[sc_.index(u, x)];
  }
  std::size_t size() const { return p_.size(); }

 private:
  Scenario sc_;
  std::vector<double> p_;
};

struct NsReport {
  bool ok = true;
  double worst = 0.0;
  std::vector<std::string> violations;
};

// Structural check: sizes, range, normalisation. Throws on malformed length.
NsReport check_normalized(const Scenario& sc, const std::vector<double>& t,
                          double tol);
NsReport is_nonsignalling(const Scenario& sc, const std::vector<double>& t,
                          double tol = 1e-9, std::size_t max_report = 32);
NsReport is_nonsignalling(const System& s, double tol = 1e-9,
                          std::size_t max_report = 32);

double chsh_value(const System& s);
// Chained expression with N inputs per side (inputs 0-based):
// terms P(x=y|u,u), P(x=y|u,u+1) for u < N-1, and P(x!=y|N-1,0).
double braunstein_caves_value(const System& s, int N);

System pr_box();
System unbiased_pr_box(double eps);
System tsirelson_system();
System noisy_singlet_system(double rho);
System uniform_system(const Scenario& sc);
// x xor y = [u = N-1 and v = 0] with uniform marginals; scores 1 on the chain
System chained_pr_box(int N);
System mix(const System& a, const System& b, double weight_a);

System tensor(const System& a, const System& b);
System tensor_power(const System& a, int n);
// Keeps the listed parties; the others are fed input 0 and summed out.
System marginal(const System& s, const std::vector<int>& keep);
System condition(const System& s, int party, int input, int output);
// Merge parties into super-parties; each group becomes one party whose input
// and output are the tuples of its members (first member most significant).
System group_parties(const System& s, const std::vector<std::vector<int>>& groups);

// The 8 local relabellings that turn any bipartite binary box into an
// unbiased one with the same CHSH value.
System depolarize_map(const System& s, int k);
System depolarize_expectation(const System& s);
System depolarize(const System& s, Rng& rng);
// Independent relabelling k_i of every box in a product of bipartite binary
// boxes laid out as (A1,B1,A2,B2,...); ks.size() boxes.
System depolarize_boxes(const System& s, const std::vector<int>& ks);

// One function u -> x per party.
using LocalStrategy = std::vector<std::vector<int>>;

double count_local_vertices(const Scenario& sc);
void for_each_local_vertex(const Scenario& sc, double cap,
                           const std::function<void(const LocalStrategy&)>& fn);
std::vector<System> local_deterministic_vertices(const Scenario& sc,
                                                 double cap = 1e6);
System deterministic_system(const Scenario& sc, const LocalStrategy& f);
// Table indices carrying probability one, one per joint input, in input order.
std::vector<std::uint32_t> vertex_support(const Scenario& sc, const LocalStrategy& f);

struct NSPartition {
  std::vector<std::pair<double, System>> elements;
};

struct PartitionCheck {
  bool ok = true;
  double weight_error = 0.0;
  double reconstruction_error = 0.0;
  std::string message;
};
PartitionCheck check_partition(const System& parent, const NSPartition& w,
                               double tol = 1e-9);

System system_from_json(const std::string& text, double tol = 1e-9);
std::string system_to_json(const System& s);

}  // namespace nlst

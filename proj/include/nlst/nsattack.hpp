#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "nlst/bitfunction.hpp"
#include "nlst/lp.hpp"
#include "nlst/systems.hpp"

namespace nlst {

// Rows of the non-signalling equalities A_ns P = 0. The last party's rows come
// first; within a party rows run over the other parties' (input, output)
// context in table order, then over adjacent input pairs (u, u+1).
Eigen::SparseMatrix<double> ns_constraint_matrix(const Scenario& sc);
Eigen::MatrixXd build_ns_constraint_matrix(const Scenario& sc);

// Convenience: +/-1 objective on the cells of the key input, sign (-1)^f(x)
// where x is party 0's output.
std::vector<double> distance_objective(const Scenario& sc, const BitFunction& f,
                                       const std::vector<int>& inputs);

// Dual vector for rows [A_ns; -A_ns; I; -I] of a product of factor layouts.
// Single systems have one factor. lambda is indexed like the Kronecker product
// of the factor row spaces, first factor slowest.
struct DualCertificate {
  std::vector<Scenario> factors;
  std::vector<std::size_t> ns_rows;
  std::vector<double> lambda;

  std::size_t layout_rows(std::size_t k) const {
    return 2 * ns_rows[k] + 2 * factors[k].size();
  }
};

// [A_ns; -A_ns; I; -I] of one factor
Eigen::SparseMatrix<double> certificate_matrix(const Scenario& sc);

// The distance LP in the four-block row layout with free Delta:
// max b^T Delta  s.t. [A; -A; I; -I] Delta <= [0; 0; P; P].
LinearProgram distance_lp_program(const System& sys, const std::vector<double>& b);

struct CertificateCheck {
  bool ok = false;
  double worst = 0.0;  // max |A^T lambda - b| and negativity of lambda
  std::string message;
};
// Checks lambda >= 0 and (A_1 x ... x A_n)^T lambda = b_1 x ... x b_n, one
// mode product at a time.
CertificateCheck verify_certificate(const DualCertificate& c,
                                    const std::vector<std::vector<double>>& b,
                                    double tol = 1e-9);

// c^T lambda with the product of the +/-I row blocks paired with the joint table.
double certified_value(const DualCertificate& c, const System& joint);

struct AttackResult {
  double distance = 0.0;
  double certified = 0.0;  // c^T lambda / 2
  double p = 0.0;          // weight of the first partition element
  NSPartition witness;
  DualCertificate certificate;
  std::vector<double> delta;
};

// Distance from uniform of f(party 0 output) at the given joint input, against
// a non-signalling adversary holding a two-outcome partition.
AttackResult distance_from_uniform_lp(const System& sys, const BitFunction& f,
                                      const std::vector<int>& inputs, double tol = 1e-9);

bool is_partition_element(const System& parent, double p, const System& candidate,
                          double tol = 1e-9);

// Eight deterministic strategies (one per CHSH error cell) plus a PR box.
NSPartition optimal_single_box_partition(const System& sys, double tol = 1e-12);

struct LocalPartResult {
  double value = 0.0;
  std::vector<std::pair<double, LocalStrategy>> mixture;
  std::vector<double> dual;  // y >= 0 with y^T D_L >= 1 for every vertex
  std::size_t vertices = 0;
  std::size_t iterations = 0;
};
// max sum q_L s.t. sum q_L D_L <= P, q >= 0, with one column per local
// deterministic vertex.
LocalPartResult local_part(const System& sys, double vertex_cap = 1e6);

DualCertificate lambda1_star();
DualCertificate tensor_dual(const DualCertificate& a, const DualCertificate& b);
DualCertificate tensor_power(const DualCertificate& a, int n);

// Half the certified value: a bound on the distance from uniform of the XOR of
// the factors' key bits, evaluated on the joint system.
double xor_bound(const DualCertificate& c, const System& joint);

struct EventDecomposition {
  std::vector<double> weights;     // lambda_+I + lambda_-I per cell
  double lambda_max = 0.0;
  std::vector<double> head_prob;   // weights / lambda_max
};
EventDecomposition dual_event_decomposition(const DualCertificate& c);

}  // namespace nlst

#pragma once

#include <string>
#include <vector>

#include "qst/amplitudes.h"
#include "qst/chain.h"
#include "qst/linalg.h"

namespace qst {

// rho^R_ij = sum_nm A_ij^nm rho^S_nm, stored as a d^2 x d^2 matrix with row
// i*d + j and column n*d + m. Both sides use the block_basis ordering.
class DynamicalMap {
 public:
  DynamicalMap() = default;
  explicit DynamicalMap(int d);
  DynamicalMap(int d, ComplexMatrix elements);

  int d() const { return d_; }
  cplx operator()(int i, int j, int n, int m) const { return el_(i * d_ + j, n * d_ + m); }
  cplx& at(int i, int j, int n, int m) { return el_(i * d_ + j, n * d_ + m); }
  const ComplexMatrix& elements() const { return el_; }

  // rho given row-major d x d.
  std::vector<cplx> apply(const std::vector<cplx>& rho) const;
  // <psi| Lambda(|psi><psi|) |psi>.
  double pure_state_fidelity(const std::vector<cplx>& psi) const;

 private:
  int d_ = 0;
  ComplexMatrix el_;
};

// Sparse copy of the nonzero elements for repeated fidelity evaluation.
class PureStateFidelity {
 public:
  explicit PureStateFidelity(const DynamicalMap& map, double drop_below = 0.0);
  double operator()(const std::vector<cplx>& psi) const;
  int d() const { return d_; }

 private:
  struct Entry {
    int i, j, n, m;
    cplx value;
  };
  int d_;
  std::vector<Entry> entries_;
};

struct CptpReport {
  double trace_preservation = 0.0;  // max |sum_i A_ii^nm - delta_nm|
  double hermiticity = 0.0;         // max |A_ij^nm - conj(A_ji^mn)|
  double diagonal_bounds = 0.0;     // max violation of 0 <= A_ii^nn <= 1 (incl. imaginary part)
  double total_trace = 0.0;         // |sum_{i,n,m} A_ii^nm - d|
  double choi_min_eigenvalue = 0.0;
  double tolerance = 1e-8;
  bool passed = true;
  std::vector<std::string> violations;  // names of failed constraints
};

CptpReport validate_cptp(const DynamicalMap& map, double tol = 1e-8);
// Throws ConstructionError with the report summary if the map fails.
void require_cptp(const DynamicalMap& map, const char* who, double tol = 1e-8);

DynamicalMap identity_map(int d);
// Completely dephasing channel A_ij^nm = delta_ij delta_nm delta_in (the LOCC benchmark map).
DynamicalMap dephasing_map(int d);

// Amplitude-damping structure of a single excitation with amplitude f.
DynamicalMap one_qubit_map(cplx f);

// Closed-form two-qubit map for sender {1,2}, receiver {N-1,N}, mirror labels
// (label 1 at site N, label 2 at site N-1).
DynamicalMap two_qubit_map(const AmplitudeMatrix& F, int N);

// General n-qubit free-fermion map from minors of F(t); environment is every
// site outside the receiver block.
DynamicalMap map_from_amplitudes(const AmplitudeMatrix& F, int n, ReceiverLabeling labeling);

// Exact map from the block-diagonal oracle (supports delta != 0).
DynamicalMap map_from_evolution(const ChainSpec& spec, int n, double t,
                                ReceiverLabeling labeling = ReceiverLabeling::mirror);

// Qubits of a come first, then qubits of b; result reordered into block_basis order.
DynamicalMap tensor_product(const DynamicalMap& a, const DynamicalMap& b);
DynamicalMap tensor_power(const DynamicalMap& a, int copies);

std::string map_to_json(const DynamicalMap& map);
// Re-validates; throws ValidationError on malformed input or CPTP failure.
DynamicalMap map_from_json(const std::string& text);

}  // namespace qst

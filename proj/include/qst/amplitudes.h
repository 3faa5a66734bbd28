#pragma once

#include <vector>

#include "qst/chain.h"
#include "qst/linalg.h"

namespace qst {

// F(t) with entry (i, j) = f_i^j(t) = sum_k exp(-i w_k t) phi_{jk} phi_{ik}.
struct AmplitudeMatrix {
  double time = 0.0;
  ComplexMatrix entries;  // 0-based storage
  double delta = 0.0;     // anisotropy of the source spec; minors require 0

  int N() const { return static_cast<int>(entries.rows()); }
  cplx f(int i, int j) const { return entries(i - 1, j - 1); }  // 1-based sites
};

AmplitudeMatrix transition_matrix(const EigenDecomposition& eig, double t);
// Rejects delta != 0 with FreeFermionError.
AmplitudeMatrix transition_matrix(const ChainSpec& spec, double t);

// Minor of F on 1-based, strictly ascending site lists.
cplx multi_amplitude(const AmplitudeMatrix& F, const std::vector<int>& senders,
                     const std::vector<int>& receivers);

// f_S^S for every nonempty S subset of {1..n}, ordered by cardinality then
// lexicographically. Receiver sites come from the labeling and are sorted
// ascending before taking the minor.
struct AmplitudeSet {
  int n = 0;
  ReceiverLabeling labeling = ReceiverLabeling::mirror;
  std::vector<std::vector<int>> subsets;  // 1-based labels
  std::vector<cplx> values;

  std::size_t size() const { return values.size(); }
  cplx sum() const;
};
using MirrorAmplitudeSet = AmplitudeSet;

AmplitudeSet block_amplitudes(const AmplitudeMatrix& F, int n, ReceiverLabeling labeling);
AmplitudeSet mirror_amplitudes(const AmplitudeMatrix& F, int n);

// Nonempty subsets of {1..n} in AmplitudeSet order.
std::vector<std::vector<int>> amplitude_subsets(int n);
std::vector<int> receiver_sites_for(const std::vector<int>& labels, int N, int n,
                                    ReceiverLabeling labeling);

// Evaluates only the rows x cols block of F(t) from precomputed eigenvector
// products. Sites are 1-based.
class BlockPropagator {
 public:
  BlockPropagator(const EigenDecomposition& eig, std::vector<int> rows, std::vector<int> cols);
  void evaluate(double t, std::vector<cplx>& out) const;  // row-major rows x cols
  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_.size(); }

 private:
  std::vector<double> omega_;
  std::vector<int> rows_, cols_;
  std::vector<double> weights_;  // [(r * cols + c) * K + k] = phi_{rk} phi_{ck}
};

// Sender-to-receiver amplitude set at arbitrary times without building F(t).
class BlockAmplitudeEvaluator {
 public:
  BlockAmplitudeEvaluator(const ChainSpec& spec, int n, ReceiverLabeling labeling);
  BlockAmplitudeEvaluator(const EigenDecomposition& eig, int N, int n, ReceiverLabeling labeling);

  AmplitudeSet operator()(double t) const;
  // Fills values in AmplitudeSet order; `scratch` is reused across calls.
  void evaluate(double t, std::vector<cplx>& values, std::vector<cplx>& scratch) const;

  int n() const { return n_; }
  ReceiverLabeling labeling() const { return labeling_; }
  const std::vector<std::vector<int>>& subsets() const { return subsets_; }

 private:
  int N_, n_;
  ReceiverLabeling labeling_;
  BlockPropagator prop_;
  std::vector<std::vector<int>> subsets_;
  std::vector<std::vector<int>> row_idx_, col_idx_;  // 0-based into the n x n block
};

// Determinant of a k x k row-major matrix, k <= 4, without heap allocation.
cplx det_small(const cplx* a, int k);

}  // namespace qst

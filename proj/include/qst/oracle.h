#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <unordered_map>
#include <vector>

#include "qst/chain.h"
#include "qst/linalg.h"

namespace qst {

struct PureState {
  std::vector<cplx> amplitudes;

  int d() const { return static_cast<int>(amplitudes.size()); }
  double norm() const;
  // Throws ValidationError unless sum |a_p|^2 = 1 within tol.
  void validate(double tol = 1e-10) const;
};

inline constexpr std::size_t kMaxBlockDimension = std::size_t{1} << 14;

// k-excitation sector of an N-site chain; bit (i-1) of a mask is site i.
// Masks are enumerated in lexicographic order of their site lists.
class BlockSpace {
 public:
  BlockSpace(int N, int k);
  int N() const { return N_; }
  int k() const { return k_; }
  std::size_t dim() const { return masks_.size(); }
  std::uint64_t mask(std::size_t idx) const { return masks_[idx]; }
  // -1 if the mask is not in the block.
  long index_of(std::uint64_t mask) const;

 private:
  int N_, k_;
  std::vector<std::uint64_t> masks_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

// Exact e^{-iHt} inside one excitation block of
//   H = sum_i (J_i/2)(s+_i s-_{i+1} + h.c.) + sum_i h_i n_i
//     + delta sum_i (n_i n_{i+1} - (n_i + n_{i+1})/2),
// so the vacuum has energy 0 and the one-excitation block equals the
// single-particle matrix when delta = 0.
class BlockEvolver {
 public:
  BlockEvolver(const ChainSpec& spec, int k);
  ~BlockEvolver();
  BlockEvolver(BlockEvolver&&) noexcept;
  BlockEvolver& operator=(BlockEvolver&&) noexcept;

  const BlockSpace& space() const { return space_; }
  std::vector<cplx> evolve(const std::vector<cplx>& psi, double t) const;
  double energy(const std::vector<cplx>& psi) const;
  const std::vector<double>& energies() const;

 private:
  struct Impl;
  BlockSpace space_;
  std::unique_ptr<Impl> impl_;
};

PureState evolve_block(const ChainSpec& spec, int k, const PureState& state, double t);

// Evolves every sender basis state |p>_S |0...0> and regroups the result as
// out[E](i, p) = <i_R, E | U(t) | p_S, 0>, with i a receiver basis index and E
// the configuration of all non-receiver sites.
class SenderEvolution {
 public:
  SenderEvolution(const ChainSpec& spec, int n, ReceiverLabeling labeling);

  int n() const { return n_; }
  int d() const { return 1 << n_; }
  // Environment mask -> d x d matrix (row receiver index i, column sender index p).
  std::unordered_map<std::uint64_t, ComplexMatrix> at(double t) const;

 private:
  ChainSpec spec_;
  int n_;
  ReceiverLabeling labeling_;
  std::vector<BlockEvolver> evolvers_;  // one per excitation count 0..n
};

// Receiver density matrix (receiver basis ordering) for a pure sender input.
ComplexMatrix receiver_density_matrix(const ChainSpec& spec, const PureState& input, double t,
                                      ReceiverLabeling labeling = ReceiverLabeling::mirror);
double transfer_fidelity_exact(const ChainSpec& spec, const PureState& input, double t,
                               ReceiverLabeling labeling = ReceiverLabeling::mirror);

struct McResult {
  std::size_t samples = 0;
  double mean = 0.0;
  double second_moment = 0.0;  // sample mean of F^2
  double std_error_mean = 0.0;
  double std_error_second_moment = 0.0;
  std::uint64_t seed = 0;
};

using StateEvaluator = std::function<double(const std::vector<cplx>&)>;

inline constexpr std::size_t kMcChunk = std::size_t{1} << 16;

// Normalized vector of i.i.d. standard complex Gaussians (Haar distributed).
std::vector<cplx> haar_state(int d, std::mt19937_64& rng);

// Samples are split into fixed chunks, chunk c seeded from (seed, c), so the
// result does not depend on the thread count.
McResult haar_sample_fidelity(const StateEvaluator& evaluator, int d, std::size_t samples,
                              std::uint64_t seed, int threads = 0);
// Each of the n qubits drawn Haar-independently; the product vector is in block_basis order.
McResult haar_sample_product_states(const StateEvaluator& evaluator, int n, std::size_t samples,
                                    std::uint64_t seed, int threads = 0);

}  // namespace qst

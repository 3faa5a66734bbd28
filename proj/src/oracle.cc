#include "qst/oracle.h"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "qst/basis.h"
#include "qst/errors.h"
#include "qst/parallel.h"

namespace qst {

double PureState::norm() const {
  double s = 0.0;
  for (const cplx& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

void PureState::validate(double tol) const {
  if (amplitudes.empty()) throw ValidationError("pure state: empty amplitude vector");
  double s = 0.0;
  for (const cplx& a : amplitudes) s += std::norm(a);
  if (std::abs(s - 1.0) > tol) throw ValidationError("pure state: not normalized");
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

BlockSpace::BlockSpace(int N, int k) : N_(N), k_(k) {
  if (N < 1 || N > 62) throw DimensionError("BlockSpace: N must be in [1, 62]");
  if (k < 0 || k > N) throw DimensionError("BlockSpace: excitation count out of range");
  if (binomial(N, k) > static_cast<double>(kMaxBlockDimension))
    throw DimensionError("oracle: block dimension C(" + std::to_string(N) + "," + std::to_string(k) +
                         ") exceeds the cap 2^14");
  for (const auto& sites : subsets_of_size(N, k)) {
    std::uint64_t m = 0;
    for (int s : sites) m |= std::uint64_t{1} << (s - 1);
    lookup_.emplace(m, masks_.size());
    masks_.push_back(m);
  }
}

long BlockSpace::index_of(std::uint64_t mask) const {
  auto it = lookup_.find(mask);
  return it == lookup_.end() ? -1 : static_cast<long>(it->second);
}

struct BlockEvolver::Impl {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
  Eigen::MatrixXd hamiltonian;
  std::vector<double> energy_list;
};

BlockEvolver::BlockEvolver(const ChainSpec& spec, int k) : space_(spec.N, k), impl_(new Impl) {
  spec.validate();
  const int N = spec.N;
  const std::vector<double> J = spec.effective_couplings();
  const std::size_t dim = space_.dim();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t a = 0; a < dim; ++a) {
    const std::uint64_t m = space_.mask(a);
    double diag = 0.0;
    for (int i = 0; i < N; ++i)
      if (m >> i & 1) diag += spec.fields[i];
    for (int i = 0; i + 1 < N; ++i) {
      const int ni = m >> i & 1, nj = m >> (i + 1) & 1;
      diag += spec.delta * (ni * nj - 0.5 * (ni + nj));
      if (ni != nj) {
        const std::uint64_t hopped = m ^ (std::uint64_t{3} << i);
        H(space_.index_of(hopped), a) = 0.5 * J[i];
      }
    }
    H(a, a) = diag;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
  if (solver.info() != Eigen::Success) throw SolverError("oracle: block diagonalization failed", k);
  impl_->energies = solver.eigenvalues();
  impl_->vectors = solver.eigenvectors();
  impl_->hamiltonian = std::move(H);
  impl_->energy_list.assign(impl_->energies.data(), impl_->energies.data() + dim);
}

BlockEvolver::~BlockEvolver() = default;
BlockEvolver::BlockEvolver(BlockEvolver&&) noexcept = default;
BlockEvolver& BlockEvolver::operator=(BlockEvolver&&) noexcept = default;

const std::vector<double>& BlockEvolver::energies() const { return impl_->energy_list; }

std::vector<cplx> BlockEvolver::evolve(const std::vector<cplx>& psi, double t) const {
  const std::size_t dim = space_.dim();
  if (psi.size() != dim) throw DimensionError("BlockEvolver::evolve: state has wrong dimension");
  Eigen::Map<const Eigen::VectorXcd> in(psi.data(), dim);
  Eigen::VectorXcd c = impl_->vectors.transpose().cast<cplx>() * in;
  for (std::size_t k = 0; k < dim; ++k) c[k] *= std::polar(1.0, -impl_->energies[k] * t);
  Eigen::VectorXcd out = impl_->vectors.cast<cplx>() * c;
  return std::vector<cplx>(out.data(), out.data() + dim);
}

double BlockEvolver::energy(const std::vector<cplx>& psi) const {
  const std::size_t dim = space_.dim();
  if (psi.size() != dim) throw DimensionError("BlockEvolver::energy: state has wrong dimension");
  Eigen::Map<const Eigen::VectorXcd> v(psi.data(), dim);
  return (v.adjoint() * (impl_->hamiltonian.cast<cplx>() * v))(0).real();
}

PureState evolve_block(const ChainSpec& spec, int k, const PureState& state, double t) {
  BlockEvolver ev(spec, k);
  if (static_cast<std::size_t>(state.d()) != ev.space().dim())
    throw DimensionError("evolve_block: state dimension must be C(N, k)");
  return PureState{ev.evolve(state.amplitudes, t)};
}

SenderEvolution::SenderEvolution(const ChainSpec& spec, int n, ReceiverLabeling labeling)
    : spec_(spec), n_(n), labeling_(labeling) {
  spec.validate();
  if (n < 1 || n != spec.n())
    throw ValidationError("oracle: block size n must equal the spec's sender block size");
  for (int k = 0; k <= n; ++k) evolvers_.emplace_back(spec, k);
}

std::unordered_map<std::uint64_t, ComplexMatrix> SenderEvolution::at(double t) const {
  const int d = 1 << n_;
  const int N = spec_.N;
  const std::vector<int> label_index = mask_to_index(n_);
  std::vector<int> label_bit(n_);
  std::uint64_t receiver_bits = 0;
  for (int s = 1; s <= n_; ++s) {
    label_bit[s - 1] = receiver_site(N, n_, s, labeling_) - 1;
    receiver_bits |= std::uint64_t{1} << label_bit[s - 1];
  }

  std::unordered_map<std::uint64_t, ComplexMatrix> out;
  for (const BasisIndex& p : block_basis(n_)) {
    const BlockEvolver& ev = evolvers_[p.excitations];
    std::uint64_t init = 0;
    for (int s : p.occupied) init |= std::uint64_t{1} << (s - 1);
    std::vector<cplx> psi(ev.space().dim());
    psi[ev.space().index_of(init)] = 1.0;
    psi = ev.evolve(psi, t);
    for (std::size_t b = 0; b < psi.size(); ++b) {
      const std::uint64_t mask = ev.space().mask(b);
      std::uint32_t labels = 0;
      for (int s = 0; s < n_; ++s)
        if (mask >> label_bit[s] & 1) labels |= 1u << s;
      const std::uint64_t env = mask & ~receiver_bits;
      auto it = out.find(env);
      if (it == out.end()) it = out.emplace(env, ComplexMatrix(d, d)).first;
      it->second(label_index[labels], p.linear_index) += psi[b];
    }
  }
  return out;
}

ComplexMatrix receiver_density_matrix(const ChainSpec& spec, const PureState& input, double t,
                                      ReceiverLabeling labeling) {
  input.validate();
  const int n = spec.n();
  if (input.d() != (1 << n)) throw DimensionError("receiver_density_matrix: input must have dimension 2^n");
  SenderEvolution evo(spec, n, labeling);
  const int d = input.d();
  ComplexMatrix rho(d, d);
  for (const auto& [env, M] : evo.at(t)) {
    std::vector<cplx> v(d);
    for (int i = 0; i < d; ++i)
      for (int p = 0; p < d; ++p) v[i] += M(i, p) * input.amplitudes[p];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) rho(i, j) += v[i] * std::conj(v[j]);
  }
  return rho;
}

double transfer_fidelity_exact(const ChainSpec& spec, const PureState& input, double t,
                               ReceiverLabeling labeling) {
  const ComplexMatrix rho = receiver_density_matrix(spec, input, t, labeling);
  const int d = input.d();
  cplx f{};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) f += std::conj(input.amplitudes[i]) * rho(i, j) * input.amplitudes[j];
  return f.real();
}

std::vector<cplx> haar_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> v(d);
  double s = 0.0;
  for (auto& a : v) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    a = {re, im};
    s += re * re + im * im;
  }
  const double inv = 1.0 / std::sqrt(s);
  for (auto& a : v) a *= inv;
  return v;
}

namespace {

struct Moments {
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
};

McResult run_chunks(std::size_t samples, std::uint64_t seed, int threads,
                    const std::function<std::vector<cplx>(std::mt19937_64&)>& draw,
                    const StateEvaluator& evaluator) {
  if (samples < 1) throw ValidationError("Monte Carlo: samples must be >= 1");
  const std::size_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<Moments> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    const std::size_t begin = c * kMcChunk;
    const std::size_t end = std::min(samples, begin + kMcChunk);
    Moments m;
    for (std::size_t s = begin; s < end; ++s) {
      const double f = evaluator(draw(rng));
      const double f2 = f * f;
      m.s1 += f;
      m.s2 += f2;
      m.s4 += f2 * f2;
    }
    partial[c] = m;
  });
  Moments tot;
  for (const auto& m : partial) {
    tot.s1 += m.s1;
    tot.s2 += m.s2;
    tot.s4 += m.s4;
  }
  McResult r;
  r.samples = samples;
  r.seed = seed;
  const double ns = static_cast<double>(samples);
  r.mean = tot.s1 / ns;
  r.second_moment = tot.s2 / ns;
  const double var1 = std::max(0.0, r.second_moment - r.mean * r.mean);
  const double var2 = std::max(0.0, tot.s4 / ns - r.second_moment * r.second_moment);
  r.std_error_mean = std::sqrt(var1 / ns);
  r.std_error_second_moment = std::sqrt(var2 / ns);
  return r;
}

}  // namespace

McResult haar_sample_fidelity(const StateEvaluator& evaluator, int d, std::size_t samples,
                              std::uint64_t seed, int threads) {
  if (d < 1) throw ValidationError("haar_sample_fidelity: d must be >= 1");
  return run_chunks(samples, seed, threads, [d](std::mt19937_64& rng) { return haar_state(d, rng); },
                    evaluator);
}

McResult haar_sample_product_states(const StateEvaluator& evaluator, int n, std::size_t samples,
                                    std::uint64_t seed, int threads) {
  if (n < 1 || n > 16) throw ValidationError("haar_sample_product_states: n must be in [1, 16]");
  const auto basis = block_basis(n);
  std::vector<std::uint32_t> masks;
  for (const auto& b : basis) masks.push_back(label_mask(b));
  auto draw = [n, masks](std::mt19937_64& rng) {
    std::vector<std::vector<cplx>> qubits;
    for (int q = 0; q < n; ++q) qubits.push_back(haar_state(2, rng));
    std::vector<cplx> psi(masks.size());
    for (std::size_t p = 0; p < masks.size(); ++p) {
      cplx a{1.0, 0.0};
      for (int q = 0; q < n; ++q) a *= qubits[q][masks[p] >> q & 1];
      psi[p] = a;
    }
    return psi;
  };
  return run_chunks(samples, seed, threads, draw, evaluator);
}

}  // namespace qst

#include "qst/amplitudes.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "qst/basis.h"
#include "qst/errors.h"

namespace qst {

AmplitudeMatrix transition_matrix(const EigenDecomposition& eig, double t) {
  const std::size_t N = eig.size();
  std::vector<cplx> phase(N);
  for (std::size_t k = 0; k < N; ++k) phase[k] = std::polar(1.0, -eig.eigenvalues[k] * t);
  AmplitudeMatrix F;
  F.time = t;
  F.entries = ComplexMatrix(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i; j < N; ++j) {
      cplx acc{};
      for (std::size_t k = 0; k < N; ++k) acc += phase[k] * (eig.phi(i, k) * eig.phi(j, k));
      F.entries(i, j) = acc;
      F.entries(j, i) = acc;
    }
  }
  return F;
}

AmplitudeMatrix transition_matrix(const ChainSpec& spec, double t) {
  spec.require_free_fermion();
  return transition_matrix(spectral(spec), t);
}

namespace {

std::vector<int> to_zero_based(const std::vector<int>& sites, int N, const char* what) {
  std::vector<int> out;
  out.reserve(sites.size());
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (sites[k] < 1 || sites[k] > N)
      throw DimensionError(std::string("multi_amplitude: ") + what + " site out of range");
    if (k > 0 && sites[k] <= sites[k - 1])
      throw ValidationError(std::string("multi_amplitude: ") + what +
                            " sites must be strictly ascending");
    out.push_back(sites[k] - 1);
  }
  return out;
}

}  // namespace

cplx multi_amplitude(const AmplitudeMatrix& F, const std::vector<int>& senders,
                     const std::vector<int>& receivers) {
  if (F.delta != 0.0)
    throw FreeFermionError("multi_amplitude: source spec has delta != 0; minors do not apply");
  if (senders.size() != receivers.size())
    throw DimensionError("multi_amplitude: sender and receiver sets differ in size");
  if (senders.empty()) throw DimensionError("multi_amplitude: empty site set");
  return minor(F.entries, to_zero_based(senders, F.N(), "sender"),
               to_zero_based(receivers, F.N(), "receiver"));
}

cplx AmplitudeSet::sum() const {
  cplx s{};
  for (const cplx& v : values) s += v;
  return s;
}

std::vector<std::vector<int>> amplitude_subsets(int n) {
  std::vector<std::vector<int>> out;
  for (const auto& b : block_basis(n))
    if (b.excitations > 0) out.push_back(b.occupied);
  return out;
}

std::vector<int> receiver_sites_for(const std::vector<int>& labels, int N, int n,
                                    ReceiverLabeling labeling) {
  std::vector<int> sites;
  sites.reserve(labels.size());
  for (int s : labels) sites.push_back(receiver_site(N, n, s, labeling));
  std::sort(sites.begin(), sites.end());
  return sites;
}

AmplitudeSet block_amplitudes(const AmplitudeMatrix& F, int n, ReceiverLabeling labeling) {
  if (n < 1 || 2 * n > F.N()) throw ValidationError("block_amplitudes: need 1 <= n and 2n <= N");
  AmplitudeSet out;
  out.n = n;
  out.labeling = labeling;
  out.subsets = amplitude_subsets(n);
  for (const auto& S : out.subsets)
    out.values.push_back(multi_amplitude(F, S, receiver_sites_for(S, F.N(), n, labeling)));
  return out;
}

AmplitudeSet mirror_amplitudes(const AmplitudeMatrix& F, int n) {
  return block_amplitudes(F, n, ReceiverLabeling::mirror);
}

BlockPropagator::BlockPropagator(const EigenDecomposition& eig, std::vector<int> rows,
                                 std::vector<int> cols)
    : omega_(eig.eigenvalues), rows_(std::move(rows)), cols_(std::move(cols)) {
  const std::size_t K = omega_.size();
  for (int s : rows_)
    if (s < 1 || static_cast<std::size_t>(s) > K) throw DimensionError("BlockPropagator: row site out of range");
  for (int s : cols_)
    if (s < 1 || static_cast<std::size_t>(s) > K) throw DimensionError("BlockPropagator: column site out of range");
  weights_.resize(rows_.size() * cols_.size() * K);
  for (std::size_t r = 0; r < rows_.size(); ++r)
    for (std::size_t c = 0; c < cols_.size(); ++c)
      for (std::size_t k = 0; k < K; ++k)
        weights_[(r * cols_.size() + c) * K + k] = eig.phi(rows_[r] - 1, k) * eig.phi(cols_[c] - 1, k);
}

void BlockPropagator::evaluate(double t, std::vector<cplx>& out) const {
  const std::size_t K = omega_.size();
  const std::size_t RC = rows_.size() * cols_.size();
  // Split real and imaginary parts so the inner loop vectorizes.
  thread_local std::vector<double> re, im;
  re.resize(K);
  im.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double a = omega_[k] * t;
    re[k] = std::cos(a);
    im[k] = -std::sin(a);
  }
  out.resize(RC);
  for (std::size_t rc = 0; rc < RC; ++rc) {
    const double* w = &weights_[rc * K];
    double sr = 0.0, si = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      sr += w[k] * re[k];
      si += w[k] * im[k];
    }
    out[rc] = {sr, si};
  }
}

namespace {

std::vector<int> sender_rows(int n) {
  std::vector<int> r(n);
  for (int s = 0; s < n; ++s) r[s] = s + 1;
  return r;
}

std::vector<int> receiver_cols(int N, int n) {
  std::vector<int> c(n);
  for (int s = 0; s < n; ++s) c[s] = N - n + 1 + s;
  return c;
}

}  // namespace

BlockAmplitudeEvaluator::BlockAmplitudeEvaluator(const ChainSpec& spec, int n,
                                                 ReceiverLabeling labeling)
    : BlockAmplitudeEvaluator((spec.require_free_fermion(), spectral(spec)), spec.N, n, labeling) {}

BlockAmplitudeEvaluator::BlockAmplitudeEvaluator(const EigenDecomposition& eig, int N, int n,
                                                 ReceiverLabeling labeling)
    : N_(N),
      n_(n),
      labeling_(labeling),
      prop_(eig, sender_rows(n), receiver_cols(N, n)),
      subsets_(amplitude_subsets(n)) {
  if (n < 1 || n > 4 || 2 * n > N)
    throw ValidationError("BlockAmplitudeEvaluator: need 1 <= n <= 4 and 2n <= N");
  for (const auto& S : subsets_) {
    std::vector<int> rows, cols;
    for (int s : S) rows.push_back(s - 1);
    for (int site : receiver_sites_for(S, N, n, labeling)) cols.push_back(site - (N - n + 1));
    row_idx_.push_back(std::move(rows));
    col_idx_.push_back(std::move(cols));
  }
}

void BlockAmplitudeEvaluator::evaluate(double t, std::vector<cplx>& values,
                                       std::vector<cplx>& scratch) const {
  prop_.evaluate(t, scratch);
  values.resize(subsets_.size());
  std::array<cplx, 16> sub;
  for (std::size_t q = 0; q < subsets_.size(); ++q) {
    const auto& r = row_idx_[q];
    const auto& c = col_idx_[q];
    const int k = static_cast<int>(r.size());
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) sub[a * k + b] = scratch[r[a] * n_ + c[b]];
    values[q] = det_small(sub.data(), k);
  }
}

AmplitudeSet BlockAmplitudeEvaluator::operator()(double t) const {
  AmplitudeSet out;
  out.n = n_;
  out.labeling = labeling_;
  out.subsets = subsets_;
  std::vector<cplx> scratch;
  evaluate(t, out.values, scratch);
  return out;
}

cplx det_small(const cplx* a, int k) {
  switch (k) {
    case 1: return a[0];
    case 2: return a[0] * a[3] - a[1] * a[2];
    case 3:
      return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
             a[2] * (a[3] * a[7] - a[4] * a[6]);
    case 4: break;
    default: throw DimensionError("det_small: k must be in [1, 4]");
  }
  std::array<cplx, 16> m;
  std::copy(a, a + 16, m.begin());
  cplx det{1.0, 0.0};
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(m[r * 4 + col]) > std::abs(m[piv * 4 + col])) piv = r;
    if (m[piv * 4 + col] == cplx{}) return cplx{};
    if (piv != col) {
      for (int c = 0; c < 4; ++c) std::swap(m[col * 4 + c], m[piv * 4 + c]);
      det = -det;
    }
    det *= m[col * 4 + col];
    for (int r = col + 1; r < 4; ++r) {
      const cplx f = m[r * 4 + col] / m[col * 4 + col];
      for (int c = col + 1; c < 4; ++c) m[r * 4 + c] -= f * m[col * 4 + c];
    }
  }
  return det;
}

}  // namespace qst

#include "qst/oracle.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qst/amplitudes.h"
#include "qst/basis.h"
#include "qst/dynmap.h"
#include "qst/errors.h"
#include "qst/fidelity.h"
#include "reference.h"

namespace qst {
namespace {

std::vector<cplx> random_block_state(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_state(static_cast<int>(dim), rng);
}

double norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (auto a : v) s += std::norm(a);
  return s;
}

// Var(m2 - m1^2) bound that drops the (positive) covariance term.
double variance_std_error(const McResult& r) {
  return std::hypot(r.std_error_second_moment, 2.0 * r.mean * r.std_error_mean);
}

TEST(BlockSpace, EnumerationAndLookup) {
  const BlockSpace b(5, 2);
  EXPECT_EQ(b.dim(), 10u);
  EXPECT_EQ(b.mask(0), 0b00011u);  // {1, 2}
  EXPECT_EQ(b.mask(1), 0b00101u);  // {1, 3}
  EXPECT_EQ(b.mask(9), 0b11000u);  // {4, 5}
  for (std::size_t i = 0; i < b.dim(); ++i) EXPECT_EQ(b.index_of(b.mask(i)), static_cast<long>(i));
  EXPECT_EQ(b.index_of(0b00111u), -1);
  EXPECT_EQ(BlockSpace(7, 0).dim(), 1u);
}

TEST(BlockSpace, DimensionCap) {
  EXPECT_NO_THROW(BlockSpace(15, 3));
  EXPECT_THROW(BlockSpace(20, 10), DimensionError);
  EXPECT_THROW(BlockSpace(6, 7), DimensionError);
}

TEST(PureStateTest, Validation) {
  PureState s{{cplx(0.6), cplx(0.0, 0.8)}};
  EXPECT_NO_THROW(s.validate());
  EXPECT_NEAR(s.norm(), 1.0, 1e-15);
  s.amplitudes[0] = 0.7;
  EXPECT_THROW(s.validate(), ValidationError);
  EXPECT_THROW(PureState{}.validate(), ValidationError);
}

TEST(BlockEvolution, TimeZeroIsIdentity) {
  const ChainSpec spec = ref::random_chain(8, 2, 1, 0.3);
  const BlockEvolver ev(spec, 3);
  const auto psi = random_block_state(ev.space().dim(), 2);
  const auto out = ev.evolve(psi, 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) EXPECT_NEAR(std::abs(out[i] - psi[i]), 0.0, 1e-13);
}

TEST(BlockEvolution, NormAndEnergyConserved) {
  for (double delta : {0.0, 0.8}) {
    const ChainSpec spec = ref::random_chain(10, 2, 5, delta);
    for (int k : {1, 2, 4}) {
      const BlockEvolver ev(spec, k);
      const auto psi = random_block_state(ev.space().dim(), 10 + k);
      const auto out = ev.evolve(psi, 100.0);
      EXPECT_NEAR(norm2(out), 1.0, 1e-10);
      EXPECT_NEAR(ev.energy(out), ev.energy(psi), 1e-9);
    }
  }
}

TEST(BlockEvolution, MatchesFullSpaceIncludingAnisotropy) {
  for (double delta : {0.0, 0.7}) {
    const ChainSpec spec = ref::random_chain(6, 2, 77, delta);
    const double t = 5.3;
    const ref::FullSpacePropagator U(spec, t);
    for (int k = 0; k <= 6; ++k) {
      const BlockEvolver ev(spec, k);
      const auto& space = ev.space();
      for (std::size_t in = 0; in < space.dim(); ++in) {
        EXPECT_LE(U.leakage(space.mask(in)), 1e-12);
        std::vector<cplx> e(space.dim());
        e[in] = 1.0;
        const auto out = ev.evolve(e, t);
        std::vector<int> S, R;
        for (int s = 1; s <= 6; ++s)
          if (space.mask(in) >> (s - 1) & 1) S.push_back(s);
        for (std::size_t o = 0; o < space.dim(); ++o) {
          R.clear();
          for (int s = 1; s <= 6; ++s)
            if (space.mask(o) >> (s - 1) & 1) R.push_back(s);
          EXPECT_LE(std::abs(out[o] - U.amplitude(S, R)), 1e-10) << "delta=" << delta << " k=" << k;
        }
      }
    }
  }
}

TEST(BlockEvolution, SingleExcitationIsTransitionMatrix) {
  const ChainSpec spec = ref::random_chain(11, 3, 21);
  const double t = 17.0;
  const auto F = transition_matrix(spec, t);
  const BlockEvolver ev(spec, 1);
  for (int j = 1; j <= 11; ++j) {
    std::vector<cplx> e(11);
    e[ev.space().index_of(std::uint64_t{1} << (j - 1))] = 1.0;
    const auto out = ev.evolve(e, t);
    for (int i = 1; i <= 11; ++i)
      EXPECT_LE(std::abs(out[ev.space().index_of(std::uint64_t{1} << (i - 1))] - F.f(j, i)), 1e-10);
  }
}

TEST(BlockEvolution, TwoExcitationsAreMinors) {
  const ChainSpec spec = weak_coupling_chain(8, 2, 1.0);
  const double t = 6.6;
  const auto F = transition_matrix(spec, t);
  const BlockEvolver ev(spec, 2);
  const auto& space = ev.space();
  const auto pairs = subsets_of_size(8, 2);
  for (const auto& S : {std::vector<int>{1, 2}, std::vector<int>{3, 7}}) {
    std::vector<cplx> e(space.dim());
    e[space.index_of((1u << (S[0] - 1)) | (1u << (S[1] - 1)))] = 1.0;
    const auto out = ev.evolve(e, t);
    for (const auto& R : pairs)
      EXPECT_LE(std::abs(out[space.index_of((1u << (R[0] - 1)) | (1u << (R[1] - 1)))] - multi_amplitude(F, S, R)), 1e-10);
  }
}

TEST(BlockEvolution, WrapperAndErrors) {
  const ChainSpec spec = ref::random_chain(7, 2, 3);
  const BlockEvolver ev(spec, 2);
  PureState psi{random_block_state(ev.space().dim(), 4)};
  const auto a = evolve_block(spec, 2, psi, 2.0);
  const auto b = ev.evolve(psi.amplitudes, 2.0);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(a.amplitudes[i], b[i]);
  EXPECT_THROW(evolve_block(spec, 3, psi, 1.0), DimensionError);
}

TEST(TransferFidelity, VacuumIsAlwaysTransferred) {
  const ChainSpec spec = ref::random_chain(9, 3, 8, 0.5);
  PureState vac{std::vector<cplx>(8)};
  vac.amplitudes[0] = 1.0;
  for (double t : {0.0, 3.0, 40.0}) EXPECT_NEAR(transfer_fidelity_exact(spec, vac, t), 1.0, 1e-12);
}

TEST(TransferFidelity, TwoSitePerfectTransfer) {
  const ChainSpec spec = weak_coupling_chain(2, 1, 1.0);
  const PureState one{{cplx(0.0), cplx(1.0)}};
  EXPECT_NEAR(transfer_fidelity_exact(spec, one, std::numbers::pi), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(transition_matrix(spec, std::numbers::pi).f(1, 2)), 1.0, 1e-15);
}

TEST(TransferFidelity, ReceiverStateIsADensityMatrix) {
  const ChainSpec spec = ref::random_chain(8, 2, 19, 0.2);
  PureState psi{random_block_state(4, 20)};
  const ComplexMatrix rho = receiver_density_matrix(spec, psi, 7.5);
  cplx tr{};
  for (int i = 0; i < 4; ++i) tr += rho(i, i);
  EXPECT_NEAR(std::abs(tr - 1.0), 0.0, 1e-12);
  EXPECT_LE(max_abs_diff(rho, adjoint(rho)), 1e-13);
  EXPECT_THROW(receiver_density_matrix(spec, PureState{{cplx(1.0), cplx(0.0)}}, 1.0), DimensionError);
}

TEST(TransferFidelity, ThreeQubitWeakCouplingAgreesWithMapRoute) {
  const ChainSpec spec = weak_coupling_chain(15, 3, 0.01);
  const double t = 178430.6;  // read-out peak of this configuration
  const auto lab = ReceiverLabeling::translation;
  const auto from_oracle = map_from_evolution(spec, 3, t, lab);
  const auto from_minors = map_from_amplitudes(transition_matrix(spec, t), 3, lab);
  EXPECT_LE(max_abs_diff(from_oracle.elements(), from_minors.elements()), 1e-9);
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 3; ++rep) {
    const PureState psi{haar_state(8, rng)};
    const double exact = transfer_fidelity_exact(spec, psi, t, lab);
    EXPECT_NEAR(exact, from_minors.pure_state_fidelity(psi.amplitudes), 1e-9);
    EXPECT_GT(exact, 0.99);
  }
}

TEST(MonteCarlo, ConstantEvaluator) {
  const auto r = haar_sample_fidelity([](const std::vector<cplx>&) { return 1.0; }, 4, 1000, 7);
  EXPECT_EQ(r.samples, 1000u);
  EXPECT_EQ(r.seed, 7u);
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
  EXPECT_DOUBLE_EQ(r.second_moment, 1.0);
  EXPECT_NEAR(r.std_error_mean, 0.0, 1e-9);
  EXPECT_THROW(haar_sample_fidelity([](const std::vector<cplx>&) { return 1.0; }, 4, 0, 7), ValidationError);
}

TEST(MonteCarlo, HaarStatesAreNormalized) {
  std::mt19937_64 rng(1);
  for (int d : {1, 2, 8, 32}) EXPECT_NEAR(norm2(haar_state(d, rng)), 1.0, 1e-14);
}

TEST(MonteCarlo, SecondOrderHaarMoments) {
  const int d = 8;
  const std::size_t samples = 200000;
  const auto moment = [&](auto g, double expect) {
    const auto r = haar_sample_fidelity(g, d, samples, 99);
    EXPECT_LE(std::abs(r.mean - expect), 4.0 * r.std_error_mean) << "expect " << expect;
  };
  moment([](const std::vector<cplx>& a) { return std::norm(a[3]); }, 1.0 / d);
  moment([](const std::vector<cplx>& a) { return std::pow(std::norm(a[5]), 2); }, 2.0 / (d * (d + 1.0)));
  moment([](const std::vector<cplx>& a) { return std::norm(a[1]) * std::norm(a[6]); }, 1.0 / (d * (d + 1.0)));
}

TEST(MonteCarlo, ReproducibleAndThreadIndependent) {
  const auto A = map_from_evolution(ref::random_chain(8, 2, 31), 2, 3.0);
  const PureStateFidelity eval(A);
  const std::size_t samples = 3 * kMcChunk + 123;
  const auto a = haar_sample_fidelity(eval, 4, samples, 2024, 1);
  const auto b = haar_sample_fidelity(eval, 4, samples, 2024, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.second_moment, b.second_moment);
  EXPECT_NE(haar_sample_fidelity(eval, 4, samples, 2025).mean, a.mean);
}

TEST(MonteCarlo, MapMomentsMatchClosedForms) {
  for (int n : {1, 2, 3}) {
    const auto A = map_from_evolution(ref::random_chain(2 * n + 3, n, 40 + n), n, 4.0);
    const auto r = haar_sample_fidelity(PureStateFidelity(A), 1 << n, 200000, 11 * n);
    EXPECT_LE(std::abs(r.mean - avg_fidelity_from_map(A)), 4.0 * r.std_error_mean) << "n=" << n;
    EXPECT_LE(std::abs(r.second_moment - second_moment_from_map(A)), 4.0 * r.std_error_second_moment) << "n=" << n;
  }
}

TEST(MonteCarlo, FullyDampedQubitSecondMoment) {
  const auto A = one_qubit_map(0.0);
  const auto r = haar_sample_fidelity(PureStateFidelity(A), 2, 1000000, 5);
  EXPECT_LE(std::abs(r.second_moment - second_moment_from_map(A)), 3.0 * r.std_error_second_moment);
}

TEST(MonteCarlo, StandardErrorScalesAsInverseRoot) {
  const PureStateFidelity eval(one_qubit_map(0.5));
  const auto s1 = haar_sample_fidelity(eval, 2, 10000, 3).std_error_mean;
  const auto s4 = haar_sample_fidelity(eval, 2, 40000, 3).std_error_mean;
  const auto s16 = haar_sample_fidelity(eval, 2, 160000, 3).std_error_mean;
  EXPECT_NEAR(s1 / s4, 2.0, 0.4);
  EXPECT_NEAR(s4 / s16, 2.0, 0.4);
}

TEST(ProductStates, SingleQubitMatchesHaar) {
  const PureStateFidelity eval(one_qubit_map(0.6));
  const auto p = haar_sample_product_states(eval, 1, 200000, 8);
  const auto h = haar_sample_fidelity(eval, 2, 200000, 9);
  EXPECT_LE(std::abs(p.mean - h.mean), 4.0 * std::hypot(p.std_error_mean, h.std_error_mean));
  EXPECT_LE(std::abs(p.second_moment - h.second_moment),
            4.0 * std::hypot(p.std_error_second_moment, h.std_error_second_moment));
}

TEST(ProductStates, MeanFactorizes) {
  const double f = 0.8;
  const auto r = haar_sample_product_states(PureStateFidelity(tensor_power(one_qubit_map(f), 2)), 2, 200000, 12);
  const double F1 = avg_fidelity_from_map(one_qubit_map(f));
  EXPECT_LE(std::abs(r.mean - F1 * F1), 4.0 * r.std_error_mean);
}

TEST(ProductStates, VarianceLaw) {
  for (double f : {0.8, 0.9}) {
    const auto one = fidelity_stats(one_qubit_map(f));
    const auto r = haar_sample_product_states(PureStateFidelity(tensor_power(one_qubit_map(f), 3)), 3, 100000, 13);
    const double var = r.second_moment - r.mean * r.mean;
    EXPECT_LE(std::abs(var - product_state_variance(one, 3)), 3.0 * variance_std_error(r)) << "f=" << f;
  }
}

TEST(ProductStates, ProductVarianceExceedsHaarAtHighMean) {
  const auto A = tensor_power(one_qubit_map(0.95), 2);
  const double haar_var = fidelity_stats(A).variance;
  const double prod_var = product_state_variance(fidelity_stats(one_qubit_map(0.95)), 2);
  EXPECT_GT(prod_var, haar_var);
}

TEST(ProductStates, Errors) {
  const PureStateFidelity eval(identity_map(2));
  EXPECT_THROW(haar_sample_product_states(eval, 0, 10, 1), ValidationError);
}

}  // namespace
}  // namespace qst

#include "qst/protocol.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qst/errors.h"
#include "qst/fidelity.h"
#include "reference.h"

namespace qst {
namespace {

ChainSpec engineered18() { return weak_coupling_chain(18, 4, 0.01, engineered_sender_coupling(10, 2, 1)); }

// Results of the long scans are shared across tests.
const ProtocolResult& three_qubit_result() {
  static const ProtocolResult r = find_optimal_time(weak_coupling_chain(15, 3, 0.01), 3);
  return r;
}

const ProtocolResult& four_qubit_result() {
  static const ProtocolResult r = find_optimal_time(engineered18(), 4);
  return r;
}

TEST(ReducedAmplitude, FullClusterIsExact) {
  const ChainSpec spec = ref::random_chain(9, 2, 6);
  const auto eig = spectral(spec);
  std::vector<int> all;
  for (int k = 1; k <= 9; ++k) all.push_back(k);
  const auto F = transition_matrix(eig, 12.5);
  for (int i = 1; i <= 9; ++i)
    for (int j = 1; j <= 9; ++j) EXPECT_LE(std::abs(reduced_amplitude(eig, all, i, j, 12.5) - F.f(i, j)), 1e-14);
}

TEST(ReducedAmplitude, TimeZeroIsProjectorElement) {
  const auto eig = spectral(weak_coupling_chain(15, 3, 0.01));
  const std::vector<int> cluster = {3, 4, 7, 8, 9, 12, 13};
  double proj = 0.0;
  for (int k : cluster) proj += eig.phi(0, k - 1) * eig.phi(12, k - 1);
  EXPECT_NEAR(std::abs(reduced_amplitude(eig, cluster, 1, 13, 0.0) - proj), 0.0, 1e-15);
  EXPECT_THROW(reduced_amplitude(eig, {}, 1, 13, 0.0), ValidationError);
  EXPECT_THROW(reduced_amplitude(eig, {16}, 1, 13, 0.0), DimensionError);
}

TEST(ReducedAmplitude, SevenLevelClusterTracksExactAmplitude) {
  const ChainSpec spec = weak_coupling_chain(15, 3, 0.01);
  const auto eig = spectral(spec);
  const auto rep = resonance_report(spec, 3);
  const double tau = std::numbers::pi / rep.delta_omega;
  double worst = 0.0;
  for (int q = 0; q <= 400; ++q) {
    const double t = tau * q / 400.0;
    const auto F = transition_matrix(eig, t);
    for (auto [i, j] : {std::pair{1, 15}, std::pair{1, 13}, std::pair{2, 14}, std::pair{3, 15}})
      worst = std::max(worst, std::abs(reduced_amplitude(eig, rep.cluster_indices, i, j, t) - F.f(i, j)));
  }
  EXPECT_LE(worst, 5e-3);
}

TEST(EnvelopeTest, Values) {
  const Envelope env{2e-4};
  EXPECT_EQ(env(0.0), 0.0);
  EXPECT_NEAR(env(env.period()), 1.0, 1e-15);
  EXPECT_NEAR(env.rabi(env.period() / 2), 0.5, 1e-15);
  EXPECT_NEAR(env(env.period() / 2), 0.25, 1e-15);
  EXPECT_NEAR(env.period(), std::numbers::pi / 2e-4, 1e-9);
  EXPECT_EQ(envelope(weak_coupling_chain(15, 3, 0.01), 3).delta_omega,
            resonance_report(weak_coupling_chain(15, 3, 0.01), 3).delta_omega);
}

TEST(EnvelopeTest, BoundsExcessNearPeak) {
  const ChainSpec spec = weak_coupling_chain(15, 3, 0.01);
  const Envelope env = envelope(spec, 3);
  const FidelityEvaluator fid(spec, 3, ReceiverLabeling::translation);
  const double tau = env.period(), floor = 1.0 / 8.0;
  for (double t = 0.95 * tau; t <= 1.05 * tau; t += 0.37) {
    const double excess = (fid(t) - floor) / (1.0 - floor);
    ASSERT_LE(excess, env(t) + 0.05) << "t/tau=" << t / tau;
  }
}

TEST(OptimalTime, ThreeQubitWeakCoupling) {
  const auto& r = three_qubit_result();
  EXPECT_GE(r.fidelity_at_optimum, 0.99);
  EXPECT_NEAR(r.fidelity_at_optimum, 0.99969, 5e-5);
  EXPECT_NEAR(r.optimal_time / r.envelope_period, 1.0, 0.2);
  EXPECT_GE(r.optimal_time, 0.0);
  EXPECT_LE(r.optimal_time, r.window_end);
  EXPECT_NEAR(r.window_end, 1.2 * r.envelope_period, 1e-6);
  EXPECT_LE(r.coarse_spacing, 0.1 + 1e-12);
  EXPECT_EQ(r.cluster.cluster_indices, (std::vector<int>{3, 4, 7, 8, 9, 12, 13}));
  EXPECT_NEAR(avg_fidelity_niqst(r.amplitudes_at_optimum, 8), r.fidelity_at_optimum, 1e-12);
}

TEST(OptimalTime, SeriesAndReadoutWindows) {
  const auto& r = three_qubit_result();
  EXPECT_LE(r.time_series.size(), 2000u);
  EXPECT_GT(r.time_series.size(), 1000u);
  double series_max = 0.0;
  for (std::size_t k = 1; k < r.time_series.size(); ++k) EXPECT_LT(r.time_series[k - 1].first, r.time_series[k].first);
  for (auto [t, F] : r.time_series) series_max = std::max(series_max, F);
  EXPECT_LE(series_max, r.fidelity_at_optimum);
  EXPECT_GT(series_max, r.fidelity_at_optimum - 1e-4);
  ASSERT_FALSE(r.readout_windows.empty());
  const FidelityEvaluator fid(weak_coupling_chain(15, 3, 0.01), 3, ReceiverLabeling::translation);
  for (const auto& w : r.readout_windows) {
    EXPECT_LE(w.begin, w.end);
    EXPECT_GE(fid(w.begin), 0.99 * r.fidelity_at_optimum);
  }
}

TEST(OptimalTime, ThreeQubitScanKeepsMirrorEquality) {
  const ChainSpec spec = weak_coupling_chain(15, 3, 0.01);
  const double tau = three_qubit_result().envelope_period;
  std::vector<double> grid;
  for (int q = 0; q <= 240; ++q) grid.push_back(1.2 * tau * q / 240.0 + 0.013 * q);
  const auto scan = fidelity_scan(spec, 3, grid);
  for (const auto& row : scan.rows) EXPECT_LE(std::abs(row.amplitudes[0] - row.amplitudes[2]), 1e-9);
}

TEST(OptimalTime, FourQubitEngineered) {
  const auto& r = four_qubit_result();
  EXPECT_GE(r.fidelity_at_optimum, 0.97);
  EXPECT_LE(r.fidelity_at_optimum, 0.99);
  EXPECT_EQ(r.cluster.regime, Regime::engineered);
  const auto& f = r.amplitudes_at_optimum.values;  // {1}, {2}, {3}, {4}, ...
  EXPECT_NEAR(std::abs(f[0]), std::abs(f[3]), 1e-9);
  EXPECT_NEAR(std::abs(f[1]), std::abs(f[2]), 1e-9);
  for (int s = 0; s < 4; ++s) EXPECT_GT(std::abs(f[s]), 0.99);
}

TEST(OptimalTime, UniformFourQubitControlIsLower) {
  const auto control = find_optimal_time(weak_coupling_chain(18, 4, 0.01), 4);
  EXPECT_LT(control.fidelity_at_optimum, four_qubit_result().fidelity_at_optimum);
}

TEST(OptimalTime, TwoSitePerfectTransferWithAlignedPhase) {
  ProtocolOptions opt;
  opt.t_max = 5.0;
  opt.coarse_points = 501;
  opt.align_single_phase = true;
  opt.labeling = ReceiverLabeling::mirror;
  const auto r = find_optimal_time(weak_coupling_chain(2, 1, 1.0), 1, opt);
  EXPECT_NEAR(r.optimal_time, std::numbers::pi, 1e-6);
  EXPECT_NEAR(r.fidelity_at_optimum, 1.0, 1e-12);
  opt.align_single_phase = false;
  EXPECT_NEAR(find_optimal_time(weak_coupling_chain(2, 1, 1.0), 1, opt).fidelity_at_optimum, 2.0 / 3.0, 1e-3);
}

TEST(OptimalTime, WeakerCouplingIsNotWorse) {
  const double strong = find_optimal_time(weak_coupling_chain(15, 3, 0.02), 3).fidelity_at_optimum;
  EXPECT_LE(strong, three_qubit_result().fidelity_at_optimum + 1e-3);
}

TEST(OptimalTime, TransferTimeScalesAsInverseSquare) {
  std::vector<double> scaled;
  for (double J0 : {0.04, 0.02, 0.01}) {
    const ProtocolResult r = J0 == 0.01 ? three_qubit_result() : find_optimal_time(weak_coupling_chain(15, 3, J0), 3);
    scaled.push_back(r.envelope_period * J0 * J0);
    EXPECT_NEAR(r.optimal_time / r.envelope_period, 1.0, 0.2) << "J0=" << J0;
  }
  for (double s : scaled) EXPECT_NEAR(s / scaled.back(), 1.0, 0.2);
}

TEST(OptimalTime, StableUnderGridHalving) {
  ProtocolOptions fine;
  fine.coarse_step = 0.05;
  const auto r = find_optimal_time(weak_coupling_chain(15, 3, 0.01), 3, fine);
  EXPECT_LT(std::abs(r.fidelity_at_optimum - three_qubit_result().fidelity_at_optimum), 1e-4);
}

TEST(OptimalTime, DeterministicAcrossThreadCounts) {
  const ChainSpec spec = weak_coupling_chain(8, 2, 0.05);
  ProtocolOptions a, b;
  a.threads = 1;
  b.threads = 3;
  const auto ra = find_optimal_time(spec, 2, a), rb = find_optimal_time(spec, 2, b);
  EXPECT_EQ(ra.optimal_time, rb.optimal_time);
  EXPECT_EQ(ra.fidelity_at_optimum, rb.fidelity_at_optimum);
  EXPECT_EQ(ra.time_series, rb.time_series);
}

TEST(OptimalTime, Errors) {
  const ChainSpec spec = weak_coupling_chain(8, 2, 0.05);
  ProtocolOptions coarse;
  coarse.coarse_points = 10;
  EXPECT_THROW(find_optimal_time(spec, 2, coarse), ValidationError);
  ProtocolOptions narrow;
  narrow.window_factor = 0.5;
  EXPECT_THROW(find_optimal_time(spec, 2, narrow), ValidationError);
  ChainSpec aniso = spec;
  aniso.delta = 0.2;
  EXPECT_THROW(find_optimal_time(aniso, 2), FreeFermionError);
  EXPECT_THROW(FidelityEvaluator(spec, 2, ReceiverLabeling::mirror, true), ValidationError);
}

TEST(LastCrossing, RisingFlankBeforePeak) {
  const ChainSpec spec = weak_coupling_chain(8, 2, 0.01);
  const auto r = find_optimal_time(spec, 2);
  const FidelityEvaluator fid(spec, 2, ReceiverLabeling::translation);
  for (double target : {0.7, 0.8, 0.9}) {
    const double t = last_crossing_before(fid, target, r.optimal_time, 0.05);
    EXPECT_LT(t, r.optimal_time);
    EXPECT_GE(fid(t), target);
    EXPECT_NEAR(fid(t), target, 1e-6);
    EXPECT_LT(fid(t - 1e-3), target);
    for (double s = t; s <= r.optimal_time; s += 0.01) ASSERT_GE(fid(s), target - 1e-9);
  }
  EXPECT_THROW(last_crossing_before(fid, 0.9, 0.0, 0.05), ValidationError);
  EXPECT_THROW(last_crossing_before(fid, 0.9, r.optimal_time, 0.0), ValidationError);
}

TEST(Scan, TimeZeroIsRandomGuess) {
  for (int n = 1; n <= 4; ++n) {
    const auto scan = fidelity_scan(weak_coupling_chain(2 * n + 3, n, 0.1), n, {0.0});
    ASSERT_EQ(scan.rows.size(), 1u);
    const auto& row = scan.rows[0];
    const double d = 1 << n;
    EXPECT_NEAR(row.F_avg, 1.0 / d, 1e-15);
    EXPECT_NEAR(row.random_guess, 1.0 / d, 1e-15);
    EXPECT_NEAR(row.classical, 0.0, 1e-15);
    EXPECT_NEAR(row.quantum, 0.0, 1e-15);
    EXPECT_EQ(row.envelope, 0.0);
  }
}

TEST(Scan, RowsMatchEvaluatorAndDecomposition) {
  const ChainSpec spec = ref::random_chain(11, 3, 91);
  const std::vector<double> grid = {0.5, 3.0, 9.0, 27.0};
  const auto scan = fidelity_scan(spec, 3, grid, ReceiverLabeling::mirror, 2);
  const FidelityEvaluator fid(spec, 3, ReceiverLabeling::mirror);
  ASSERT_EQ(scan.subsets, amplitude_subsets(3));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& row = scan.rows[k];
    EXPECT_EQ(row.t, grid[k]);
    EXPECT_NEAR(row.F_avg, fid(grid[k]), 1e-14);
    EXPECT_NEAR(row.random_guess + row.classical + row.quantum, row.F_avg, 1e-14);
  }
}

TEST(Scan, EnvelopeColumnAndAnisotropy) {
  const ChainSpec spec = weak_coupling_chain(15, 3, 0.01);
  const Envelope env = envelope(spec, 3);
  const auto scan = fidelity_scan(spec, 3, {1000.0, env.period()});
  EXPECT_EQ(scan.rows[0].envelope, env(1000.0));
  EXPECT_NEAR(scan.rows[1].envelope, 1.0, 1e-12);
  ChainSpec aniso = weak_coupling_chain(6, 2, 1.0);
  aniso.delta = 0.1;
  EXPECT_THROW(fidelity_scan(aniso, 2, {1.0}), FreeFermionError);
}

}  // namespace
}  // namespace qst

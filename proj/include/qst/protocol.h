#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qst/amplitudes.h"
#include "qst/chain.h"

namespace qst {

// f_i^j(t) restricted to the levels in `cluster` (1-based level indices, 1-based sites).
cplx reduced_amplitude(const EigenDecomposition& eig, const std::vector<int>& cluster, int i, int j,
                       double t);

struct Envelope {
  double delta_omega = 0.0;
  double operator()(double t) const;  // sin^4(delta_omega t / 2)
  double rabi(double t) const;        // sin^2(delta_omega t / 2)
  double period() const;              // tau = pi / delta_omega
};

Envelope envelope(const ChainSpec& spec, int n);

// <F_n>(t) from the sender/receiver amplitude set. For n = 1 the optional
// phase alignment reports 1/3 + (1 + |f|)^2 / 6 (cos phi = 1).
class FidelityEvaluator {
 public:
  FidelityEvaluator(const ChainSpec& spec, int n, ReceiverLabeling labeling,
                    bool align_single_phase = false);

  double operator()(double t) const;
  AmplitudeSet amplitudes(double t) const;
  int n() const { return n_; }
  int d() const { return 1 << n_; }
  ReceiverLabeling labeling() const { return amps_.labeling(); }

 private:
  int n_;
  bool align_;
  BlockAmplitudeEvaluator amps_;
};

struct ProtocolOptions {
  double window_factor = 1.2;    // scan [0, window_factor * tau]
  double t_max = 0.0;            // if > 0, scan [0, t_max] instead
  double coarse_step = 0.1;      // used when coarse_points == 0
  std::size_t coarse_points = 0;
  int refine_iters = 60;         // golden-section iterations
  ReceiverLabeling labeling = ReceiverLabeling::translation;
  bool align_single_phase = false;
  std::size_t series_points = 2000;
  double readout_fraction = 0.99;
  int threads = 0;
};

struct ReadoutWindow {
  double begin = 0.0;
  double end = 0.0;
};

struct ProtocolResult {
  double optimal_time = 0.0;
  double fidelity_at_optimum = 0.0;
  double envelope_period = 0.0;  // tau = pi / delta_omega
  double window_end = 0.0;
  double coarse_spacing = 0.0;
  ResonanceReport cluster;
  // Per-bucket maxima of the coarse scan, so fast oscillations do not alias.
  std::vector<std::pair<double, double>> time_series;
  // Maximal runs of coarse points with <F> >= readout_fraction * F*.
  std::vector<ReadoutWindow> readout_windows;
  AmplitudeSet amplitudes_at_optimum;
};

ProtocolResult find_optimal_time(const ChainSpec& spec, int n, const ProtocolOptions& options = {});

// Last time before t_end at which <F> rises through `target`, located on a
// grid of the given step and refined by bisection. Throws if none exists.
double last_crossing_before(const FidelityEvaluator& fid, double target, double t_end, double step);

struct ScanRow {
  double t = 0.0;
  double F_avg = 0.0;
  double envelope = 0.0;  // NaN when no resonance structure is available
  double random_guess = 0.0;
  double classical = 0.0;
  double quantum = 0.0;
  std::vector<cplx> amplitudes;  // f_S^S in AmplitudeSet order
};

struct ScanResult {
  int n = 0;
  ReceiverLabeling labeling = ReceiverLabeling::translation;
  std::vector<std::vector<int>> subsets;
  std::vector<ScanRow> rows;
};

ScanResult fidelity_scan(const ChainSpec& spec, int n, const std::vector<double>& t_grid,
                         ReceiverLabeling labeling = ReceiverLabeling::translation, int threads = 0);

}  // namespace qst

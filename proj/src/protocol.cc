#include "qst/protocol.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qst/errors.h"
#include "qst/fidelity.h"
#include "qst/parallel.h"

namespace qst {

cplx reduced_amplitude(const EigenDecomposition& eig, const std::vector<int>& cluster, int i, int j,
                       double t) {
  if (cluster.empty()) throw ValidationError("reduced_amplitude: empty cluster");
  const int N = static_cast<int>(eig.size());
  if (i < 1 || i > N || j < 1 || j > N) throw DimensionError("reduced_amplitude: site out of range");
  cplx acc{};
  for (int k : cluster) {
    if (k < 1 || k > N) throw DimensionError("reduced_amplitude: level index out of range");
    acc += std::polar(1.0, -eig.eigenvalues[k - 1] * t) * (eig.phi(j - 1, k - 1) * eig.phi(i - 1, k - 1));
  }
  return acc;
}

double Envelope::operator()(double t) const {
  const double s = std::sin(0.5 * delta_omega * t);
  return s * s * s * s;
}

double Envelope::rabi(double t) const {
  const double s = std::sin(0.5 * delta_omega * t);
  return s * s;
}

double Envelope::period() const { return std::numbers::pi / delta_omega; }

Envelope envelope(const ChainSpec& spec, int n) {
  return Envelope{resonance_report(spec, n).delta_omega};
}

FidelityEvaluator::FidelityEvaluator(const ChainSpec& spec, int n, ReceiverLabeling labeling,
                                     bool align_single_phase)
    : n_(n), align_(align_single_phase), amps_(spec, n, labeling) {
  if (align_single_phase && n != 1)
    throw ValidationError("phase alignment is only defined for n = 1 (the n >= 2 phases cannot be aligned jointly)");
}

double FidelityEvaluator::operator()(double t) const {
  thread_local std::vector<cplx> values, scratch;
  amps_.evaluate(t, values, scratch);
  if (align_) {
    const double a = 1.0 + std::abs(values[0]);
    return 1.0 / 3.0 + a * a / 6.0;
  }
  return avg_fidelity_niqst(values, d());
}

AmplitudeSet FidelityEvaluator::amplitudes(double t) const { return amps_(t); }

namespace {

constexpr std::size_t kScanTask = std::size_t{1} << 15;

double golden_max(const FidelityEvaluator& fid, double lo, double hi, int iters, double& best_t) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = fid(c), fd = fid(d);
  for (int it = 0; it < iters; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = fid(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = fid(d);
    }
  }
  best_t = fc >= fd ? c : d;
  return std::max(fc, fd);
}

}  // namespace

ProtocolResult find_optimal_time(const ChainSpec& spec, int n, const ProtocolOptions& opt) {
  spec.require_free_fermion();
  ProtocolResult res;
  res.cluster = resonance_report(spec, n);
  res.envelope_period = std::numbers::pi / res.cluster.delta_omega;
  if (opt.t_max <= 0.0 && opt.window_factor < 1.0)
    throw ValidationError("find_optimal_time: window factor c must be >= 1");
  const double T = opt.t_max > 0.0 ? opt.t_max : opt.window_factor * res.envelope_period;
  std::size_t points = opt.coarse_points;
  if (points == 0) points = static_cast<std::size_t>(std::ceil(T / opt.coarse_step)) + 1;
  if (points < 2) throw ValidationError("find_optimal_time: need at least 2 coarse points");
  const double h = T / static_cast<double>(points - 1);
  if (h > 0.2)
    throw ValidationError("find_optimal_time: coarse spacing " + std::to_string(h) +
                          " exceeds 0.2 and cannot resolve the fast oscillations");
  res.window_end = T;
  res.coarse_spacing = h;

  const FidelityEvaluator fid(spec, n, opt.labeling, opt.align_single_phase);
  std::vector<double> F(points);
  const std::size_t tasks = (points + kScanTask - 1) / kScanTask;
  parallel_for(tasks, opt.threads, [&](std::size_t task) {
    const std::size_t end = std::min(points, (task + 1) * kScanTask);
    for (std::size_t p = task * kScanTask; p < end; ++p) F[p] = fid(static_cast<double>(p) * h);
  });

  const std::size_t best = static_cast<std::size_t>(std::max_element(F.begin(), F.end()) - F.begin());
  res.optimal_time = static_cast<double>(best) * h;
  res.fidelity_at_optimum = F[best];
  double t_ref = 0.0;
  const double lo = std::max(0.0, res.optimal_time - h), hi = std::min(T, res.optimal_time + h);
  const double f_ref = golden_max(fid, lo, hi, opt.refine_iters, t_ref);
  if (f_ref > res.fidelity_at_optimum) {
    res.fidelity_at_optimum = f_ref;
    res.optimal_time = t_ref;
  }
  res.amplitudes_at_optimum = fid.amplitudes(res.optimal_time);

  const double threshold = opt.readout_fraction * res.fidelity_at_optimum;
  for (std::size_t p = 0; p < points; ++p) {
    if (F[p] < threshold) continue;
    const double t = static_cast<double>(p) * h;
    if (!res.readout_windows.empty() && p > 0 && F[p - 1] >= threshold)
      res.readout_windows.back().end = t;
    else
      res.readout_windows.push_back({t, t});
  }

  const std::size_t buckets = std::max<std::size_t>(1, std::min(opt.series_points, points));
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t begin = b * points / buckets, end = (b + 1) * points / buckets;
    if (begin == end) continue;
    const std::size_t arg = static_cast<std::size_t>(
        std::max_element(F.begin() + begin, F.begin() + end) - F.begin());
    res.time_series.emplace_back(static_cast<double>(arg) * h, F[arg]);
  }
  return res;
}

double last_crossing_before(const FidelityEvaluator& fid, double target, double t_end, double step) {
  if (!(step > 0.0)) throw ValidationError("last_crossing_before: step must be > 0");
  double hi = t_end;
  if (fid(hi) < target) throw ValidationError("last_crossing_before: <F>(t_end) is below the target");
  double lo = hi - step;
  while (lo > 0.0 && fid(lo) >= target) {
    hi = lo;
    lo -= step;
  }
  if (lo <= 0.0) {
    lo = 0.0;
    if (fid(lo) >= target) throw ValidationError("last_crossing_before: no upward crossing found");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (fid(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

ScanResult fidelity_scan(const ChainSpec& spec, int n, const std::vector<double>& t_grid,
                         ReceiverLabeling labeling, int threads) {
  spec.require_free_fermion();
  const BlockAmplitudeEvaluator amps(spec, n, labeling);
  const int d = 1 << n;
  // The envelope column needs a resonance structure; plain chains without one get NaN.
  Envelope env{std::numeric_limits<double>::quiet_NaN()};
  try {
    env = envelope(spec, n);
  } catch (const ValidationError&) {
  }

  ScanResult out;
  out.n = n;
  out.labeling = labeling;
  out.subsets = amps.subsets();
  out.rows.resize(t_grid.size());
  parallel_for(t_grid.size(), threads, [&](std::size_t p) {
    ScanRow& row = out.rows[p];
    row.t = t_grid[p];
    const AmplitudeSet set = amps(row.t);
    const NiqstTerms terms = niqst_decomposition(set, d);
    row.F_avg = terms.total;
    row.random_guess = terms.random_guess;
    row.classical = terms.classical;
    row.quantum = terms.quantum;
    row.envelope = std::isnan(env.delta_omega) ? env.delta_omega : env(row.t);
    row.amplitudes = set.values;
  });
  return out;
}

}  // namespace qst

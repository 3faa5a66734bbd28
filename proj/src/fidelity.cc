#include "qst/fidelity.h"

#include <cmath>
#include <string>

#include "qst/errors.h"

namespace qst {

FidelityStats FidelityStats::from_moments(double mean, double second_moment) {
  FidelityStats s;
  s.mean = mean;
  s.second_moment = second_moment;
  double var = second_moment - mean * mean;
  if (var < 0.0 && var > -1e-12) var = 0.0;
  s.variance = var;
  s.cv = mean > 0.0 ? std::sqrt(std::max(var, 0.0)) / mean : 0.0;
  return s;
}

namespace {

void require_trace_preserving(const DynamicalMap& map, const char* who) {
  const int d = map.d();
  if (d < 2) throw ValidationError(std::string(who) + ": map dimension must be >= 2");
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      cplx s{};
      for (int i = 0; i < d; ++i) s += map(i, i, n, m);
      if (std::abs(s - (n == m ? 1.0 : 0.0)) > 1e-8)
        throw ValidationError(std::string(who) + ": map is not trace preserving (column " +
                              std::to_string(n) + "," + std::to_string(m) + ")");
    }
  }
}

}  // namespace

double avg_fidelity_from_map(const DynamicalMap& map) {
  require_trace_preserving(map, "avg_fidelity_from_map");
  const int d = map.d();
  double diag = 0.0, cross = 0.0, coh = 0.0;
  for (int i = 0; i < d; ++i) {
    diag += map(i, i, i, i).real();
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      cross += map(i, i, j, j).real();
      if (i > j) coh += map(i, j, i, j).real();
    }
  }
  return (2.0 * diag + cross + 2.0 * coh) / (d * (d + 1.0));
}

double second_moment_from_map(const DynamicalMap& map) {
  require_trace_preserving(map, "second_moment_from_map");
  const int d = map.d();
  const auto& A = map;
  cplx total{};
  for (int i = 0; i < d; ++i) {
    for (int m = 0; m < d; ++m) {
      const cplx a1 = A(i, i, m, m) + A(i, m, i, m);
      for (int p = 0; p < d; ++p) {
        const cplx a2 = A(i, i, p, m) + A(i, p, i, m);
        const cplx a4 = A(i, m, p, m) + A(i, p, m, m);
        cplx acc{};
        for (int s = 0; s < d; ++s) {
          acc += a1 * (A(p, p, s, s) + A(p, s, p, s));
          acc += a2 * (A(p, m, s, s) + A(p, s, m, s));
          acc += (A(i, i, s, m) + A(i, s, i, m)) * (A(p, m, p, s) + A(p, p, m, s));
          acc += a4 * (A(p, i, s, s) + A(p, s, i, s));
          acc += (A(i, m, s, m) + A(i, s, m, m)) * (A(p, i, p, s) + A(p, p, i, s));
          acc += (A(i, p, s, m) + A(i, s, p, m)) * (A(p, i, m, s) + A(p, m, i, s));
        }
        total += acc;
      }
    }
  }
  return total.real() / (d * (d + 1.0) * (d + 2.0) * (d + 3.0));
}

FidelityStats fidelity_stats(const DynamicalMap& map) {
  return FidelityStats::from_moments(avg_fidelity_from_map(map), second_moment_from_map(map));
}

namespace {

void require_complete(std::size_t count, int d) {
  if (d < 2 || (d & (d - 1)) != 0) throw ValidationError("n-iQST fidelity: d must be a power of two >= 2");
  if (count != static_cast<std::size_t>(d - 1))
    throw ValidationError("n-iQST fidelity: amplitude set must have d-1 = " + std::to_string(d - 1) +
                          " entries, got " + std::to_string(count));
}

}  // namespace

double avg_fidelity_niqst(const std::vector<cplx>& values, int d) {
  require_complete(values.size(), d);
  cplx s{1.0, 0.0};
  for (const cplx& v : values) s += v;
  return 1.0 / (d + 1.0) + std::norm(s) / (d * (d + 1.0));
}

double avg_fidelity_niqst(const AmplitudeSet& amps, int d) {
  return avg_fidelity_niqst(amps.values, d);
}

NiqstTerms niqst_decomposition(const AmplitudeSet& amps, int d) {
  require_complete(amps.size(), d);
  const double norm = d * (d + 1.0);
  const cplx total_sum = amps.sum();
  NiqstTerms t;
  t.random_guess = 1.0 / d;
  double q = 0.0;
  for (const cplx& f : amps.values) {
    t.classical += std::norm(f);
    q += (f * std::conj(1.0 + 0.5 * (total_sum - f))).real();
  }
  t.classical /= norm;
  t.quantum = 2.0 * q / norm;
  t.total = avg_fidelity_niqst(amps, d);
  return t;
}

double avg_fidelity_2qst(cplx f1N, cplx f2N1, cplx f12) {
  const double moduli = std::norm(f1N) + std::norm(f2N1) + std::norm(f12);
  const cplx re = f1N + f2N1 + f12 + f2N1 * std::conj(f1N) + f12 * std::conj(f1N) +
                  f12 * std::conj(f2N1);
  return 0.25 + moduli / 20.0 + re.real() / 10.0;
}

double independent_channels_fidelity(cplx f, int n) {
  if (n < 1) throw DomainError("independent_channels_fidelity: n must be >= 1");
  if (std::abs(f) > 1.0 + 1e-12) throw DomainError("independent_channels_fidelity: |f| > 1");
  const double d = std::ldexp(1.0, n);
  return 1.0 / (d + 1.0) + std::pow(std::norm(1.0 + f), n) / (d * (d + 1.0));
}

double ratio_product_vs_full_f(double f, int n) {
  if (n < 1) throw DomainError("ratio_product_vs_full_f: n must be >= 1");
  if (f < 0.0 || f > 1.0) throw DomainError("ratio_product_vs_full_f: f must be in [0, 1]");
  const double d = std::ldexp(1.0, n);
  return std::pow(3.0, -n) * (d + 1.0) * std::pow(f * (f + 2.0) + 3.0, n) /
         (std::pow(f + 1.0, 2 * n) + d);
}

double ratio_product_vs_full_F(double F, int n) {
  if (n < 1) throw DomainError("ratio_product_vs_full_F: n must be >= 1");
  const double d = std::ldexp(1.0, n);
  if (!(F > 1.0 / d) || F > 1.0 + 1e-12)
    throw DomainError("ratio_product_vs_full_F: F must lie in (1/d, 1]");
  return std::pow(1.0 + std::pow(d * F + F - 1.0, 1.0 / n), n) / (std::pow(3.0, n) * F);
}

double amplitude_for_fidelity(double F, int n) {
  if (n < 1) throw DomainError("amplitude_for_fidelity: n must be >= 1");
  const double d = std::ldexp(1.0, n);
  if (!(F > 1.0 / d) || F > 1.0 + 1e-12)
    throw DomainError("amplitude_for_fidelity: F must lie in (1/d, 1]");
  return std::sqrt(2.0) * std::pow((d + 1.0) * (F - 1.0 / (d + 1.0)), 1.0 / (2.0 * n)) - 1.0;
}

double product_state_variance(const FidelityStats& one_qubit, int n) {
  if (n < 1) throw DomainError("product_state_variance: n must be >= 1");
  const double v = std::pow(one_qubit.second_moment, n) - std::pow(one_qubit.mean, 2 * n);
  return v < 0.0 ? 0.0 : v;
}

double coefficient_of_variation(const FidelityStats& stats) {
  if (!(stats.mean > 0.0)) throw DomainError("coefficient_of_variation: mean must be > 0");
  const double r = stats.second_moment / (stats.mean * stats.mean) - 1.0;
  return std::sqrt(r < 0.0 ? 0.0 : r);
}

}  // namespace qst

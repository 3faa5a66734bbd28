#pragma once

#include "qst/amplitudes.h"
#include "qst/dynmap.h"

namespace qst {

struct FidelityStats {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  double cv = 0.0;

  // Variance clamped at 0 when it is negative by less than 1e-12.
  static FidelityStats from_moments(double mean, double second_moment);
};

double avg_fidelity_from_map(const DynamicalMap& map);
double second_moment_from_map(const DynamicalMap& map);
FidelityStats fidelity_stats(const DynamicalMap& map);

struct NiqstTerms {
  double random_guess = 0.0;  // 1/d
  double classical = 0.0;     // sum |f_S|^2 / (d(d+1))
  double quantum = 0.0;       // (2/(d(d+1))) Re sum_S f_S (1 + 1/2 sum_{S' != S} f_S')^*
  double total = 0.0;
};

// 1/(d+1) + |1 + sum_S f_S|^2 / (d(d+1)).
double avg_fidelity_niqst(const AmplitudeSet& amps, int d);
NiqstTerms niqst_decomposition(const AmplitudeSet& amps, int d);
// Same formula on a bare value list in AmplitudeSet order.
double avg_fidelity_niqst(const std::vector<cplx>& values, int d);

double avg_fidelity_2qst(cplx f1N, cplx f2N1, cplx f12);

double independent_channels_fidelity(cplx f, int n);
double ratio_product_vs_full_f(double f, int n);
double ratio_product_vs_full_F(double F, int n);
// Real amplitude f_F giving independent-channel fidelity F.
double amplitude_for_fidelity(double F, int n);

double product_state_variance(const FidelityStats& one_qubit, int n);
double coefficient_of_variation(const FidelityStats& stats);

}  // namespace qst

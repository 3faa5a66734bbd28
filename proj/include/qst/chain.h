#pragma once

#include <string>
#include <vector>

#include "qst/linalg.h"

namespace qst {

// Sites are 1-indexed. couplings[i-1] is the bond (i, i+1).
struct ChainSpec {
  int N = 0;
  std::vector<double> couplings;   // J_i, length N-1
  std::vector<double> fields;      // h_i, length N
  std::vector<int> sender_sites;   // {1..n}
  std::vector<int> receiver_sites; // {N-n+1..N}
  double J0 = 0.0;                 // placed at bonds (n, n+1) and (N-n, N-n+1)
  double delta = 0.0;              // anisotropy, oracle only

  int n() const { return static_cast<int>(sender_sites.size()); }
  int wire_length() const { return N - 2 * n(); }

  // Throws ValidationError on any broken invariant.
  void validate() const;

  // Couplings with J0 substituted at the two weak bonds.
  std::vector<double> effective_couplings() const;

  bool is_mirror_symmetric(double tol = 0.0) const;
  void require_free_fermion() const;  // throws FreeFermionError if delta != 0

  bool operator==(const ChainSpec&) const = default;
};

// Uniform chain with bulk coupling J, intra-block coupling Js, weak bonds J0, zero fields.
ChainSpec weak_coupling_chain(int N, int n, double J0, double Js = 1.0, double J = 1.0);

std::string to_json(const ChainSpec& spec);
ChainSpec chain_spec_from_json(const std::string& text);
ChainSpec load_chain_spec(const std::string& path);
void save_chain_spec(const ChainSpec& spec, const std::string& path);

TridiagonalSymmetric build_single_particle_hamiltonian(const ChainSpec& spec);
EigenDecomposition spectral(const ChainSpec& spec);

// Which receiver site carries sender label s (1-based label).
//   mirror:      r = N + 1 - s
//   translation: r = N - n + s
enum class ReceiverLabeling { mirror, translation };

int receiver_site(int N, int n, int label, ReceiverLabeling labeling);
std::string to_string(ReceiverLabeling labeling);
ReceiverLabeling parse_labeling(const std::string& name);

enum class Regime { resonant, non_resonant, engineered };
std::string to_string(Regime regime);

// Level indices are 1-based positions in the ascending spectrum.
struct ResonanceReport {
  std::vector<int> first_order_indices;
  std::vector<int> second_order_indices;
  std::vector<int> cluster_indices;
  double delta_omega = 0.0;
  Regime regime = Regime::non_resonant;
  std::string note;
};

inline constexpr double kClusterWeightThreshold = 0.1;

// Levels whose eigenvectors carry summed weight > 0.1 on sender and receiver sites.
std::vector<int> numeric_cluster(const ChainSpec& spec, const EigenDecomposition& eig);

ResonanceReport resonance_report(const ChainSpec& spec, int n);

// J_s = cos(k pi / (n_w + 1)) / cos(s pi / 5).
double engineered_sender_coupling(int n_w, int k, int s);

}  // namespace qst

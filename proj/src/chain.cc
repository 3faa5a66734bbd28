#include "qst/chain.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qst/errors.h"

namespace qst {

using nlohmann::json;

void ChainSpec::validate() const {
  if (N < 1) throw ValidationError("chain spec: N must be >= 1");
  if (couplings.size() != static_cast<std::size_t>(N - 1))
    throw ValidationError("chain spec: couplings must have length N-1");
  if (fields.size() != static_cast<std::size_t>(N))
    throw ValidationError("chain spec: fields must have length N");
  for (double j : couplings)
    if (!std::isfinite(j)) throw ValidationError("chain spec: non-finite coupling");
  for (double h : fields)
    if (!std::isfinite(h)) throw ValidationError("chain spec: non-finite field");
  if (!std::isfinite(J0) || J0 <= 0.0) throw ValidationError("chain spec: J0 must be finite and > 0");
  if (!std::isfinite(delta)) throw ValidationError("chain spec: non-finite delta");

  const int k = n();
  if (receiver_sites.size() != sender_sites.size())
    throw ValidationError("chain spec: sender and receiver blocks differ in size");
  if (2 * k > N) throw ValidationError("chain spec: sender and receiver blocks overlap (2n > N)");
  for (int s = 1; s <= k; ++s) {
    if (sender_sites[s - 1] != s)
      throw ValidationError("chain spec: sender_sites must be {1..n}");
    if (receiver_sites[s - 1] != N - k + s)
      throw ValidationError("chain spec: receiver_sites must be {N-n+1..N}");
  }
}

std::vector<double> ChainSpec::effective_couplings() const {
  std::vector<double> J = couplings;
  const int k = n();
  if (k >= 1 && N >= 2) {
    J[k - 1] = J0;
    J[N - k - 1] = J0;
  }
  return J;
}

bool ChainSpec::is_mirror_symmetric(double tol) const {
  const std::vector<double> J = effective_couplings();
  for (int i = 0; i < N - 1; ++i)
    if (std::abs(J[i] - J[N - 2 - i]) > tol) return false;
  for (int i = 0; i < N; ++i)
    if (std::abs(fields[i] - fields[N - 1 - i]) > tol) return false;
  return true;
}

void ChainSpec::require_free_fermion() const {
  if (delta != 0.0)
    throw FreeFermionError(
        "anisotropy delta != 0: free-fermion minors do not apply; use the exact oracle");
}

ChainSpec weak_coupling_chain(int N, int n, double J0, double Js, double J) {
  if (N < 1 || n < 0 || 2 * n > N) throw ValidationError("weak_coupling_chain: need N >= 2n >= 0");
  ChainSpec spec;
  spec.N = N;
  spec.couplings.assign(N - 1, J);
  for (int i = 0; i + 1 < n; ++i) {
    spec.couplings[i] = Js;
    spec.couplings[N - 2 - i] = Js;
  }
  if (n >= 1 && N >= 2) {
    spec.couplings[n - 1] = J0;
    spec.couplings[N - n - 1] = J0;
  }
  spec.fields.assign(N, 0.0);
  for (int s = 1; s <= n; ++s) {
    spec.sender_sites.push_back(s);
    spec.receiver_sites.push_back(N - n + s);
  }
  spec.J0 = J0;
  spec.validate();
  return spec;
}

namespace {

const std::set<std::string> kSpecKeys = {"N",  "couplings", "fields", "sender_sites",
                                         "receiver_sites", "J0", "delta"};

template <typename T>
T take(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("chain spec: bad or missing key '") + key + "': " + e.what());
  }
}

}  // namespace

std::string to_json(const ChainSpec& spec) {
  json j;
  j["N"] = spec.N;
  j["couplings"] = spec.couplings;
  j["fields"] = spec.fields;
  j["sender_sites"] = spec.sender_sites;
  j["receiver_sites"] = spec.receiver_sites;
  j["J0"] = spec.J0;
  j["delta"] = spec.delta;
  return j.dump(2);
}

ChainSpec chain_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("chain spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("chain spec: top level must be an object");
  for (const auto& item : j.items())
    if (!kSpecKeys.count(item.key()))
      throw ValidationError("chain spec: unknown key '" + item.key() + "'");
  ChainSpec spec;
  spec.N = take<int>(j, "N");
  spec.couplings = take<std::vector<double>>(j, "couplings");
  spec.fields = take<std::vector<double>>(j, "fields");
  spec.sender_sites = take<std::vector<int>>(j, "sender_sites");
  spec.receiver_sites = take<std::vector<int>>(j, "receiver_sites");
  spec.J0 = take<double>(j, "J0");
  spec.delta = take<double>(j, "delta");
  spec.validate();
  return spec;
}

ChainSpec load_chain_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open chain spec file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return chain_spec_from_json(buf.str());
}

void save_chain_spec(const ChainSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write chain spec file '" + path + "'");
  out << to_json(spec) << '\n';
}

TridiagonalSymmetric build_single_particle_hamiltonian(const ChainSpec& spec) {
  spec.validate();
  TridiagonalSymmetric m;
  m.diag = spec.fields;
  for (double j : spec.effective_couplings()) m.offdiag.push_back(0.5 * j);
  return m;
}

EigenDecomposition spectral(const ChainSpec& spec) {
  return eig_tridiag(build_single_particle_hamiltonian(spec));
}

int receiver_site(int N, int n, int label, ReceiverLabeling labeling) {
  if (label < 1 || label > n) throw ValidationError("receiver_site: label out of range");
  return labeling == ReceiverLabeling::mirror ? N + 1 - label : N - n + label;
}

std::string to_string(ReceiverLabeling labeling) {
  return labeling == ReceiverLabeling::mirror ? "mirror" : "translation";
}

ReceiverLabeling parse_labeling(const std::string& name) {
  if (name == "mirror") return ReceiverLabeling::mirror;
  if (name == "translation") return ReceiverLabeling::translation;
  throw ValidationError("unknown receiver labeling '" + name + "' (mirror|translation)");
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::resonant: return "resonant";
    case Regime::non_resonant: return "non_resonant";
    case Regime::engineered: return "engineered";
  }
  return "unknown";
}

std::vector<int> numeric_cluster(const ChainSpec& spec, const EigenDecomposition& eig) {
  std::vector<int> out;
  const int n = spec.n();
  for (int k = 0; k < spec.N; ++k) {
    double w = 0.0;
    for (int s = 0; s < n; ++s) {
      w += eig.phi(s, k) * eig.phi(s, k);
      w += eig.phi(spec.N - 1 - s, k) * eig.phi(spec.N - 1 - s, k);
    }
    if (w > kClusterWeightThreshold) out.push_back(k + 1);
  }
  return out;
}

namespace {

bool intra_block_engineered(const ChainSpec& spec) {
  const int n = spec.n();
  if (n < 2 || spec.wire_length() < 2) return false;
  const double bulk = spec.couplings[n];  // first wire bond (n+1, n+2)
  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(spec.couplings[i] - bulk) > 1e-12) return true;
    if (std::abs(spec.couplings[spec.N - 2 - i] - bulk) > 1e-12) return true;
  }
  return false;
}

}  // namespace

ResonanceReport resonance_report(const ChainSpec& spec, int n) {
  spec.validate();
  if (n < 1) throw ValidationError("resonance_report: sender size n must be >= 1");
  if (2 * n > spec.N)
    throw ValidationError("resonance_report: n too large for N=" + std::to_string(spec.N));
  if (n != spec.n())
    throw ValidationError("resonance_report: n=" + std::to_string(n) +
                          " does not match the spec's sender block of size " +
                          std::to_string(spec.n()));

  const EigenDecomposition eig = spectral(spec);
  const std::vector<double>& w = eig.eigenvalues;
  ResonanceReport rep;
  rep.cluster_indices = numeric_cluster(spec, eig);
  if (rep.cluster_indices.empty())
    throw ValidationError("resonance_report: no level exceeds the sender/receiver weight threshold 0.1");

  // Quasi-degenerate groups: adjacent cluster levels closer than 2 J0.
  std::vector<std::vector<int>> groups;
  for (int idx : rep.cluster_indices) {
    if (!groups.empty() && groups.back().back() == idx - 1 &&
        w[idx - 1] - w[idx - 2] < 2.0 * spec.J0)
      groups.back().push_back(idx);
    else
      groups.push_back({idx});
  }
  double pair_gap = 0.0, any_gap = 0.0;
  int first_order_groups = 0;
  for (const auto& g : groups) {
    auto& target = g.size() == 2 ? rep.second_order_indices : rep.first_order_indices;
    target.insert(target.end(), g.begin(), g.end());
    if (g.size() != 2 && g.size() > 1) ++first_order_groups;
    for (std::size_t a = 1; a < g.size(); ++a) {
      const double gap = w[g[a] - 1] - w[g[a - 1] - 1];
      if (g.size() == 2) pair_gap = pair_gap == 0.0 ? gap : std::min(pair_gap, gap);
      any_gap = any_gap == 0.0 ? gap : std::min(any_gap, gap);
    }
  }
  rep.delta_omega = pair_gap > 0.0 ? pair_gap : any_gap;

  const int nw = spec.wire_length();
  if (n == 3 && nw % 2 == 1) {
    // Positional formulas; the upper 2nd-order pair mirrors the lower one.
    const int N = spec.N;
    const int mid = (N + 1) / 2;
    const int c = std::max(1, (N - 2) / 4);  // ceil((N-5)/4)
    rep.first_order_indices = {mid - 1, mid, mid + 1};
    rep.second_order_indices = {c, c + 1, N - c, N - c + 1};
    std::set<int> all(rep.first_order_indices.begin(), rep.first_order_indices.end());
    all.insert(rep.second_order_indices.begin(), rep.second_order_indices.end());
    rep.cluster_indices.assign(all.begin(), all.end());
    rep.delta_omega = w[c] - w[c - 1];
    rep.regime = nw % 4 == 1 ? Regime::non_resonant : Regime::resonant;
    rep.note = nw % 4 == 1 ? "n_w = 4l+1: one resonant single-particle level"
                           : "n_w = 4l+3: three resonant single-particle levels";
  } else {
    rep.regime = first_order_groups == n ? Regime::resonant : Regime::non_resonant;
    rep.note = std::to_string(first_order_groups) + " of " + std::to_string(n) +
               " sender levels resonant with the wire";
    if (n == 4 && !intra_block_engineered(spec))
      rep.note += first_order_groups == 0 || first_order_groups == 4
                      ? " (uniform couplings: all or none of the four levels resonate)"
                      : " (unexpected partial resonance for uniform couplings)";
  }
  if (intra_block_engineered(spec)) {
    rep.regime = Regime::engineered;
    rep.note += "; intra-block couplings differ from the wire";
  }
  if (!(rep.delta_omega > 0.0))
    throw ValidationError("resonance_report: could not identify a split level pair (delta_omega = 0)");
  return rep;
}

double engineered_sender_coupling(int n_w, int k, int s) {
  if (n_w < 1) throw ValidationError("engineered_sender_coupling: n_w must be >= 1");
  if (k < 1 || k > n_w) throw ValidationError("engineered_sender_coupling: k must be in [1, n_w]");
  if (s != 1 && s != 2) throw ValidationError("engineered_sender_coupling: s must be 1 or 2");
  return std::cos(k * std::numbers::pi / (n_w + 1)) / std::cos(s * std::numbers::pi / 5.0);
}

}  // namespace qst

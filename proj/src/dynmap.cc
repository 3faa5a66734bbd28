#include "qst/dynmap.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qst/basis.h"
#include "qst/errors.h"
#include "qst/oracle.h"

namespace qst {

DynamicalMap::DynamicalMap(int d) : d_(d) {
  if (d < 1) throw DimensionError("DynamicalMap: d must be >= 1");
  el_ = ComplexMatrix(d * d, d * d);
}

DynamicalMap::DynamicalMap(int d, ComplexMatrix elements) : d_(d), el_(std::move(elements)) {
  if (d < 1) throw DimensionError("DynamicalMap: d must be >= 1");
  if (el_.rows() != static_cast<std::size_t>(d * d) || el_.cols() != static_cast<std::size_t>(d * d))
    throw DimensionError("DynamicalMap: element matrix must be d^2 x d^2");
}

std::vector<cplx> DynamicalMap::apply(const std::vector<cplx>& rho) const {
  const std::size_t dd = static_cast<std::size_t>(d_) * d_;
  if (rho.size() != dd) throw DimensionError("DynamicalMap::apply: rho must be d x d");
  std::vector<cplx> out(dd);
  for (std::size_t r = 0; r < dd; ++r) {
    cplx acc{};
    for (std::size_t c = 0; c < dd; ++c) acc += el_(r, c) * rho[c];
    out[r] = acc;
  }
  return out;
}

double DynamicalMap::pure_state_fidelity(const std::vector<cplx>& psi) const {
  return PureStateFidelity(*this)(psi);
}

PureStateFidelity::PureStateFidelity(const DynamicalMap& map, double drop_below) : d_(map.d()) {
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j)
      for (int n = 0; n < d_; ++n)
        for (int m = 0; m < d_; ++m) {
          const cplx v = map(i, j, n, m);
          if (std::abs(v) > drop_below) entries_.push_back({i, j, n, m, v});
        }
}

double PureStateFidelity::operator()(const std::vector<cplx>& a) const {
  if (a.size() != static_cast<std::size_t>(d_))
    throw DimensionError("pure-state fidelity: state dimension differs from map dimension");
  cplx f{};
  for (const Entry& e : entries_) f += std::conj(a[e.i]) * a[e.j] * a[e.n] * std::conj(a[e.m]) * e.value;
  return f.real();
}

CptpReport validate_cptp(const DynamicalMap& map, double tol) {
  const int d = map.d();
  CptpReport rep;
  rep.tolerance = tol;
  cplx total{};
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      cplx s{};
      for (int i = 0; i < d; ++i) s += map(i, i, n, m);
      total += s;
      rep.trace_preservation = std::max(rep.trace_preservation, std::abs(s - (n == m ? 1.0 : 0.0)));
    }
  }
  rep.total_trace = std::abs(total - static_cast<double>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m)
          rep.hermiticity =
              std::max(rep.hermiticity, std::abs(map(i, j, n, m) - std::conj(map(j, i, m, n))));
  for (int i = 0; i < d; ++i) {
    for (int n = 0; n < d; ++n) {
      const cplx v = map(i, i, n, n);
      rep.diagonal_bounds =
          std::max({rep.diagonal_bounds, -v.real(), v.real() - 1.0, std::abs(v.imag())});
    }
  }

  // Choi matrix C[(n,i),(m,j)] = A_ij^nm.
  const int dd = d * d;
  Eigen::MatrixXcd C(dd, dd);
  for (int n = 0; n < d; ++n)
    for (int i = 0; i < d; ++i)
      for (int m = 0; m < d; ++m)
        for (int j = 0; j < d; ++j) C(n * d + i, m * d + j) = map(i, j, n, m);
  const Eigen::MatrixXcd H = 0.5 * (C + C.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H, Eigen::EigenvaluesOnly);
  rep.choi_min_eigenvalue = solver.eigenvalues().minCoeff();

  auto flag = [&](bool bad, const char* name) {
    if (bad) {
      rep.passed = false;
      rep.violations.emplace_back(name);
    }
  };
  flag(rep.trace_preservation > tol, "trace_preservation");
  flag(rep.hermiticity > tol, "hermiticity");
  flag(rep.diagonal_bounds > tol, "diagonal_bounds");
  flag(rep.total_trace > tol * d, "total_trace");
  flag(rep.choi_min_eigenvalue < -tol, "choi_positivity");
  return rep;
}

void require_cptp(const DynamicalMap& map, const char* who, double tol) {
  const CptpReport rep = validate_cptp(map, tol);
  if (rep.passed) return;
  std::ostringstream msg;
  msg << who << ": constructed map violates";
  for (const auto& v : rep.violations) msg << ' ' << v;
  throw ConstructionError(msg.str());
}

DynamicalMap identity_map(int d) {
  DynamicalMap A(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A.at(i, j, i, j) = 1.0;
  return A;
}

DynamicalMap dephasing_map(int d) {
  DynamicalMap A(d);
  for (int i = 0; i < d; ++i) A.at(i, i, i, i) = 1.0;
  return A;
}

DynamicalMap one_qubit_map(cplx f) {
  if (std::abs(f) > 1.0 + 1e-12) throw DomainError("one_qubit_map: |f| must be <= 1");
  DynamicalMap A(2);
  A.at(0, 0, 0, 0) = 1.0;
  A.at(1, 1, 1, 1) = std::norm(f);
  A.at(0, 0, 1, 1) = 1.0 - std::norm(f);
  A.at(0, 1, 0, 1) = std::conj(f);
  A.at(1, 0, 1, 0) = f;
  return A;
}

DynamicalMap two_qubit_map(const AmplitudeMatrix& F, int N) {
  if (N < 4 || F.N() != N) throw DimensionError("two_qubit_map: need N >= 4 and an N x N amplitude matrix");
  if (F.delta != 0.0) throw FreeFermionError("two_qubit_map: amplitudes come from a delta != 0 spec");
  auto a = [&](int x) { return F.f(1, x); };
  auto b = [&](int x) { return F.f(2, x); };
  auto M = [&](int x, int y) { return a(x) * b(y) - a(y) * b(x); };  // f_12^{xy}, x < y

  DynamicalMap A(4);
  auto put = [&](int i, int j, int n, int m, cplx v) {
    A.at(i, j, n, m) = v;
    A.at(j, i, m, n) = std::conj(v);
  };
  // Receiver label 1 sits at N, label 2 at N-1; env sums run over sites 1..N-2.
  const int r1 = N, r2 = N - 1;
  auto single = [&](int p, int x) { return p == 1 ? a(x) : b(x); };

  put(0, 0, 0, 0, 1.0);
  const cplx f12 = M(r2, r1);
  for (int p = 1; p <= 2; ++p) {
    put(1, 0, p, 0, single(p, r1));
    put(2, 0, p, 0, single(p, r2));
  }
  put(3, 0, 3, 0, f12);

  for (int n = 1; n <= 2; ++n) {
    for (int m = 1; m <= 2; ++m) {
      const cplx un[3] = {0, single(n, r1), single(n, r2)};
      const cplx um[3] = {0, single(m, r1), single(m, r2)};
      for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) A.at(i, j, n, m) = un[i] * std::conj(um[j]);
      cplx env{};
      for (int x = 1; x <= N - 2; ++x) env += single(n, x) * std::conj(single(m, x));
      A.at(0, 0, n, m) = env;
    }
  }

  for (int m = 1; m <= 2; ++m) {
    put(3, 1, 3, m, f12 * std::conj(single(m, r1)));
    put(3, 2, 3, m, f12 * std::conj(single(m, r2)));
    cplx e1{}, e2{};
    for (int x = 1; x <= N - 2; ++x) {
      e1 += M(x, r1) * std::conj(single(m, x));
      e2 += M(x, r2) * std::conj(single(m, x));
    }
    put(1, 0, 3, m, e1);
    put(2, 0, 3, m, e2);
  }

  cplx s11{}, s22{}, s12{}, s00{};
  for (int x = 1; x <= N - 2; ++x) {
    s11 += std::norm(M(x, r1));
    s22 += std::norm(M(x, r2));
    s12 += M(x, r1) * std::conj(M(x, r2));
    for (int y = x + 1; y <= N - 2; ++y) s00 += std::norm(M(x, y));
  }
  A.at(3, 3, 3, 3) = std::norm(f12);
  A.at(1, 1, 3, 3) = s11;
  A.at(2, 2, 3, 3) = s22;
  put(1, 2, 3, 3, s12);
  A.at(0, 0, 3, 3) = s00;

  require_cptp(A, "two_qubit_map");
  return A;
}

DynamicalMap map_from_amplitudes(const AmplitudeMatrix& F, int n, ReceiverLabeling labeling) {
  if (F.delta != 0.0) throw FreeFermionError("map_from_amplitudes: amplitudes come from a delta != 0 spec");
  const int N = F.N();
  if (n < 1 || 2 * n > N) throw DimensionError("map_from_amplitudes: need 1 <= n and 2n <= N");
  if (n > 6) throw DimensionError("map_from_amplitudes: n > 6 is not supported");
  const int d = 1 << n;
  const auto basis = block_basis(n);

  std::vector<int> rsite(n + 1);
  std::set<int> receiver;
  for (int s = 1; s <= n; ++s) {
    rsite[s] = receiver_site(N, n, s, labeling);
    receiver.insert(rsite[s]);
  }
  std::vector<int> env_sites;
  for (int x = 1; x <= N; ++x)
    if (!receiver.count(x)) env_sites.push_back(x);
  const int ne = static_cast<int>(env_sites.size());

  DynamicalMap A(d);
  ComplexMatrix amp(d, d);  // amp(i, p) for the current environment configuration
  for (int e = 0; e <= n; ++e) {
    for (const auto& Epos : subsets_of_size(ne, e)) {
      std::fill(amp.data(), amp.data() + d * d, cplx{});
      for (const BasisIndex& p : basis) {
        if (p.excitations < e) continue;
        std::vector<int> rows;
        for (int s : p.occupied) rows.push_back(s - 1);
        for (const BasisIndex& i : basis) {
          if (i.excitations != p.excitations - e) continue;
          if (p.excitations == 0) {
            amp(i.linear_index, p.linear_index) = 1.0;
            continue;
          }
          std::vector<int> cols;
          for (int q : Epos) cols.push_back(env_sites[q - 1] - 1);
          for (int s : i.occupied) cols.push_back(rsite[s] - 1);
          std::sort(cols.begin(), cols.end());
          amp(i.linear_index, p.linear_index) = minor(F.entries, rows, cols);
        }
      }
      for (int nn = 0; nn < d; ++nn)
        for (int mm = 0; mm < d; ++mm)
          for (int i = 0; i < d; ++i) {
            const cplx ain = amp(i, nn);
            if (ain == cplx{}) continue;
            for (int j = 0; j < d; ++j) A.at(i, j, nn, mm) += ain * std::conj(amp(j, mm));
          }
    }
  }
  require_cptp(A, "map_from_amplitudes");
  return A;
}

DynamicalMap map_from_evolution(const ChainSpec& spec, int n, double t, ReceiverLabeling labeling) {
  SenderEvolution evo(spec, n, labeling);
  const int d = evo.d();
  DynamicalMap A(d);
  for (const auto& [env, M] : evo.at(t)) {
    for (int nn = 0; nn < d; ++nn)
      for (int mm = 0; mm < d; ++mm)
        for (int i = 0; i < d; ++i) {
          const cplx ain = M(i, nn);
          if (ain == cplx{}) continue;
          for (int j = 0; j < d; ++j) A.at(i, j, nn, mm) += ain * std::conj(M(j, mm));
        }
  }
  require_cptp(A, "map_from_evolution");
  return A;
}

namespace {

int qubit_count(int d) {
  if (d < 1 || (d & (d - 1)) != 0) throw DimensionError("tensor_product: dimensions must be powers of two");
  int n = 0;
  while ((1 << n) < d) ++n;
  return n;
}

}  // namespace

DynamicalMap tensor_product(const DynamicalMap& a, const DynamicalMap& b) {
  const int na = qubit_count(a.d()), nb = qubit_count(b.d());
  const int n = na + nb;
  if (n > 8) throw DimensionError("tensor_product: composite of more than 8 qubits");
  const int d = 1 << n;
  const auto ia = mask_to_index(na), ib = mask_to_index(nb);
  std::vector<int> pa(d), pb(d);
  for (const BasisIndex& k : block_basis(n)) {
    const std::uint32_t mask = label_mask(k);
    pa[k.linear_index] = ia[mask & ((1u << na) - 1)];
    pb[k.linear_index] = ib[mask >> na];
  }
  DynamicalMap C(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int n1 = 0; n1 < d; ++n1)
        for (int m = 0; m < d; ++m) {
          const cplx va = a(pa[i], pa[j], pa[n1], pa[m]);
          if (va == cplx{}) continue;
          C.at(i, j, n1, m) = va * b(pb[i], pb[j], pb[n1], pb[m]);
        }
  return C;
}

DynamicalMap tensor_power(const DynamicalMap& a, int copies) {
  if (copies < 1) throw DimensionError("tensor_power: copies must be >= 1");
  DynamicalMap out = a;
  for (int c = 1; c < copies; ++c) out = tensor_product(out, a);
  return out;
}

namespace {
constexpr const char* kBasisTag = "excitation-lexicographic";
}

std::string map_to_json(const DynamicalMap& map) {
  nlohmann::json j;
  j["d"] = map.d();
  j["basis"] = kBasisTag;
  nlohmann::json flat = nlohmann::json::array();
  for (const cplx& v : map.elements().values()) flat.push_back({v.real(), v.imag()});
  j["elements"] = std::move(flat);
  return j.dump();
}

DynamicalMap map_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("map JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("map JSON: top level must be an object");
  for (const auto& item : j.items())
    if (item.key() != "d" && item.key() != "basis" && item.key() != "elements")
      throw ValidationError("map JSON: unknown key '" + item.key() + "'");
  if (!j.contains("d") || !j.contains("basis") || !j.contains("elements"))
    throw ValidationError("map JSON: keys d, basis, elements are required");
  if (j["basis"] != kBasisTag) throw ValidationError("map JSON: unsupported basis tag");
  const int d = j["d"].get<int>();
  if (d < 1 || d > 256) throw ValidationError("map JSON: d out of range");
  const auto& flat = j["elements"];
  const std::size_t count = static_cast<std::size_t>(d) * d * d * d;
  if (!flat.is_array() || flat.size() != count) throw ValidationError("map JSON: elements must hold d^4 pairs");
  ComplexMatrix el(d * d, d * d);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& pair = flat[k];
    if (!pair.is_array() || pair.size() != 2) throw ValidationError("map JSON: each element must be [re, im]");
    el.data()[k] = {pair[0].get<double>(), pair[1].get<double>()};
  }
  DynamicalMap map(d, std::move(el));
  const CptpReport rep = validate_cptp(map);
  if (!rep.passed) throw ValidationError("map JSON: loaded map fails CPTP validation");
  return map;
}

}  // namespace qst

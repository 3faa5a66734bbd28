#include "qst/basis.h"

#include "qst/errors.h"

namespace qst {

std::vector<std::vector<int>> subsets_of_size(int N, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > N) return out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i + 1;
  while (true) {
    out.push_back(cur);
    int pos = k - 1;
    while (pos >= 0 && cur[pos] == N - k + pos + 1) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int i = pos + 1; i < k; ++i) cur[i] = cur[i - 1] + 1;
  }
  return out;
}

std::vector<BasisIndex> block_basis(int n) {
  if (n < 0 || n > 16) throw DimensionError("block_basis: n must be in [0, 16]");
  std::vector<BasisIndex> out;
  for (int k = 0; k <= n; ++k) {
    for (auto& occ : subsets_of_size(n, k)) {
      BasisIndex b;
      b.excitations = k;
      b.occupied = std::move(occ);
      b.linear_index = static_cast<int>(out.size());
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::uint32_t label_mask(const BasisIndex& b) {
  std::uint32_t m = 0;
  for (int s : b.occupied) m |= 1u << (s - 1);
  return m;
}

std::vector<int> mask_to_index(int n) {
  const auto basis = block_basis(n);
  std::vector<int> out(std::size_t{1} << n, -1);
  for (const auto& b : basis) out[label_mask(b)] = b.linear_index;
  return out;
}

}  // namespace qst

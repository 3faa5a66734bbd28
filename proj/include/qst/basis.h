#pragma once

#include <cstdint>
#include <vector>

namespace qst {

// Computational basis of an n-qubit block: ordered by excitation count, then
// lexicographically by the ascending list of occupied labels.
struct BasisIndex {
  int excitations = 0;
  std::vector<int> occupied;  // 1-based labels, ascending
  int linear_index = 0;
};

std::vector<BasisIndex> block_basis(int n);

// Occupied labels as a bitmask (bit s-1 for label s).
std::uint32_t label_mask(const BasisIndex& b);

// Inverse of block_basis: bitmask -> linear index. Size 2^n.
std::vector<int> mask_to_index(int n);

// All k-subsets of {1..N}, lexicographic.
std::vector<std::vector<int>> subsets_of_size(int N, int k);

}  // namespace qst

#pragma once

#include <cstdint>
#include <vector>

namespace ric {

// log C(n, k) via lgamma; exact enough for normalization bookkeeping.
double log_binomial(long n, long k);

// Exact C(n, k) as a double; throws Error if the value exceeds max_value
// (guard for exhaustive enumeration).
double binomial_checked(long n, long k, double max_value);

// Colexicographic rank of a strictly increasing index set within all
// k-subsets of {0..n-1}: rank = sum_j C(c_j, j+1).
std::uint64_t subset_rank(const std::vector<int>& sorted_indices);

// Inverse of subset_rank.
std::vector<int> subset_unrank(std::uint64_t rank, long n, int k);

}  // namespace ric

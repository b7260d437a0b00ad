#include "ric/combinatorics.hpp"

#include <cmath>
#include <stdexcept>

#include "ric/errors.hpp"

namespace ric {

double log_binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) throw std::invalid_argument("log_binomial: need 0 <= k <= n");
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double binomial_checked(long n, long k, double max_value) {
  if (k < 0 || n < 0 || k > n) throw std::invalid_argument("binomial_checked: need 0 <= k <= n");
  if (log_binomial(n, k) > std::log(max_value) + 1e-9)
    throw Error("binomial_checked: C(" + std::to_string(n) + "," +
                std::to_string(k) + ") exceeds guard " + std::to_string(max_value));
  // exact product evaluation; values below the guard fit a double exactly
  // only up to 2^53, which the 1e7 enumeration guard respects with room.
  double c = 1.0;
  for (long j = 1; j <= k; ++j) c = c * static_cast<double>(n - k + j) / static_cast<double>(j);
  return std::round(c);
}

std::uint64_t subset_rank(const std::vector<int>& sorted_indices) {
  // colex: rank = sum_j C(c_j, j+1)
  std::uint64_t rank = 0;
  for (std::size_t j = 0; j < sorted_indices.size(); ++j) {
    const long c = sorted_indices[j];
    const long k = static_cast<long>(j) + 1;
    if (c < k) continue;  // C(c, k) = 0
    // small exact integer binomial
    std::uint64_t b = 1;
    for (long t = 1; t <= k; ++t) b = b * static_cast<std::uint64_t>(c - k + t) / static_cast<std::uint64_t>(t);
    rank += b;
  }
  return rank;
}

std::vector<int> subset_unrank(std::uint64_t rank, long n, int k) {
  std::vector<int> out(k);
  auto binom = [](long a, long b) -> std::uint64_t {
    if (b < 0 || b > a) return 0;
    std::uint64_t c = 1;
    for (long t = 1; t <= b; ++t) c = c * static_cast<std::uint64_t>(a - b + t) / static_cast<std::uint64_t>(t);
    return c;
  };
  long hi = n - 1;
  for (int j = k; j >= 1; --j) {
    long c = hi;
    while (c >= j && binom(c, j) > rank) --c;
    // now binom(c, j) <= rank < binom(c+1, j)
    out[j - 1] = static_cast<int>(c);
    rank -= binom(c, j);
    hi = c - 1;
  }
  return out;
}

}  // namespace ric

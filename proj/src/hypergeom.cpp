#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "chronolex/chrono.hpp"
#include "chronolex/error.hpp"

namespace chronolex {

namespace {

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) - std::lgamma(double(n - k) + 1.0);
}

struct Support {
  std::int64_t lo;
  std::int64_t hi;
};

Support support(std::int64_t N, std::int64_t n, std::int64_t K) {
  return {std::max<std::int64_t>(0, n + K - N), std::min(K, n)};
}

// Sum of h(x) for x = from, from+1, ... (step +1) or from, from-1, ... (step -1)
// while inside the support. Only called on the side of the mode where terms
// shrink, so the running sum can stop once terms become negligible.
double tail_sum(std::int64_t N, std::int64_t n, std::int64_t K, std::int64_t from, int step, const Support& s) {
  double term = hypergeometric_pmf(N, n, K, from);
  double sum = 0.0;
  std::int64_t x = from;
  while (true) {
    sum += term;
    if (term <= sum * 1e-20) break;
    if (step > 0) {
      if (x >= s.hi) break;
      term *= double(K - x) * double(n - x) / (double(x + 1) * double(N - K - n + x + 1));
      ++x;
    } else {
      if (x <= s.lo) break;
      term *= double(x) * double(N - K - n + x) / (double(K - x + 1) * double(n - x + 1));
      --x;
    }
  }
  return sum;
}

}  // namespace

double hypergeometric_pmf(std::int64_t N, std::int64_t n, std::int64_t K, std::int64_t x) {
  const Support s = support(N, n, K);
  if (x < s.lo || x > s.hi) return 0.0;
  return std::exp(log_choose(K, x) + log_choose(N - K, n - x) - log_choose(N, n));
}

double hypergeometric_p(const HypergeomQuery& q) {
  const std::int64_t N = q.grand_total;
  const std::int64_t n = q.part_total;
  const std::int64_t K = q.word_total;
  const std::int64_t x = q.observed;
  if (N < 0 || n < 0 || K < 0 || n > N || K > N || x < 0 || x > std::min(n, K)) {
    throw AnalysisError(fmt::format("inconsistent hypergeometric counts (n..={}, n_.j={}, n_i.={}, n_ij={})", N, n, K, x));
  }
  const Support s = support(N, n, K);
  if (x < s.lo) {
    throw AnalysisError(fmt::format("observed count {} below the feasible minimum {}", x, s.lo));
  }
  const auto mode = static_cast<std::int64_t>(std::floor(double(n + 1) * double(K + 1) / double(N + 2)));

  double p;
  if (q.direction == Tail::over) {
    if (x <= s.lo) return 1.0;
    p = x > mode ? tail_sum(N, n, K, x, +1, s) : 1.0 - tail_sum(N, n, K, x - 1, -1, s);
  } else {
    if (x >= s.hi) return 1.0;
    p = x < mode ? tail_sum(N, n, K, x, -1, s) : 1.0 - tail_sum(N, n, K, x + 1, +1, s);
  }
  // Tails below the double range are reported at the smallest positive value.
  return std::clamp(p, std::numeric_limits<double>::denorm_min(), 1.0);
}

}  // namespace chronolex

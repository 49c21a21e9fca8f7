// Criterion 7: calibration of the permutation test under the null.

#include <random>

#include <fmt/format.h>

#include "acceptance_common.hpp"
#include "chronolex/mfact.hpp"
#include "chronolex/random.hpp"

using namespace chronolex;

int main() {
  constexpr int kCorpora = 100;
  constexpr int kReplications = 199;
  constexpr double kAlpha = 0.05;
  constexpr double kLow = 0.01, kHigh = 0.12;

  acceptance::Harness h;
  const auto drift = acceptance::load_drift_corpus();
  h.run(7, "Permutation calibration", [&] {
    int rejections = 0;
    for (int c = 0; c < kCorpora; ++c) {
      // A null corpus: the drift corpus with its years shuffled once.
      std::vector<double> years = to_double_years(drift.years);
      std::mt19937_64 rng(stream_seed(777, std::uint64_t(c)));
      shuffle_in_place(std::span<double>(years), rng);
      const auto res = permutation_test(drift.table, years, {kReplications, 1000 + std::uint64_t(c), 1});
      rejections += res.p_value <= kAlpha ? 1 : 0;
    }
    const double rate = double(rejections) / kCorpora;
    return acceptance::Outcome{rate >= kLow && rate <= kHigh,
                               fmt::format("{} null corpora, B = {}: rejection rate {:.2f} at alpha {:.2f} (accept [{:.2f}, {:.2f}])",
                                           kCorpora, kReplications, rate, kAlpha, kLow, kHigh)};
  });
  return h.exit_code();
}

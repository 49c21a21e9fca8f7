#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "chronolex/error.hpp"
#include "chronolex/mfact.hpp"
#include "chronolex/random.hpp"

namespace chronolex {

namespace {

Eigen::VectorXd table_weights(const LexicalTable& table) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(table.rows()));
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (table.row_margins()[i] <= 0) throw AnalysisError(fmt::format("zero row margin for '{}'", table.row_ids()[i]));
    r(static_cast<Eigen::Index>(i)) = static_cast<double>(table.row_margins()[i]);
  }
  return r;
}

}  // namespace

double permutation_p_value(double observed, const std::vector<double>& null_values) {
  const auto exceed = std::count_if(null_values.begin(), null_values.end(), [&](double v) { return v >= observed; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(null_values.size()) + 1.0);
}

PermutedYearEigenvalue::PermutedYearEigenvalue(const LexicalTable& table)
    : PermutedYearEigenvalue(table_weights(table), table.dense()) {}

PermutedYearEigenvalue::PermutedYearEigenvalue(const Eigen::VectorXd& row_weights, const Eigen::MatrixXd& counts) {
  if (counts.rows() != row_weights.size()) throw AnalysisError("row weights do not match the table");
  weights_ = row_weights / row_weights.sum();
  sqrt_weights_ = weights_.cwiseSqrt();

  const double total = counts.sum();
  const Eigen::MatrixXd p = counts / total;
  const Eigen::VectorXd rows = p.rowwise().sum();
  const Eigen::VectorXd cols = p.colwise().sum().transpose();
  if ((cols.array() <= 0.0).any()) throw AnalysisError("word group has a zero column margin");
  // Word block of the juxtaposed matrix, same standardization as mfact().
  Eigen::MatrixXd block = (p - rows * cols.transpose()).array().colwise() / weights_.array();
  block = block.array().rowwise() / cols.transpose().array();
  block = sqrt_weights_.asDiagonal() * block * cols.cwiseSqrt().asDiagonal();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeThinU);
  const Eigen::VectorXd sigma = svd.singularValues();
  const double first = sigma(0) * sigma(0);
  if (!(first > 1e-12)) throw AnalysisError("word group has a null first eigenvalue");
  basis_ = svd.matrixU();
  eigenvalues_ = sigma.cwiseAbs2() / first;  // balanced: leading eigenvalue is 1
}

double PermutedYearEigenvalue::lambda1(const Eigen::VectorXd& years) const {
  // Global row cross-product = A A^T + b b^T, with A the balanced word block
  // and b = D_r^1/2 z (the year group has separate eigenvalue 1). Its largest
  // eigenvalue is the largest root of
  //   f(mu) = 1 - sum_k a_k^2 / (mu - lambda_k) - beta^2 / mu,
  // a = U^T b, beta^2 = |b|^2 - |a|^2, bracketed by [lambda_1, lambda_1 + |b|^2].
  const Eigen::VectorXd z = standardize_weighted(years, weights_);
  const Eigen::VectorXd b = sqrt_weights_.cwiseProduct(z);
  const Eigen::VectorXd a = basis_.transpose() * b;
  const Eigen::VectorXd a2 = a.cwiseAbs2();
  const double b2 = b.squaredNorm();
  const double beta2 = std::max(0.0, b2 - a2.sum());

  auto f = [&](double mu) {
    double s = 1.0 - beta2 / mu;
    for (Eigen::Index k = 0; k < a2.size(); ++k) s -= a2(k) / (mu - eigenvalues_(k));
    return s;
  };
  double lo = eigenvalues_(0);
  double hi = eigenvalues_(0) + b2;
  for (int iter = 0; iter < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PermutationTestResult permutation_test(const LexicalTable& table, const std::vector<double>& years,
                                       const PermutationOptions& options) {
  if (options.replications < 99) throw ConfigError("permutation test needs at least 99 replications");
  if (years.size() != table.rows()) {
    throw AnalysisError(fmt::format("{} years given for {} table rows", years.size(), table.rows()));
  }
  const PermutedYearEigenvalue engine(table);
  const Eigen::Map<const Eigen::VectorXd> observed_years(years.data(), static_cast<Eigen::Index>(years.size()));

  PermutationTestResult res;
  res.replications = options.replications;
  res.seed = options.seed;
  res.observed_lambda1 = engine.lambda1(observed_years);
  res.null_values.assign(static_cast<std::size_t>(options.replications), 0.0);

  auto run_range = [&](std::size_t begin, std::size_t end) {
    std::vector<double> permuted(years);
    for (std::size_t b = begin; b < end; ++b) {
      std::mt19937_64 rng(stream_seed(options.seed, b));
      std::copy(years.begin(), years.end(), permuted.begin());
      shuffle_in_place(std::span<double>(permuted), rng);
      res.null_values[b] =
          engine.lambda1(Eigen::Map<const Eigen::VectorXd>(permuted.data(), static_cast<Eigen::Index>(permuted.size())));
    }
  };

  const std::size_t B = res.null_values.size();
  const std::size_t workers = static_cast<std::size_t>(std::clamp(options.threads, 1, 64));
  if (workers == 1) {
    run_range(0, B);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (B + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(B, w * chunk);
      const std::size_t end = std::min(B, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  res.p_value = permutation_p_value(res.observed_lambda1, res.null_values);
  return res;
}

}  // namespace chronolex

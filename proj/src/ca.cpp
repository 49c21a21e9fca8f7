#include "chronolex/ca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "chronolex/csv.hpp"
#include "chronolex/error.hpp"

namespace chronolex {

namespace {

std::vector<std::string> default_labels(std::vector<std::string> labels, Eigen::Index n, const char* prefix) {
  if (labels.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(fmt::format("{}{}", prefix, i + 1));
  }
  if (static_cast<Eigen::Index>(labels.size()) != n) throw AnalysisError("label count does not match table shape");
  return labels;
}

}  // namespace

double CaResult::inertia_share(Eigen::Index k) const {
  return total_inertia > 0.0 ? eigenvalues(k) / total_inertia : 0.0;
}

double chi_square_statistic(const Eigen::MatrixXd& counts) {
  const double n = counts.sum();
  const Eigen::VectorXd rows = counts.rowwise().sum();
  const Eigen::VectorXd cols = counts.colwise().sum();
  double chi2 = 0.0;
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      const double expected = rows(i) * cols(j) / n;
      const double d = counts(i, j) - expected;
      chi2 += d * d / expected;
    }
  }
  return chi2;
}

CaResult correspondence_analysis(const LexicalTable& table, int n_axes) {
  return correspondence_analysis(table.dense(), n_axes, table.row_ids(), table.col_words());
}

CaResult correspondence_analysis(const Eigen::MatrixXd& counts, int n_axes, std::vector<std::string> row_labels,
                                 std::vector<std::string> col_labels) {
  const Eigen::Index R = counts.rows();
  const Eigen::Index C = counts.cols();
  if (R < 2 || C < 2) throw AnalysisError(fmt::format("CA needs at least 2 rows and 2 columns, got {}x{}", R, C));
  if ((counts.array() < 0.0).any()) throw AnalysisError("CA needs non-negative counts");
  const double n = counts.sum();
  if (!(n > 0.0)) throw AnalysisError("CA needs a positive grand total");
  if (n_axes < 1) throw AnalysisError("number of axes must be >= 1");

  CaResult res;
  res.row_labels = default_labels(std::move(row_labels), R, "row");
  res.col_labels = default_labels(std::move(col_labels), C, "col");

  const Eigen::MatrixXd P = counts / n;
  res.row_weights = P.rowwise().sum();
  res.col_weights = P.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < R; ++i) {
    if (res.row_weights(i) <= 0.0) throw AnalysisError(fmt::format("zero row margin for '{}'", res.row_labels[i]));
  }
  for (Eigen::Index j = 0; j < C; ++j) {
    if (res.col_weights(j) <= 0.0) throw AnalysisError(fmt::format("zero column margin for '{}'", res.col_labels[j]));
  }

  const Eigen::VectorXd r_isqrt = res.row_weights.array().rsqrt();
  const Eigen::VectorXd c_isqrt = res.col_weights.array().rsqrt();
  // Standardized residuals (p_ij - r_i c_j) / sqrt(r_i c_j).
  const Eigen::MatrixXd S =
      r_isqrt.asDiagonal() * (P - res.row_weights * res.col_weights.transpose()) * c_isqrt.asDiagonal();
  res.total_inertia = S.squaredNorm();

  const Eigen::Index max_rank = std::min(R, C) - 1;
  Eigen::Index K = n_axes;
  if (K > max_rank) {
    res.warnings.push_back(fmt::format("requested {} axes, clamped to {}", n_axes, max_rank));
    K = max_rank;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();

  res.eigenvalues = Eigen::VectorXd::Zero(K);
  res.row_coords = Eigen::MatrixXd::Zero(R, K);
  res.col_coords = Eigen::MatrixXd::Zero(C, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double lambda = sigma(k) * sigma(k);
    if (lambda <= kNullEigenvalue) continue;
    res.eigenvalues(k) = lambda;
    Eigen::VectorXd g = c_isqrt.asDiagonal() * svd.matrixV().col(k) * sigma(k);
    Eigen::VectorXd f = r_isqrt.asDiagonal() * svd.matrixU().col(k) * sigma(k);
    Eigen::Index jmax = 0;
    g.cwiseAbs().maxCoeff(&jmax);
    if (g(jmax) < 0.0) {
      g = -g;
      f = -f;
    }
    res.row_coords.col(k) = f;
    res.col_coords.col(k) = g;
  }

  res.row_contrib = Eigen::MatrixXd::Zero(R, K);
  res.col_contrib = Eigen::MatrixXd::Zero(C, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (res.eigenvalues(k) == 0.0) continue;
    res.row_contrib.col(k) =
        res.row_weights.cwiseProduct(res.row_coords.col(k).cwiseAbs2()) / res.eigenvalues(k);
    res.col_contrib.col(k) =
        res.col_weights.cwiseProduct(res.col_coords.col(k).cwiseAbs2()) / res.eigenvalues(k);
  }

  // Squared chi-square distance of each profile to the centroid.
  const Eigen::VectorXd row_d2 = S.rowwise().squaredNorm().cwiseQuotient(res.row_weights);
  const Eigen::VectorXd col_d2 = S.colwise().squaredNorm().transpose().cwiseQuotient(res.col_weights);
  res.row_cos2 = Eigen::MatrixXd::Zero(R, K);
  res.col_cos2 = Eigen::MatrixXd::Zero(C, K);
  for (Eigen::Index i = 0; i < R; ++i) {
    if (row_d2(i) > 0.0) res.row_cos2.row(i) = res.row_coords.row(i).cwiseAbs2() / row_d2(i);
  }
  for (Eigen::Index j = 0; j < C; ++j) {
    if (col_d2(j) > 0.0) res.col_cos2.row(j) = res.col_coords.row(j).cwiseAbs2() / col_d2(j);
  }
  return res;
}

std::pair<MetaSet, MetaSet> extract_meta(const CaResult& result, Eigen::Index axis, MetaKind kind,
                                         MetaThreshold threshold) {
  if (axis < 0 || axis >= result.axes()) {
    throw AnalysisError(fmt::format("axis {} not among the {} retained axes", axis + 1, result.axes()));
  }
  const bool words = kind == MetaKind::metakey;
  const Eigen::MatrixXd& coords = words ? result.col_coords : result.row_coords;
  const Eigen::MatrixXd& contrib = words ? result.col_contrib : result.row_contrib;
  const auto& labels = words ? result.col_labels : result.row_labels;
  const double cutoff = threshold.multiplier / static_cast<double>(coords.rows());

  MetaSet pos{axis, AxisSign::positive, kind, {}};
  MetaSet neg{axis, AxisSign::negative, kind, {}};
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    const double ctr = contrib(i, axis);
    if (!(ctr > cutoff)) continue;
    const double x = coords(i, axis);
    MetaMember m{labels[i], ctr, x};
    if (x > 0.0) {
      pos.members.push_back(std::move(m));
    } else if (x < 0.0) {
      neg.members.push_back(std::move(m));
    }
  }
  auto by_contribution = [](const MetaMember& a, const MetaMember& b) {
    return a.contribution != b.contribution ? a.contribution > b.contribution : a.label < b.label;
  };
  std::sort(pos.members.begin(), pos.members.end(), by_contribution);
  std::sort(neg.members.begin(), neg.members.end(), by_contribution);
  return {std::move(pos), std::move(neg)};
}

void write_ca_eigenvalues_csv(const CaResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  CsvWriter w(out);
  w.row({"axis", "eigenvalue", "percent_inertia", "cumulative_percent"});
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < result.axes(); ++k) {
    const double pct = 100.0 * result.inertia_share(k);
    cumulative += pct;
    w.field(static_cast<long long>(k + 1)).field(result.eigenvalues(k)).field(pct).field(cumulative);
    w.end_row();
  }
}

void write_ca_points_csv(const CaResult& result, MetaKind kind, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const bool words = kind == MetaKind::metakey;
  const auto& labels = words ? result.col_labels : result.row_labels;
  const Eigen::VectorXd& weights = words ? result.col_weights : result.row_weights;
  const Eigen::MatrixXd& coords = words ? result.col_coords : result.row_coords;
  const Eigen::MatrixXd& contrib = words ? result.col_contrib : result.row_contrib;
  const Eigen::MatrixXd& cos2 = words ? result.col_cos2 : result.row_cos2;

  CsvWriter w(out);
  w.field(words ? "word" : "id").field("weight");
  for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(fmt::format("coord{}", k + 1));
  for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(fmt::format("contrib{}", k + 1));
  for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(fmt::format("cos2_{}", k + 1));
  w.end_row();
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    w.field(std::string_view(labels[i])).field(weights(i));
    for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(coords(i, k));
    for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(contrib(i, k));
    for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(cos2(i, k));
    w.end_row();
  }
}

}  // namespace chronolex

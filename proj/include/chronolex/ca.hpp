#pragma once

// Correspondence analysis under the chi-square metric.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chronolex/lextable.hpp"

namespace chronolex {

/// Eigenvalues at or below this are null axes; their coordinates are zeroed.
inline constexpr double kNullEigenvalue = 1e-12;

struct CaResult {
  Eigen::VectorXd eigenvalues;  // retained axes, non-increasing
  double total_inertia = 0.0;   // sum over all axes, equals chi2 / n..
  Eigen::MatrixXd row_coords;   // F, rows x axes
  Eigen::MatrixXd col_coords;   // G, cols x axes
  Eigen::MatrixXd row_contrib;  // r_i F_ik^2 / lambda_k
  Eigen::MatrixXd col_contrib;
  Eigen::MatrixXd row_cos2;  // F_ik^2 / d^2(i, centroid)
  Eigen::MatrixXd col_cos2;
  Eigen::VectorXd row_weights;  // r_i = n_i. / n..
  Eigen::VectorXd col_weights;  // c_j = n_.j / n..
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::string> warnings;

  Eigen::Index axes() const { return eigenvalues.size(); }
  /// Share of total inertia carried by axis k (0 when the table is independent).
  double inertia_share(Eigen::Index k) const;
};

/// Requires >= 2 rows, >= 2 columns and no zero margin (AnalysisError otherwise).
/// n_axes beyond min(rows, cols) - 1 is clamped with a warning. Each axis is
/// oriented so the column point with the largest |coordinate| is positive.
CaResult correspondence_analysis(const LexicalTable& table, int n_axes);
CaResult correspondence_analysis(const Eigen::MatrixXd& counts, int n_axes,
                                 std::vector<std::string> row_labels = {},
                                 std::vector<std::string> col_labels = {});

/// Pearson chi-square statistic of the table under independence.
double chi_square_statistic(const Eigen::MatrixXd& counts);

enum class MetaKind { metakey, metadoc };
enum class AxisSign { positive, negative };

struct MetaMember {
  std::string label;
  double contribution;
  double coordinate;
};

struct MetaSet {
  Eigen::Index axis;
  AxisSign sign;
  MetaKind kind;
  std::vector<MetaMember> members;  // contribution descending
};

/// Selects points with contribution > multiplier / (number of points).
struct MetaThreshold {
  double multiplier = 1.0;
};

/// Returns {positive, negative}. Throws AnalysisError for an axis out of range.
std::pair<MetaSet, MetaSet> extract_meta(const CaResult& result, Eigen::Index axis, MetaKind kind,
                                         MetaThreshold threshold = {});

void write_ca_eigenvalues_csv(const CaResult& result, const std::filesystem::path& path);
/// One row per point: label, weight, then coord/contrib/cos2 per axis.
void write_ca_points_csv(const CaResult& result, MetaKind kind, const std::filesystem::path& path);

}  // namespace chronolex

#pragma once

// Multiple factor analysis for contingency tables (MFACT) on the juxtaposed
// table [word frequencies | publication year], plus the illustrative
// projections and the permutation test of the first global eigenvalue.
//
// Conventions:
//  * rows carry the lexical-table CA weights r_i = n_i. / n..
//  * a frequency group enters as x_ij = (p_ij - p_i. c_j) / (r_i c_j) with
//    column weight c_j (p computed within the group), which reproduces CA
//    when the group is analysed alone with its own row margins;
//  * a quantitative column is standardized to weighted mean 0, variance 1;
//  * every group is weighted by 1 / (first eigenvalue of its separate analysis);
//  * partial row coordinates are dilated by the number of groups, so the
//    global point is the mean of the partial points.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "chronolex/lextable.hpp"

namespace chronolex {

struct FrequencyGroup {
  std::string name;
  Eigen::MatrixXd counts;  // rows x words
  std::vector<std::string> columns;
};

struct QuantitativeGroup {
  std::string name;
  Eigen::VectorXd values;  // one per row; NaN marks a missing value
  std::string column;
};

using GroupData = std::variant<FrequencyGroup, QuantitativeGroup>;

enum class GroupKind { frequency, quantitative };

struct GroupSpec {
  std::string name;
  GroupKind kind = GroupKind::frequency;
  std::vector<std::string> columns;
  double separate_first_eigenvalue = 0.0;
  double weight = 1.0;  // 1 / separate_first_eigenvalue when balancing
};

struct MfactOptions {
  int n_axes = 5;
  bool balance = true;
};

struct MfactResult {
  Eigen::VectorXd global_eigenvalues;
  double total_inertia = 0.0;
  Eigen::MatrixXd row_coords;  // rows x axes
  /// Column coordinates sum_i r_i x_ij F_ik / sqrt(lambda_k) over the
  /// unweighted standardized values: words land at the CA transition
  /// position, a quantitative column at its correlation with the axis.
  Eigen::MatrixXd col_coords;
  std::vector<std::string> col_labels;
  std::vector<std::size_t> col_group;
  std::vector<Eigen::MatrixXd> partial_row_coords;  // one rows x axes matrix per group
  std::vector<GroupSpec> groups;
  Eigen::MatrixXd group_contrib;  // groups x axes, columns sum to 1
  /// Weighted correlation of each axis with the quantitative group (empty without one).
  Eigen::VectorXd axis_year_correlation;
  Eigen::VectorXd row_weights;
  std::vector<std::string> row_ids;
  std::optional<std::size_t> vocabulary_group;
  std::optional<std::size_t> chronology_group;
  std::vector<std::string> warnings;

  Eigen::Index axes() const { return global_eigenvalues.size(); }
};

/// General entry point. Row weights are normalized to sum to one. Throws
/// AnalysisError on missing or constant quantitative values, zero column
/// margins or a group with a null first eigenvalue.
MfactResult mfact(const Eigen::VectorXd& row_weights, std::vector<GroupData> groups, const MfactOptions& options,
                  std::vector<std::string> row_ids = {});

/// Words + year with the lexical table's CA row weights.
MfactResult mfact(const LexicalTable& table, const std::vector<double>& years, int n_axes);

std::vector<double> to_double_years(const std::vector<int>& years);

/// Standardized values under row weights (sum to one). Throws AnalysisError
/// on NaN or zero weighted variance.
Eigen::VectorXd standardize_weighted(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

// --- permutation test ------------------------------------------------------

struct PermutationOptions {
  int replications = 999;
  std::uint64_t seed = 20240601;
  int threads = 1;
};

struct PermutationTestResult {
  double observed_lambda1 = 0.0;
  int replications = 0;
  std::vector<double> null_values;  // in replication-index order
  double p_value = 1.0;             // (1 + #{null >= observed}) / (B + 1)
  std::uint64_t seed = 0;
};

double permutation_p_value(double observed, const std::vector<double>& null_values);

/// First MFACT eigenvalue of [words | permuted year] for many permutations.
/// The word group is decomposed once; each permutation solves the rank-one
/// update (secular equation) of the word group's row cross-product.
class PermutedYearEigenvalue {
 public:
  PermutedYearEigenvalue(const LexicalTable& table);
  PermutedYearEigenvalue(const Eigen::VectorXd& row_weights, const Eigen::MatrixXd& counts);

  /// First global eigenvalue for the given per-row year values.
  double lambda1(const Eigen::VectorXd& years) const;

  const Eigen::VectorXd& row_weights() const { return weights_; }

 private:
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_weights_;
  Eigen::MatrixXd basis_;        // left singular vectors of the balanced word block
  Eigen::VectorXd eigenvalues_;  // their eigenvalues, non-increasing
};

/// Requires replications >= 99. Replication b permutes the years with a
/// generator seeded from (seed, b), so the result does not depend on thread count.
PermutationTestResult permutation_test(const LexicalTable& table, const std::vector<double>& years,
                                       const PermutationOptions& options);

// --- illustrative projections ------------------------------------------------

enum class Viewpoint { global, vocabulary, chronology };

struct ProjectedCategory {
  std::string label;
  Eigen::VectorXd coords;
  std::size_t members = 0;
  double weight = 0.0;  // sum of member row weights
};

struct CategoryProjection {
  std::string variable;
  Viewpoint viewpoint = Viewpoint::global;
  std::vector<ProjectedCategory> categories;  // sorted by label unless an order is given
  std::vector<std::string> warnings;
};

/// Row-weighted centroid of each category's members. When `order` is given,
/// categories appear in that order and empty ones are dropped with a warning.
CategoryProjection project_categories(const MfactResult& result, const std::vector<std::string>& assignment,
                                      Viewpoint viewpoint, std::string variable = "category",
                                      const std::vector<std::string>& order = {});

const Eigen::MatrixXd& viewpoint_coords(const MfactResult& result, Viewpoint viewpoint);

struct TrajectoryPoint {
  int year = 0;
  Eigen::VectorXd coords;  // vocabulary viewpoint
  std::size_t members = 0;
};

struct YearTrajectory {
  std::vector<TrajectoryPoint> points;  // ascending year
  std::vector<double> gaps;             // |axis-1 difference| between consecutive points
};

YearTrajectory year_trajectory(const MfactResult& result, const std::vector<int>& years);

// --- exports -------------------------------------------------------------------

void write_mfact_eigenvalues_csv(const MfactResult& result, const std::filesystem::path& path);
/// Global and partial row coordinates (partials dilated by the number of groups).
void write_mfact_rows_csv(const MfactResult& result, const std::filesystem::path& path);
void write_mfact_cols_csv(const MfactResult& result, const std::filesystem::path& path);
void write_mfact_groups_csv(const MfactResult& result, const std::filesystem::path& path);
void write_trajectory_csv(const YearTrajectory& trajectory, const std::filesystem::path& path);
void write_categories_csv(const std::vector<CategoryProjection>& projections, const std::filesystem::path& path);
void write_permutation_csv(const PermutationTestResult& result, const std::filesystem::path& summary_path,
                           const std::filesystem::path& null_path);

}  // namespace chronolex

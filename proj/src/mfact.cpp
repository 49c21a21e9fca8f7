#include "chronolex/mfact.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "chronolex/ca.hpp"
#include "chronolex/csv.hpp"
#include "chronolex/error.hpp"

namespace chronolex {

namespace {

struct PreparedGroup {
  GroupSpec spec;
  Eigen::MatrixXd values;        // standardized, before group weighting
  Eigen::VectorXd col_weights;   // before group weighting
};

PreparedGroup prepare(const FrequencyGroup& g, const Eigen::VectorXd& r) {
  if (g.counts.rows() != r.size()) {
    throw AnalysisError(fmt::format("group '{}' has {} rows, expected {}", g.name, g.counts.rows(), r.size()));
  }
  const double total = g.counts.sum();
  if (!(total > 0.0)) throw AnalysisError(fmt::format("group '{}' has a zero grand total", g.name));
  const Eigen::MatrixXd p = g.counts / total;
  const Eigen::VectorXd rows = p.rowwise().sum();
  const Eigen::VectorXd cols = p.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < cols.size(); ++j) {
    if (cols(j) <= 0.0) throw AnalysisError(fmt::format("group '{}': zero margin for column {}", g.name, j + 1));
  }
  PreparedGroup out;
  out.spec.name = g.name;
  out.spec.kind = GroupKind::frequency;
  out.spec.columns = g.columns;
  if (out.spec.columns.empty()) {
    for (Eigen::Index j = 0; j < cols.size(); ++j) out.spec.columns.push_back(fmt::format("{}{}", g.name, j + 1));
  }
  out.values = (p - rows * cols.transpose()).array().colwise() / r.array();
  out.values = out.values.array().rowwise() / cols.transpose().array();
  out.col_weights = cols;
  return out;
}

PreparedGroup prepare(const QuantitativeGroup& g, const Eigen::VectorXd& r) {
  if (g.values.size() != r.size()) {
    throw AnalysisError(fmt::format("group '{}' has {} rows, expected {}", g.name, g.values.size(), r.size()));
  }
  PreparedGroup out;
  out.spec.name = g.name;
  out.spec.kind = GroupKind::quantitative;
  out.spec.columns = {g.column.empty() ? g.name : g.column};
  out.values = standardize_weighted(g.values, r);
  out.col_weights = Eigen::VectorXd::Ones(1);
  return out;
}

double first_eigenvalue(const Eigen::MatrixXd& block) {
  if (block.cols() == 1) return block.squaredNorm();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(block);
  const double s = svd.singularValues()(0);
  return s * s;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

const char* viewpoint_name(Viewpoint v) {
  switch (v) {
    case Viewpoint::global:
      return "global";
    case Viewpoint::vocabulary:
      return "vocabulary";
    case Viewpoint::chronology:
      return "chronology";
  }
  return "global";
}

}  // namespace

Eigen::VectorXd standardize_weighted(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::isnan(values(i))) throw AnalysisError(fmt::format("missing year for analysed row {}", i + 1));
  }
  const double mean = weights.dot(values);
  const Eigen::VectorXd centered = values.array() - mean;
  const double var = weights.dot(centered.cwiseAbs2());
  const double scale = values.cwiseAbs().maxCoeff();
  if (!(var > 1e-24 * std::max(1.0, scale * scale))) {
    throw AnalysisError("year column is constant (zero weighted variance)");
  }
  return centered / std::sqrt(var);
}

std::vector<double> to_double_years(const std::vector<int>& years) {
  return {years.begin(), years.end()};
}

MfactResult mfact(const Eigen::VectorXd& row_weights, std::vector<GroupData> groups, const MfactOptions& options,
                  std::vector<std::string> row_ids) {
  if (groups.empty()) throw AnalysisError("MFACT needs at least one group");
  if (options.n_axes < 1) throw AnalysisError("number of axes must be >= 1");
  const Eigen::Index n = row_weights.size();
  if (n < 2) throw AnalysisError("MFACT needs at least 2 rows");
  if ((row_weights.array() <= 0.0).any()) throw AnalysisError("MFACT row weights must be positive");
  const Eigen::VectorXd r = row_weights / row_weights.sum();

  MfactResult res;
  res.row_weights = r;
  if (row_ids.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) row_ids.push_back(fmt::format("row{}", i + 1));
  }
  res.row_ids = std::move(row_ids);

  std::vector<PreparedGroup> prepared;
  for (const auto& g : groups) {
    prepared.push_back(std::visit([&](const auto& group) { return prepare(group, r); }, g));
  }

  const Eigen::VectorXd sqrt_r = r.cwiseSqrt();
  Eigen::Index total_cols = 0;
  Eigen::Index group_rank = 0;  // a frequency group loses one dimension to centering
  for (std::size_t g = 0; g < prepared.size(); ++g) {
    auto& pg = prepared[g];
    const Eigen::MatrixXd block =
        sqrt_r.asDiagonal() * pg.values * pg.col_weights.cwiseSqrt().asDiagonal();
    pg.spec.separate_first_eigenvalue = first_eigenvalue(block);
    if (!(pg.spec.separate_first_eigenvalue > kNullEigenvalue)) {
      throw AnalysisError(fmt::format("group '{}' has a null first eigenvalue", pg.spec.name));
    }
    pg.spec.weight = options.balance ? 1.0 / pg.spec.separate_first_eigenvalue : 1.0;
    total_cols += pg.values.cols();
    group_rank += pg.spec.kind == GroupKind::frequency ? pg.values.cols() - 1 : pg.values.cols();
    if (pg.spec.kind == GroupKind::frequency && !res.vocabulary_group) res.vocabulary_group = g;
    if (pg.spec.kind == GroupKind::quantitative && !res.chronology_group) res.chronology_group = g;
  }

  // Juxtaposed, weighted matrix Z = D_r^1/2 X D_m^1/2.
  Eigen::MatrixXd X(n, total_cols);
  Eigen::VectorXd m(total_cols);
  std::vector<Eigen::Index> offset;
  Eigen::Index col = 0;
  for (std::size_t g = 0; g < prepared.size(); ++g) {
    const auto& pg = prepared[g];
    offset.push_back(col);
    X.middleCols(col, pg.values.cols()) = pg.values;
    m.segment(col, pg.values.cols()) = pg.col_weights * pg.spec.weight;
    for (const auto& label : pg.spec.columns) {
      res.col_labels.push_back(label);
      res.col_group.push_back(g);
    }
    col += pg.values.cols();
  }
  offset.push_back(col);
  const Eigen::VectorXd sqrt_m = m.cwiseSqrt();
  const Eigen::MatrixXd Z = sqrt_r.asDiagonal() * X * sqrt_m.asDiagonal();
  res.total_inertia = Z.squaredNorm();

  const Eigen::Index max_rank = std::max<Eigen::Index>(1, std::min(n - 1, group_rank));
  Eigen::Index K = options.n_axes;
  if (K > max_rank) {
    res.warnings.push_back(fmt::format("requested {} axes, clamped to {}", options.n_axes, max_rank));
    K = max_rank;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd U = svd.matrixU().leftCols(K);
  Eigen::MatrixXd V = svd.matrixV().leftCols(K);
  const Eigen::VectorXd sigma = svd.singularValues().head(K);

  const std::size_t G = prepared.size();
  std::optional<Eigen::VectorXd> z;
  if (res.chronology_group) z = prepared[*res.chronology_group].values.col(0);

  res.global_eigenvalues = Eigen::VectorXd::Zero(K);
  res.row_coords = Eigen::MatrixXd::Zero(n, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double lambda = sigma(k) * sigma(k);
    if (lambda <= kNullEigenvalue) {
      U.col(k).setZero();
      V.col(k).setZero();
      continue;
    }
    res.global_eigenvalues(k) = lambda;
    Eigen::VectorXd f = sqrt_r.cwiseInverse().asDiagonal() * U.col(k) * sigma(k);
    // Orientation: positive correlation with the quantitative column when
    // there is one, else the largest |loading| positive.
    double orientation = 0.0;
    if (z) orientation = r.dot(z->cwiseProduct(f));
    if (std::abs(orientation) <= 1e-12 * sigma(k)) {
      Eigen::Index jmax = 0;
      V.col(k).cwiseAbs().maxCoeff(&jmax);
      orientation = V(jmax, k);
    }
    if (orientation < 0.0) {
      U.col(k) = -U.col(k);
      V.col(k) = -V.col(k);
      f = -f;
    }
    res.row_coords.col(k) = f;
  }

  // Partial rows: G * X_g D_mg^1/2 V_g, so their mean is the global point.
  res.partial_row_coords.assign(G, Eigen::MatrixXd::Zero(n, K));
  res.group_contrib = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(G), K);
  for (std::size_t g = 0; g < G; ++g) {
    const Eigen::Index begin = offset[g];
    const Eigen::Index width = offset[g + 1] - begin;
    res.partial_row_coords[g] = static_cast<double>(G) * X.middleCols(begin, width) *
                                sqrt_m.segment(begin, width).asDiagonal() * V.middleRows(begin, width);
    res.group_contrib.row(static_cast<Eigen::Index>(g)) = V.middleRows(begin, width).colwise().squaredNorm();
  }

  res.col_coords = Eigen::MatrixXd::Zero(total_cols, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (res.global_eigenvalues(k) == 0.0) continue;
    res.col_coords.col(k) = X.transpose() * r.cwiseProduct(res.row_coords.col(k)) / sigma(k);
  }

  if (z) {
    res.axis_year_correlation = Eigen::VectorXd::Zero(K);
    for (Eigen::Index k = 0; k < K; ++k) {
      if (res.global_eigenvalues(k) == 0.0) continue;
      const Eigen::VectorXd& f = res.row_coords.col(k);
      const double sd_f = std::sqrt(r.dot(f.cwiseAbs2()));
      res.axis_year_correlation(k) = std::clamp(r.dot(z->cwiseProduct(f)) / sd_f, -1.0, 1.0);
    }
  }

  for (auto& pg : prepared) res.groups.push_back(std::move(pg.spec));
  return res;
}

MfactResult mfact(const LexicalTable& table, const std::vector<double>& years, int n_axes) {
  if (years.size() != table.rows()) {
    throw AnalysisError(fmt::format("{} years given for {} table rows", years.size(), table.rows()));
  }
  Eigen::VectorXd r(static_cast<Eigen::Index>(table.rows()));
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (table.row_margins()[i] <= 0) throw AnalysisError(fmt::format("zero row margin for '{}'", table.row_ids()[i]));
    r(static_cast<Eigen::Index>(i)) = static_cast<double>(table.row_margins()[i]);
  }
  std::vector<GroupData> groups;
  groups.emplace_back(FrequencyGroup{"words", table.dense(), table.col_words()});
  groups.emplace_back(QuantitativeGroup{"year", Eigen::Map<const Eigen::VectorXd>(years.data(), r.size()), "year"});
  return mfact(r, std::move(groups), MfactOptions{n_axes, true}, table.row_ids());
}

const Eigen::MatrixXd& viewpoint_coords(const MfactResult& result, Viewpoint viewpoint) {
  switch (viewpoint) {
    case Viewpoint::global:
      return result.row_coords;
    case Viewpoint::vocabulary:
      if (!result.vocabulary_group) throw AnalysisError("result has no frequency group");
      return result.partial_row_coords[*result.vocabulary_group];
    case Viewpoint::chronology:
      if (!result.chronology_group) throw AnalysisError("result has no quantitative group");
      return result.partial_row_coords[*result.chronology_group];
  }
  return result.row_coords;
}

CategoryProjection project_categories(const MfactResult& result, const std::vector<std::string>& assignment,
                                      Viewpoint viewpoint, std::string variable,
                                      const std::vector<std::string>& order) {
  const Eigen::MatrixXd& coords = viewpoint_coords(result, viewpoint);
  if (assignment.size() != static_cast<std::size_t>(coords.rows())) {
    throw AnalysisError(fmt::format("{} labels given for {} analysed rows", assignment.size(), coords.rows()));
  }
  std::map<std::string, ProjectedCategory> acc;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    auto& cat = acc[assignment[i]];
    if (cat.members == 0) {
      cat.label = assignment[i];
      cat.coords = Eigen::VectorXd::Zero(coords.cols());
    }
    const double w = result.row_weights(static_cast<Eigen::Index>(i));
    cat.coords += w * coords.row(static_cast<Eigen::Index>(i)).transpose();
    cat.weight += w;
    cat.members += 1;
  }

  CategoryProjection out;
  out.variable = std::move(variable);
  out.viewpoint = viewpoint;
  auto finish = [](ProjectedCategory cat) {
    cat.coords /= cat.weight;
    return cat;
  };
  if (order.empty()) {
    for (auto& [label, cat] : acc) out.categories.push_back(finish(std::move(cat)));
  } else {
    for (const auto& label : order) {
      auto it = acc.find(label);
      if (it == acc.end()) {
        out.warnings.push_back(fmt::format("category '{}' has no members; dropped", label));
        continue;
      }
      out.categories.push_back(finish(std::move(it->second)));
      acc.erase(it);
    }
    for (auto& [label, cat] : acc) {
      out.warnings.push_back(fmt::format("label '{}' not in the category order; appended", label));
      out.categories.push_back(finish(std::move(cat)));
    }
  }
  return out;
}

YearTrajectory year_trajectory(const MfactResult& result, const std::vector<int>& years) {
  std::vector<std::string> labels;
  labels.reserve(years.size());
  for (int y : years) labels.push_back(fmt::format("{:06d}", y));  // sortable key
  const auto proj = project_categories(result, labels, Viewpoint::vocabulary, "year");
  YearTrajectory t;
  for (const auto& cat : proj.categories) t.points.push_back({std::stoi(cat.label), cat.coords, cat.members});
  for (std::size_t i = 1; i < t.points.size(); ++i) {
    const auto& a = t.points[i - 1].coords;
    const auto& b = t.points[i].coords;
    t.gaps.push_back(a.size() > 0 ? std::abs(b(0) - a(0)) : 0.0);
  }
  return t;
}

void write_mfact_eigenvalues_csv(const MfactResult& result, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  w.row({"axis", "eigenvalue", "percent_inertia", "cumulative_percent", "year_correlation"});
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < result.axes(); ++k) {
    const double pct = 100.0 * result.global_eigenvalues(k) / result.total_inertia;
    cumulative += pct;
    w.field(static_cast<long long>(k + 1)).field(result.global_eigenvalues(k)).field(pct).field(cumulative);
    if (result.axis_year_correlation.size() > 0) {
      w.field(result.axis_year_correlation(k));
    } else {
      w.field("");
    }
    w.end_row();
  }
}

void write_mfact_rows_csv(const MfactResult& result, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  // Partial coordinates use the MFA dilation by the number of groups.
  w.field("id").field("weight");
  for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(fmt::format("global{}", k + 1));
  for (const auto& g : result.groups) {
    for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(fmt::format("partial_{}{}", g.name, k + 1));
  }
  w.end_row();
  for (Eigen::Index i = 0; i < result.row_coords.rows(); ++i) {
    w.field(std::string_view(result.row_ids[static_cast<std::size_t>(i)])).field(result.row_weights(i));
    for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(result.row_coords(i, k));
    for (const auto& partial : result.partial_row_coords) {
      for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(partial(i, k));
    }
    w.end_row();
  }
}

void write_mfact_cols_csv(const MfactResult& result, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  w.field("column").field("group");
  for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(fmt::format("coord{}", k + 1));
  w.end_row();
  for (Eigen::Index j = 0; j < result.col_coords.rows(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    w.field(std::string_view(result.col_labels[idx])).field(std::string_view(result.groups[result.col_group[idx]].name));
    for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(result.col_coords(j, k));
    w.end_row();
  }
}

void write_mfact_groups_csv(const MfactResult& result, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  // Contributions are shares of each axis's inertia after group balancing.
  w.field("group").field("kind").field("separate_first_eigenvalue").field("weight");
  for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(fmt::format("balanced_contrib{}", k + 1));
  w.end_row();
  for (std::size_t g = 0; g < result.groups.size(); ++g) {
    const auto& spec = result.groups[g];
    w.field(std::string_view(spec.name))
        .field(spec.kind == GroupKind::frequency ? "frequency" : "quantitative")
        .field(spec.separate_first_eigenvalue)
        .field(spec.weight);
    for (Eigen::Index k = 0; k < result.axes(); ++k) w.field(result.group_contrib(static_cast<Eigen::Index>(g), k));
    w.end_row();
  }
}

void write_trajectory_csv(const YearTrajectory& trajectory, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  const Eigen::Index K = trajectory.points.empty() ? 0 : trajectory.points.front().coords.size();
  w.field("year").field("documents");
  for (Eigen::Index k = 0; k < K; ++k) w.field(fmt::format("vocabulary{}", k + 1));
  w.field("gap_to_next");
  w.end_row();
  for (std::size_t i = 0; i < trajectory.points.size(); ++i) {
    const auto& p = trajectory.points[i];
    w.field(p.year).field(p.members);
    for (Eigen::Index k = 0; k < K; ++k) w.field(p.coords(k));
    if (i < trajectory.gaps.size()) {
      w.field(trajectory.gaps[i]);
    } else {
      w.field("");
    }
    w.end_row();
  }
}

void write_categories_csv(const std::vector<CategoryProjection>& projections, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  Eigen::Index K = 0;
  for (const auto& p : projections) {
    if (!p.categories.empty()) K = std::max(K, p.categories.front().coords.size());
  }
  w.field("variable").field("viewpoint").field("category").field("documents");
  for (Eigen::Index k = 0; k < K; ++k) w.field(fmt::format("coord{}", k + 1));
  w.end_row();
  for (const auto& p : projections) {
    for (const auto& c : p.categories) {
      w.field(std::string_view(p.variable)).field(viewpoint_name(p.viewpoint)).field(std::string_view(c.label)).field(c.members);
      for (Eigen::Index k = 0; k < K; ++k) w.field(k < c.coords.size() ? c.coords(k) : 0.0);
      w.end_row();
    }
  }
}

void write_permutation_csv(const PermutationTestResult& result, const std::filesystem::path& summary_path,
                           const std::filesystem::path& null_path) {
  {
    auto out = open_output(summary_path);
    CsvWriter w(out);
    w.row({"observed_lambda1", "replications", "exceedances", "p_value", "p_value_bound", "seed"});
    const auto exceed = std::count_if(result.null_values.begin(), result.null_values.end(),
                                      [&](double v) { return v >= result.observed_lambda1; });
    // With no exceedance the add-one estimate is the resolution limit 1/(B+1).
    const std::string bound = exceed == 0 ? fmt::format("p < {}", format_number(1.0 / (result.replications + 1)))
                                          : fmt::format("p = {}", format_number(result.p_value));
    w.field(result.observed_lambda1)
        .field(result.replications)
        .field(static_cast<long long>(exceed))
        .field(result.p_value)
        .field(std::string_view(bound))
        .field(std::to_string(result.seed));
    w.end_row();
  }
  auto out = open_output(null_path);
  CsvWriter w(out);
  w.row({"replication", "lambda1"});
  for (std::size_t b = 0; b < result.null_values.size(); ++b) {
    w.field(b + 1).field(result.null_values[b]);
    w.end_row();
  }
}

}  // namespace chronolex

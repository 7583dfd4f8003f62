#include "rubricnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "rubricnet/numfmt.hpp"

namespace rubricnet {
namespace {

// Sum of t(t - 1)/2 over runs of equal keys in an already sorted range.
template <class It, class Eq>
long long tied_pairs(It first, It last, Eq eq) {
  long long total = 0;
  while (first != last) {
    It run = first;
    long long t = 0;
    while (run != last && eq(*run, *first)) {
      ++run;
      ++t;
    }
    total += t * (t - 1) / 2;
    first = run;
  }
  return total;
}

// Stable merge sort of values, returning the number of strict inversions.
long long count_inversions(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

std::size_t distinct_count(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

double kendall_tau_c(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::analysis, "tau-c operands differ in length");
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) throw Error(Errc::analysis, "tau-c input contains NaN");
  }
  if (n < 2) return 0.0;

  const std::size_t m = std::min(distinct_count({x.begin(), x.end()}), distinct_count({y.begin(), y.end()}));
  if (m < 2) return 0.0;

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const long long all_pairs = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const long long x_ties = tied_pairs(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const long long joint_ties =
      tied_pairs(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] == x[b] && y[a] == y[b]; });

  std::vector<double> ys(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const long long discordant = count_inversions(ys, scratch, 0, n);  // ys is now sorted
  const long long y_ties = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  const long long c_minus_d = all_pairs - x_ties - y_ties + joint_ties - 2 * discordant;
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return 2.0 * md * static_cast<double>(c_minus_d) / (nd * nd * (md - 1.0));
}

CorrelationTable feature_difficulty_table(std::span<const FeatureArray> features, std::span<const int> labels) {
  if (features.size() != labels.size()) throw Error(Errc::analysis, "features/labels length mismatch");
  if (features.size() < 2) throw Error(Errc::analysis, "need at least two pieces");
  const std::vector<double> y(labels.begin(), labels.end());
  CorrelationTable table;
  std::vector<double> col(features.size());
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    for (std::size_t n = 0; n < features.size(); ++n) col[n] = features[n][j];
    table.entries.push_back({j, std::string(kFeatureNames[j]), kendall_tau_c(col, y)});
  }
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.tau) > std::abs(b.tau); });
  return table;
}

std::string correlation_table_csv(const CorrelationTable& table) {
  std::string out = "feature,tau_c\n";
  for (const auto& e : table.entries) out += e.name + "," + format_double(e.tau) + "\n";
  return out;
}

Matrix conditional_tau_matrix(const Matrix& columns, std::span<const int> labels) {
  const std::size_t p = columns.size();
  for (const auto& c : columns) {
    if (c.size() != labels.size()) throw Error(Errc::analysis, "feature column length mismatch");
  }
  std::vector<int> levels(labels.begin(), labels.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  Matrix sum(p, std::vector<double>(p, 0.0));
  int used = 0;
  for (int level : levels) {
    std::vector<std::size_t> members;
    for (std::size_t n = 0; n < labels.size(); ++n) {
      if (labels[n] == level) members.push_back(n);
    }
    if (members.size() < 2) continue;
    ++used;
    Matrix sub(p, std::vector<double>(members.size()));
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < members.size(); ++k) sub[j][k] = columns[j][members[k]];
    }
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        const double t = kendall_tau_c(sub[i], sub[j]);
        sum[i][j] += t;
        sum[j][i] += t;
      }
    }
  }
  if (used == 0) throw Error(Errc::analysis, "no difficulty level has two or more samples");
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) sum[i][j] = i == j ? 1.0 : sum[i][j] / used;
  }
  return sum;
}

Matrix conditional_tau_matrix(std::span<const FeatureArray> features, std::span<const int> labels) {
  Matrix columns(kNumFeatures, std::vector<double>(features.size()));
  for (std::size_t n = 0; n < features.size(); ++n) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) columns[j][n] = features[n][j];
  }
  return conditional_tau_matrix(columns, labels);
}

std::string matrix_csv(const Matrix& m, std::span<const std::string> names) {
  std::string out = "feature";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += i < names.size() ? names[i] : std::to_string(i);
    for (double v : m[i]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

GradeStatistics compute_grade_statistics(const ModelParams& params, const Dataset& data) {
  GradeStatistics stats;
  stats.num_levels = params.num_levels;
  std::vector<FeatureArray> sums(static_cast<std::size_t>(params.num_levels), FeatureArray{});
  stats.count.assign(static_cast<std::size_t>(params.num_levels), 0);
  for (const auto& s : data) {
    if (s.level < 1 || s.level > params.num_levels) throw Error(Errc::analysis, "sample level outside [1, K]");
    const auto normalized = normalize_scores(forward(params, s.x).scores);
    auto& acc = sums[static_cast<std::size_t>(s.level - 1)];
    for (std::size_t j = 0; j < kNumFeatures; ++j) acc[j] += normalized[j];
    ++stats.count[static_cast<std::size_t>(s.level - 1)];
  }
  stats.mean.resize(sums.size());
  for (std::size_t g = 0; g < sums.size(); ++g) {
    if (stats.count[g] == 0) continue;
    FeatureArray m;
    for (std::size_t j = 0; j < kNumFeatures; ++j) m[j] = sums[g][j] / static_cast<double>(stats.count[g]);
    stats.mean[g] = m;
  }
  return stats;
}

std::string grade_statistics_json(const GradeStatistics& stats) {
  using nlohmann::json;
  json doc;
  doc["K"] = stats.num_levels;
  json names = json::array();
  for (auto n : kFeatureNames) names.push_back(std::string(n));
  doc["feature_order"] = std::move(names);
  json grades = json::array();
  for (std::size_t g = 0; g < stats.mean.size(); ++g) {
    json row = {{"level", g + 1}, {"count", stats.count[g]}};
    row["mean"] = stats.mean[g] ? json(*stats.mean[g]) : json(nullptr);
    grades.push_back(std::move(row));
  }
  doc["grades"] = std::move(grades);
  return doc.dump(1) + "\n";
}

GradeStatistics parse_grade_statistics(std::string_view text) {
  using nlohmann::json;
  GradeStatistics stats;
  try {
    const json doc = json::parse(text);
    stats.num_levels = doc.at("K").get<int>();
    if (stats.num_levels < 2) throw Error(Errc::analysis, "grade statistics: K must be >= 2");
    const auto& grades = doc.at("grades");
    if (grades.size() != static_cast<std::size_t>(stats.num_levels)) {
      throw Error(Errc::analysis, "grade statistics: expected one entry per level");
    }
    stats.mean.resize(grades.size());
    stats.count.resize(grades.size());
    for (std::size_t g = 0; g < grades.size(); ++g) {
      stats.count[g] = grades[g].at("count").get<long>();
      const auto& m = grades[g].at("mean");
      if (m.is_null()) continue;
      const auto v = m.get<std::vector<double>>();
      if (v.size() != kNumFeatures) throw Error(Errc::analysis, "grade statistics: mean must have 12 entries");
      FeatureArray a;
      std::copy(v.begin(), v.end(), a.begin());
      stats.mean[g] = a;
    }
  } catch (const json::exception& e) {
    throw Error(Errc::analysis, std::string("grade statistics: ") + e.what());
  }
  return stats;
}

ContributionProfile grade_contributions(const ModelParams& params, const Dataset& test) {
  const GradeStatistics stats = compute_grade_statistics(params, test);
  if (!stats.mean[0]) throw Error(Errc::contribution, "grade 1 is absent, so the reference is undefined");
  ContributionProfile profile;
  profile.num_levels = params.num_levels;
  profile.relative.resize(stats.mean.size());
  for (std::size_t g = 0; g < stats.mean.size(); ++g) {
    if (!stats.mean[g]) continue;
    FeatureArray rel;
    for (std::size_t j = 0; j < kNumFeatures; ++j) rel[j] = (*stats.mean[g])[j] - (*stats.mean[0])[j];
    profile.relative[g] = rel;
  }
  return profile;
}

ContributionProfile grade_contributions(std::span<const SplitData> splits) {
  if (splits.empty()) throw Error(Errc::contribution, "no splits given");
  std::vector<ContributionProfile> profiles;
  for (const auto& s : splits) profiles.push_back(grade_contributions(*s.params, *s.test));
  const int levels = profiles.front().num_levels;
  for (const auto& p : profiles) {
    if (p.num_levels != levels) throw Error(Errc::contribution, "splits disagree on the number of levels");
  }
  ContributionProfile out;
  out.num_levels = levels;
  out.relative.resize(static_cast<std::size_t>(levels));
  for (std::size_t g = 0; g < out.relative.size(); ++g) {
    FeatureArray sum{};
    int n = 0;
    for (const auto& p : profiles) {
      if (!p.relative[g]) continue;
      for (std::size_t j = 0; j < kNumFeatures; ++j) sum[j] += (*p.relative[g])[j];
      ++n;
    }
    if (n == 0) continue;
    for (auto& v : sum) v /= n;
    out.relative[g] = sum;
  }
  return out;
}

std::string contribution_csv(const ContributionProfile& profile) {
  std::string out = "level";
  for (auto n : kFeatureNames) {
    out += ',';
    out += n;
  }
  out += "\n";
  for (std::size_t g = 0; g < profile.relative.size(); ++g) {
    if (!profile.relative[g]) continue;
    out += std::to_string(g + 1);
    for (double v : *profile.relative[g]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

Divergence grade_divergence(const ModelParams& params, const FeatureArray& x, std::optional<int> label,
                            const GradeStatistics& stats) {
  if (stats.num_levels != params.num_levels) throw Error(Errc::analysis, "grade statistics do not match the model K");
  const ForwardTrace trace = forward(params, x);
  Divergence d;
  d.from_prediction = !label.has_value();
  d.reference_level = label ? *label : predict_level(params, trace);
  if (d.reference_level < 1 || d.reference_level > stats.num_levels) {
    throw Error(Errc::analysis, "reference level outside [1, K]");
  }
  const auto& mean = stats.mean[static_cast<std::size_t>(d.reference_level - 1)];
  if (!mean) {
    throw Error(Errc::analysis, "no training statistics for level " + std::to_string(d.reference_level));
  }
  const auto normalized = normalize_scores(trace.scores);
  for (std::size_t j = 0; j < kNumFeatures; ++j) d.values[j] = normalized[j] - (*mean)[j];
  return d;
}

}  // namespace rubricnet

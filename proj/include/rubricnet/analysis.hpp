#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rubricnet/model.hpp"
#include "rubricnet/training.hpp"

namespace rubricnet {

using Matrix = std::vector<std::vector<double>>;

// Stuart's tau-c: 2m(C - D) / (n^2 (m - 1)), m = min(#distinct x, #distinct y).
// Pair counts come from an O(n log n) merge-sort inversion count; returns 0
// when m < 2.
double kendall_tau_c(std::span<const double> x, std::span<const double> y);

struct CorrelationEntry {
  std::size_t slot = 0;
  std::string name;
  double tau = 0.0;
};

// Sorted by |tau| descending; equal magnitudes keep slot order.
struct CorrelationTable {
  std::vector<CorrelationEntry> entries;
};

CorrelationTable feature_difficulty_table(std::span<const FeatureArray> features, std::span<const int> labels);
std::string correlation_table_csv(const CorrelationTable& table);

// columns[j][n] is feature j of sample n. Per pair of features, tau-c within
// each level having >= 2 samples, averaged over those levels; diagonal 1.
Matrix conditional_tau_matrix(const Matrix& columns, std::span<const int> labels);
Matrix conditional_tau_matrix(std::span<const FeatureArray> features, std::span<const int> labels);

Matrix correlation_to_distance(const Matrix& correlations);

// Cluster ids: leaves are 0..n-1, merge i creates cluster n + i.
struct Merge {
  int a = 0;
  int b = 0;
  double distance = 0.0;
  int size = 0;
};

struct Dendrogram {
  int leaves = 0;
  std::vector<Merge> merges;
};

// Average linkage; ties go to the pair with the smallest cluster ids.
Dendrogram agglomerative_cluster(const Matrix& distances);
std::vector<int> leaf_order(const Dendrogram& dendrogram);
std::string dendrogram_json(const Dendrogram& dendrogram, std::span<const std::string> names);
std::string matrix_csv(const Matrix& m, std::span<const std::string> names);

// Mean normalized descriptor score per grade on a reference set.
struct GradeStatistics {
  int num_levels = 0;
  std::vector<std::optional<FeatureArray>> mean;  // index level - 1
  std::vector<long> count;

  friend bool operator==(const GradeStatistics&, const GradeStatistics&) = default;
};

GradeStatistics compute_grade_statistics(const ModelParams& params, const Dataset& data);
std::string grade_statistics_json(const GradeStatistics& stats);
GradeStatistics parse_grade_statistics(std::string_view text);

// Per grade, mean normalized score minus the grade-1 mean. Grade 1 row is 0.
struct ContributionProfile {
  int num_levels = 0;
  std::vector<std::optional<FeatureArray>> relative;  // index level - 1
};

struct SplitData {
  const ModelParams* params = nullptr;
  const Dataset* test = nullptr;
};

ContributionProfile grade_contributions(const ModelParams& params, const Dataset& test);
// Per-grade average of the per-split profiles over splits containing the grade.
ContributionProfile grade_contributions(std::span<const SplitData> splits);
std::string contribution_csv(const ContributionProfile& profile);

struct Divergence {
  FeatureArray values{};
  int reference_level = 1;
  bool from_prediction = false;  // no label was available
};

Divergence grade_divergence(const ModelParams& params, const FeatureArray& x, std::optional<int> label,
                            const GradeStatistics& stats);

}  // namespace rubricnet

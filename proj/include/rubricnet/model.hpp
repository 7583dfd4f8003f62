#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rubricnet/descriptors.hpp"

namespace rubricnet {

// Standardization fitted on training features. Constant features get std 1.
struct Scaler {
  FeatureArray mean{};
  FeatureArray std{};

  Scaler() { std.fill(1.0); }
  static Scaler fit(std::span<const FeatureArray> rows);
  FeatureArray transform(const FeatureArray& x) const;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

// ordinal: K-1 cumulative sigmoid outputs, decoded by the prefix rule.
// one_hot: K softmax outputs, decoded by argmax (ablation head).
enum class Head { ordinal, one_hot };

std::string_view to_string(Head head);
Head parse_head(std::string_view text);

struct ModelParams {
  int num_levels = 2;
  Head head = Head::ordinal;
  FeatureArray w{};  // per-descriptor weight
  FeatureArray b{};  // per-descriptor bias
  std::vector<double> w_f;  // final layer, one entry per output
  std::vector<double> b_f;
  Scaler scaler;

  static ModelParams zeros(int num_levels, Head head = Head::ordinal);
  std::size_t num_outputs() const { return w_f.size(); }
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

std::size_t output_count(int num_levels, Head head);

struct ForwardTrace {
  FeatureArray scores{};  // tanh score per descriptor, in (-1, 1)
  double aggregate = 0.0;  // sum of scores
  std::vector<double> probs;
};

// Input already standardized (and possibly masked by dropout).
ForwardTrace forward_standardized(const ModelParams& params, const FeatureArray& x_hat);
ForwardTrace forward(const ModelParams& params, const FeatureArray& x);
inline ForwardTrace forward(const ModelParams& params, const FeatureVector& x) { return forward(params, x.values); }

// Level = 1 + length of the leading run of probabilities >= 0.5.
int decode(std::span<const double> probs);
int argmax_level(std::span<const double> probs);
int predict_level(const ModelParams& params, const ForwardTrace& trace);

FeatureArray normalize_scores(const FeatureArray& scores);
double normalize_score(double s);
double rescale_aggregate(double aggregate, std::size_t n = kNumFeatures);

// S_agg at which each cumulative output crosses 0.5; nullopt where w_f is 0.
std::vector<std::optional<double>> decision_boundaries(const ModelParams& params);
bool boundaries_ordered(const ModelParams& params);
// Prefix rule applied to S_agg directly; equals decode(forward(x)) whenever
// every w_f entry is positive.
int level_from_boundaries(std::span<const std::optional<double>> boundaries, double aggregate);

std::string save_checkpoint(const ModelParams& params);
ModelParams load_checkpoint(std::string_view text, std::optional<int> expected_levels = std::nullopt);

}  // namespace rubricnet

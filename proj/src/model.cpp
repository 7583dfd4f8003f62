#include "rubricnet/model.hpp"

#include <algorithm>
#include <cmath>

namespace rubricnet {

std::string_view to_string(Head head) { return head == Head::ordinal ? "ordinal" : "one-hot"; }

Head parse_head(std::string_view text) {
  if (text == "ordinal") return Head::ordinal;
  if (text == "one-hot") return Head::one_hot;
  throw Error(Errc::invalid_argument, "unknown head '" + std::string(text) + "'");
}

Scaler Scaler::fit(std::span<const FeatureArray> rows) {
  Scaler s;
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[j];
    mean /= n;
    double var = 0.0;
    for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(var / n);
    s.mean[j] = mean;
    s.std[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

FeatureArray Scaler::transform(const FeatureArray& x) const {
  FeatureArray out;
  for (std::size_t j = 0; j < kNumFeatures; ++j) out[j] = (x[j] - mean[j]) / std[j];
  return out;
}

std::size_t output_count(int num_levels, Head head) {
  return static_cast<std::size_t>(head == Head::ordinal ? num_levels - 1 : num_levels);
}

ModelParams ModelParams::zeros(int num_levels, Head head) {
  if (num_levels < 2) throw Error(Errc::invalid_argument, "number of levels must be >= 2");
  ModelParams p;
  p.num_levels = num_levels;
  p.head = head;
  p.w_f.assign(output_count(num_levels, head), 0.0);
  p.b_f.assign(output_count(num_levels, head), 0.0);
  return p;
}

void ModelParams::validate() const {
  if (num_levels < 2) throw Error(Errc::invalid_argument, "number of levels must be >= 2");
  const auto n = output_count(num_levels, head);
  if (w_f.size() != n || b_f.size() != n) throw Error(Errc::invalid_argument, "final layer size mismatch");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(w.begin(), w.end(), finite) || !std::all_of(b.begin(), b.end(), finite) ||
      !std::all_of(w_f.begin(), w_f.end(), finite) || !std::all_of(b_f.begin(), b_f.end(), finite)) {
    throw Error(Errc::numeric, "non-finite parameter");
  }
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (!(scaler.std[j] > 0.0) || !std::isfinite(scaler.mean[j])) {
      throw Error(Errc::invalid_argument, "scaler std must be positive");
    }
  }
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

ForwardTrace forward_standardized(const ModelParams& params, const FeatureArray& x_hat) {
  ForwardTrace t;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    t.scores[i] = std::tanh(params.w[i] * x_hat[i] + params.b[i]);
    t.aggregate += t.scores[i];
  }
  const std::size_t n = params.w_f.size();
  t.probs.resize(n);
  if (params.head == Head::ordinal) {
    for (std::size_t k = 0; k < n; ++k) t.probs[k] = sigmoid(t.aggregate * params.w_f[k] + params.b_f[k]);
  } else {
    double hi = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
      t.probs[k] = t.aggregate * params.w_f[k] + params.b_f[k];
      hi = std::max(hi, t.probs[k]);
    }
    double total = 0.0;
    for (auto& p : t.probs) total += (p = std::exp(p - hi));
    for (auto& p : t.probs) p /= total;
  }
  return t;
}

ForwardTrace forward(const ModelParams& params, const FeatureArray& x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(Errc::numeric, "non-finite feature value");
  }
  return forward_standardized(params, params.scaler.transform(x));
}

int decode(std::span<const double> probs) {
  int level = 1;
  for (double p : probs) {
    if (!(p >= 0.5)) break;
    ++level;
  }
  return level;
}

int argmax_level(std::span<const double> probs) {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin()) + 1;
}

int predict_level(const ModelParams& params, const ForwardTrace& trace) {
  return params.head == Head::ordinal ? decode(trace.probs) : argmax_level(trace.probs);
}

double normalize_score(double s) { return (s + 1.0) / 2.0; }

FeatureArray normalize_scores(const FeatureArray& scores) {
  FeatureArray out;
  std::transform(scores.begin(), scores.end(), out.begin(), normalize_score);
  return out;
}

double rescale_aggregate(double aggregate, std::size_t n) {
  const double nn = static_cast<double>(n);
  return (aggregate + nn) / (2.0 * nn) * 12.0;
}

std::vector<std::optional<double>> decision_boundaries(const ModelParams& params) {
  std::vector<std::optional<double>> out;
  if (params.head != Head::ordinal) return out;
  for (std::size_t k = 0; k < params.w_f.size(); ++k) {
    if (params.w_f[k] == 0.0) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(-params.b_f[k] / params.w_f[k]);
    }
  }
  return out;
}

bool boundaries_ordered(const ModelParams& params) {
  if (params.head != Head::ordinal) return false;
  if (std::any_of(params.w_f.begin(), params.w_f.end(), [](double w) { return !(w > 0.0); })) return false;
  const auto bounds = decision_boundaries(params);
  for (std::size_t k = 1; k < bounds.size(); ++k) {
    if (*bounds[k] < *bounds[k - 1]) return false;
  }
  return true;
}

int level_from_boundaries(std::span<const std::optional<double>> boundaries, double aggregate) {
  int level = 1;
  for (const auto& b : boundaries) {
    if (!b || !(aggregate >= *b)) break;
    ++level;
  }
  return level;
}

}  // namespace rubricnet

#include "rubricnet/metrics.hpp"

#include <string>

#include "rubricnet/error.hpp"

namespace rubricnet {
namespace {

void check(std::span<const int> predicted, std::span<const int> truth, int num_levels) {
  if (predicted.size() != truth.size()) {
    throw Error(Errc::invalid_argument, "prediction/truth length mismatch: " + std::to_string(predicted.size()) +
                                            " vs " + std::to_string(truth.size()));
  }
  if (num_levels < 1) throw Error(Errc::invalid_argument, "number of levels must be positive");
  auto in_range = [num_levels](int v) { return v >= 1 && v <= num_levels; };
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!in_range(truth[i]) || !in_range(predicted[i])) {
      throw Error(Errc::invalid_argument, "level outside [1, " + std::to_string(num_levels) + "]");
    }
  }
}

// Per-class mean of `term`, then mean over classes present in truth.
template <class Term>
double macro_mean(std::span<const int> predicted, std::span<const int> truth, int num_levels, Term term) {
  std::vector<double> sum(static_cast<std::size_t>(num_levels), 0.0);
  std::vector<long> count(static_cast<std::size_t>(num_levels), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto c = static_cast<std::size_t>(truth[i] - 1);
    sum[c] += term(predicted[i], truth[i]);
    ++count[c];
  }
  double total = 0.0;
  int classes = 0;
  for (std::size_t c = 0; c < sum.size(); ++c) {
    if (count[c] == 0) continue;
    total += sum[c] / static_cast<double>(count[c]);
    ++classes;
  }
  return classes == 0 ? 0.0 : total / classes;
}

}  // namespace

double macro_accuracy(std::span<const int> predicted, std::span<const int> truth, int num_levels) {
  check(predicted, truth, num_levels);
  return macro_mean(predicted, truth, num_levels, [](int p, int t) { return p == t ? 1.0 : 0.0; });
}

double macro_mse(std::span<const int> predicted, std::span<const int> truth, int num_levels) {
  check(predicted, truth, num_levels);
  return macro_mean(predicted, truth, num_levels, [](int p, int t) {
    const double d = p - t;
    return d * d;
  });
}

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truth, int num_levels) {
  check(predicted, truth, num_levels);
  ConfusionMatrix m(static_cast<std::size_t>(num_levels), std::vector<long>(static_cast<std::size_t>(num_levels), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++m[static_cast<std::size_t>(truth[i] - 1)][static_cast<std::size_t>(predicted[i] - 1)];
  }
  return m;
}

EvalResult evaluate_predictions(std::span<const int> predicted, std::span<const int> truth, int num_levels) {
  return EvalResult{macro_accuracy(predicted, truth, num_levels), macro_mse(predicted, truth, num_levels),
                    confusion_matrix(predicted, truth, num_levels)};
}

}  // namespace rubricnet

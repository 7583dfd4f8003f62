#pragma once

#include <span>
#include <vector>

namespace rubricnet {

// Macro averages run over the classes present in the truth; absent classes
// are left out of the mean.
double macro_accuracy(std::span<const int> predicted, std::span<const int> truth, int num_levels);
double macro_mse(std::span<const int> predicted, std::span<const int> truth, int num_levels);

// counts[i][j]: true level i+1 predicted as level j+1.
using ConfusionMatrix = std::vector<std::vector<long>>;
ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truth, int num_levels);

struct EvalResult {
  double macro_accuracy = 0.0;
  double macro_mse = 0.0;
  ConfusionMatrix confusion;
};

EvalResult evaluate_predictions(std::span<const int> predicted, std::span<const int> truth, int num_levels);

}  // namespace rubricnet

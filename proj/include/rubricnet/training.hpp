#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rubricnet/metrics.hpp"
#include "rubricnet/model.hpp"

namespace rubricnet {

struct Sample {
  std::string id;
  FeatureArray x{};
  int level = 1;
};

using Dataset = std::vector<Sample>;

// Bit-mixing seed derivation for per-trial and per-fold generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);
// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng);

// ---- losses and gradients ----

// First (level - 1) entries are 1, the rest 0; length K - 1.
std::vector<double> encode_ordinal(int level, int num_levels);
double ordinal_mse_loss(std::span<const double> probs, std::span<const double> target);
double cross_entropy_loss(std::span<const double> probs, int level);

// Same layout as the trainable part of ModelParams.
struct Gradients {
  FeatureArray w{};
  FeatureArray b{};
  std::vector<double> w_f;
  std::vector<double> b_f;
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

// Mean loss over the batch of standardized (and already dropout-masked)
// inputs, with its exact gradient.
LossAndGradients gradients(const ModelParams& params, std::span<const FeatureArray> x_hat,
                           std::span<const int> levels);
double batch_loss(const ModelParams& params, std::span<const FeatureArray> x_hat, std::span<const int> levels);

// Trainable parameters flattened as [w, b, w_f, b_f].
std::vector<double> flatten(const ModelParams& params);
std::vector<double> flatten(const Gradients& grads);
void unflatten(std::span<const double> values, ModelParams& params);

// ---- optimizer ----

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

void adam_step(AdamState& state, ModelParams& params, const Gradients& grads, double learning_rate);

// Inverted dropout: each entry is zeroed with probability `rate`, survivors
// are scaled by 1 / (1 - rate).
FeatureArray apply_dropout(const FeatureArray& x_hat, double rate, std::mt19937_64& rng);

// ---- training ----

struct TrainConfig {
  double learning_rate = 1e-2;
  int batch_size = 32;
  double dropout_rate = 0.2;
  double lr_decay = 0.5;
  int max_epochs = 300;
  int patience = 40;
  std::uint64_t seed = 0;
  Head head = Head::ordinal;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_mse = 0.0;
  double learning_rate = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  ModelParams best;
  std::vector<EpochRecord> history;
  int stopping_epoch = 0;
  int best_epoch = 0;  // 0 means the initial parameters were never beaten
  double initial_train_loss = 0.0;
  double best_val_accuracy = 0.0;
  double best_val_mse = 0.0;
  TrainConfig config;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

// Scaler is fitted on `train` only. Best checkpoint: highest validation
// macro-accuracy, ties broken by lower validation macro-MSE.
TrainReport fit(const Dataset& train, const Dataset& validation, const TrainConfig& config, int num_levels);

std::vector<int> predict_levels(const ModelParams& params, const Dataset& data);
EvalResult evaluate_model(const ModelParams& params, const Dataset& data);

// ---- hyperparameter search and cross-validation ----

struct SearchSpace {
  int batch_min = 16;
  int batch_max = 128;
  double dropout_min = 0.1;
  double dropout_max = 0.5;
  double decay_min = 0.1;
  double decay_max = 0.9;
  double lr_min = 1e-5;  // sampled log-uniformly
  double lr_max = 1e-1;
  int budget = 50;
  int max_epochs = 300;
  int patience = 40;
  Head head = Head::ordinal;
};

// Trial i depends only on (space, seed, i), so a larger budget extends the
// same sequence.
std::vector<TrainConfig> sample_configs(const SearchSpace& space, std::uint64_t seed, int count);

struct TrialSummary {
  TrainConfig config;
  double val_accuracy = 0.0;
  double val_mse = 0.0;
};

struct SearchResult {
  std::size_t best_trial = 0;
  std::vector<TrialSummary> trials;
  TrainReport best;
};

SearchResult random_search(const SearchSpace& space, const Dataset& train, const Dataset& validation, int num_levels,
                           std::uint64_t seed, int jobs = 1);

struct FoldResult {
  int fold = 0;
  SearchResult search;
  EvalResult test;
  std::vector<std::string> test_ids;
  std::vector<int> test_truth;
  std::vector<int> test_predicted;
};

struct CvResult {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_mse = 0.0;
  double std_mse = 0.0;
};

struct FoldSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// test = fold f, validation = fold (f + 1) mod 5, train = the rest.
FoldSplit split_for_fold(const Dataset& data, std::span<const int> folds, int fold);

CvResult cross_validate(const Dataset& data, std::span<const int> folds, const SearchSpace& space, int num_levels,
                        std::uint64_t seed, int jobs = 1);

// `fold,acc,mse` rows plus a `mean(std)` summary row (accuracy in percent).
std::string metrics_csv(const CvResult& cv);
std::string train_report_json(const TrainReport& report);
std::string format_mean_std(double mean, double std, double scale = 1.0);

}  // namespace rubricnet

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "rubricnet/ingest.hpp"
#include "rubricnet/numfmt.hpp"
#include "rubricnet/parallel.hpp"
#include "rubricnet/training.hpp"

namespace rubricnet {

std::vector<TrainConfig> sample_configs(const SearchSpace& space, std::uint64_t seed, int count) {
  if (space.batch_min < 1 || space.batch_max < space.batch_min || !(space.lr_min > 0.0) ||
      space.lr_max < space.lr_min || space.dropout_max < space.dropout_min || space.decay_max < space.decay_min) {
    throw Error(Errc::invalid_argument, "malformed search space");
  }
  std::mt19937_64 rng(derive_seed(seed, 0x5eedu));
  const auto batch_span = static_cast<std::uint64_t>(space.batch_max - space.batch_min + 1);
  const double log_lo = std::log(space.lr_min);
  const double log_hi = std::log(space.lr_max);

  std::vector<TrainConfig> configs;
  configs.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    TrainConfig c;
    c.batch_size = space.batch_min + static_cast<int>(rng() % batch_span);
    c.dropout_rate = space.dropout_min + (space.dropout_max - space.dropout_min) * unit_uniform(rng);
    c.lr_decay = space.decay_min + (space.decay_max - space.decay_min) * unit_uniform(rng);
    c.learning_rate = std::exp(log_lo + (log_hi - log_lo) * unit_uniform(rng));
    c.max_epochs = space.max_epochs;
    c.patience = space.patience;
    c.head = space.head;
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(i), 1);
    configs.push_back(c);
  }
  return configs;
}

SearchResult random_search(const SearchSpace& space, const Dataset& train, const Dataset& validation, int num_levels,
                           std::uint64_t seed, int jobs) {
  if (space.budget < 1) throw Error(Errc::invalid_argument, "search budget must be >= 1");
  const auto configs = sample_configs(space, seed, space.budget);
  std::vector<TrainReport> reports(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) { reports[i] = fit(train, validation, configs[i], num_levels); });

  SearchResult result;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    result.trials.push_back({configs[i], reports[i].best_val_accuracy, reports[i].best_val_mse});
    const auto& best = reports[result.best_trial];
    if (reports[i].best_val_accuracy > best.best_val_accuracy ||
        (reports[i].best_val_accuracy == best.best_val_accuracy && reports[i].best_val_mse < best.best_val_mse)) {
      result.best_trial = i;
    }
  }
  result.best = std::move(reports[result.best_trial]);
  return result;
}

FoldSplit split_for_fold(const Dataset& data, std::span<const int> folds, int fold) {
  if (folds.size() != data.size()) throw Error(Errc::fit, "fold assignment missing for some samples");
  FoldSplit split;
  const int val_fold = (fold + 1) % kNumFolds;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (folds[i] < 0 || folds[i] >= kNumFolds) throw Error(Errc::fit, "fold index outside [0, 4]");
    if (folds[i] == fold) {
      split.test.push_back(data[i]);
    } else if (folds[i] == val_fold) {
      split.validation.push_back(data[i]);
    } else {
      split.train.push_back(data[i]);
    }
  }
  return split;
}

CvResult cross_validate(const Dataset& data, std::span<const int> folds, const SearchSpace& space, int num_levels,
                        std::uint64_t seed, int jobs) {
  if (folds.size() != data.size()) throw Error(Errc::fit, "corpus has no fold assignment");
  CvResult cv;
  for (int f = 0; f < kNumFolds; ++f) {
    FoldSplit split = split_for_fold(data, folds, f);
    if (split.test.empty() || split.validation.empty() || split.train.empty()) {
      throw Error(Errc::fit, "fold " + std::to_string(f) + " leaves an empty train, validation or test split");
    }
    FoldResult r;
    r.fold = f;
    r.search = random_search(space, split.train, split.validation, num_levels,
                             derive_seed(seed, static_cast<std::uint64_t>(f), 2), jobs);
    for (const auto& s : split.test) {
      r.test_ids.push_back(s.id);
      r.test_truth.push_back(s.level);
    }
    r.test_predicted = predict_levels(r.search.best.best, split.test);
    r.test = evaluate_predictions(r.test_predicted, r.test_truth, num_levels);
    cv.folds.push_back(std::move(r));
  }

  auto mean_std = [&](auto metric, double& mean, double& sd) {
    mean = 0.0;
    for (const auto& f : cv.folds) mean += metric(f);
    mean /= static_cast<double>(cv.folds.size());
    double var = 0.0;
    for (const auto& f : cv.folds) var += (metric(f) - mean) * (metric(f) - mean);
    sd = std::sqrt(var / static_cast<double>(cv.folds.size()));
  };
  mean_std([](const FoldResult& f) { return f.test.macro_accuracy; }, cv.mean_accuracy, cv.std_accuracy);
  mean_std([](const FoldResult& f) { return f.test.macro_mse; }, cv.mean_mse, cv.std_mse);
  return cv;
}

std::string format_mean_std(double mean, double std, double scale) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f(%.1f)", mean * scale, std * scale);
  return buf;
}

std::string metrics_csv(const CvResult& cv) {
  std::string out = "fold,acc,mse\n";
  for (const auto& f : cv.folds) {
    out += std::to_string(f.fold) + "," + format_double(f.test.macro_accuracy) + "," +
           format_double(f.test.macro_mse) + "\n";
  }
  out += "mean(std)," + format_mean_std(cv.mean_accuracy, cv.std_accuracy, 100.0) + "," +
         format_mean_std(cv.mean_mse, cv.std_mse) + "\n";
  return out;
}

std::string train_report_json(const TrainReport& report) {
  using nlohmann::json;
  json doc;
  doc["config"] = {{"learning_rate", report.config.learning_rate},
                   {"batch_size", report.config.batch_size},
                   {"dropout_rate", report.config.dropout_rate},
                   {"lr_decay", report.config.lr_decay},
                   {"max_epochs", report.config.max_epochs},
                   {"patience", report.config.patience},
                   {"seed", report.config.seed},
                   {"head", std::string(to_string(report.config.head))}};
  doc["initial_train_loss"] = report.initial_train_loss;
  doc["stopping_epoch"] = report.stopping_epoch;
  doc["best_epoch"] = report.best_epoch;
  doc["best_val_accuracy"] = report.best_val_accuracy;
  doc["best_val_mse"] = report.best_val_mse;
  json history = json::array();
  for (const auto& e : report.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_loss", e.val_loss},
                       {"val_accuracy", e.val_accuracy},
                       {"val_mse", e.val_mse},
                       {"learning_rate", e.learning_rate}});
  }
  doc["history"] = std::move(history);
  doc["best_params"] = json::parse(save_checkpoint(report.best));
  return doc.dump(1) + "\n";
}

}  // namespace rubricnet

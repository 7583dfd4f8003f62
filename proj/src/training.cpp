#include "rubricnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rubricnet {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> encode_ordinal(int level, int num_levels) {
  if (num_levels < 2 || level < 1 || level > num_levels) {
    throw Error(Errc::encode, "level " + std::to_string(level) + " outside [1, " + std::to_string(num_levels) + "]");
  }
  std::vector<double> t(static_cast<std::size_t>(num_levels - 1), 0.0);
  std::fill_n(t.begin(), level - 1, 1.0);
  return t;
}

double ordinal_mse_loss(std::span<const double> probs, std::span<const double> target) {
  if (probs.size() != target.size() || probs.empty()) {
    throw Error(Errc::invalid_argument, "loss operands differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) sum += (probs[i] - target[i]) * (probs[i] - target[i]);
  return sum / static_cast<double>(probs.size());
}

double cross_entropy_loss(std::span<const double> probs, int level) {
  if (level < 1 || static_cast<std::size_t>(level) > probs.size()) {
    throw Error(Errc::invalid_argument, "level outside the softmax outputs");
  }
  return -std::log(std::max(probs[static_cast<std::size_t>(level - 1)], 1e-300));
}

namespace {

double sample_loss(const ModelParams& params, const ForwardTrace& t, int level) {
  if (params.head == Head::ordinal) return ordinal_mse_loss(t.probs, encode_ordinal(level, params.num_levels));
  return cross_entropy_loss(t.probs, level);
}

void check_batch(std::span<const FeatureArray> x_hat, std::span<const int> levels) {
  if (x_hat.empty()) throw Error(Errc::invalid_argument, "empty batch");
  if (x_hat.size() != levels.size()) throw Error(Errc::invalid_argument, "batch inputs/levels length mismatch");
}

}  // namespace

double batch_loss(const ModelParams& params, std::span<const FeatureArray> x_hat, std::span<const int> levels) {
  check_batch(x_hat, levels);
  double total = 0.0;
  for (std::size_t n = 0; n < x_hat.size(); ++n) {
    total += sample_loss(params, forward_standardized(params, x_hat[n]), levels[n]);
  }
  return total / static_cast<double>(x_hat.size());
}

LossAndGradients gradients(const ModelParams& params, std::span<const FeatureArray> x_hat,
                           std::span<const int> levels) {
  check_batch(x_hat, levels);
  const std::size_t outputs = params.w_f.size();
  const double inv_batch = 1.0 / static_cast<double>(x_hat.size());

  LossAndGradients out;
  out.grads.w_f.assign(outputs, 0.0);
  out.grads.b_f.assign(outputs, 0.0);
  std::vector<double> d_logit(outputs);

  for (std::size_t n = 0; n < x_hat.size(); ++n) {
    const ForwardTrace t = forward_standardized(params, x_hat[n]);
    out.loss += sample_loss(params, t, levels[n]);

    if (params.head == Head::ordinal) {
      const auto target = encode_ordinal(levels[n], params.num_levels);
      const double scale = 2.0 * inv_batch / static_cast<double>(outputs);
      for (std::size_t k = 0; k < outputs; ++k) {
        const double p = t.probs[k];
        d_logit[k] = scale * (p - target[k]) * p * (1.0 - p);
      }
    } else {
      for (std::size_t k = 0; k < outputs; ++k) {
        const double onehot = static_cast<int>(k) + 1 == levels[n] ? 1.0 : 0.0;
        d_logit[k] = inv_batch * (t.probs[k] - onehot);
      }
    }

    double d_aggregate = 0.0;
    for (std::size_t k = 0; k < outputs; ++k) {
      out.grads.w_f[k] += d_logit[k] * t.aggregate;
      out.grads.b_f[k] += d_logit[k];
      d_aggregate += d_logit[k] * params.w_f[k];
    }
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      const double d_pre = d_aggregate * (1.0 - t.scores[i] * t.scores[i]);
      out.grads.w[i] += d_pre * x_hat[n][i];
      out.grads.b[i] += d_pre;
    }
  }
  out.loss *= inv_batch;
  return out;
}

std::vector<double> flatten(const ModelParams& params) {
  std::vector<double> v(params.w.begin(), params.w.end());
  v.insert(v.end(), params.b.begin(), params.b.end());
  v.insert(v.end(), params.w_f.begin(), params.w_f.end());
  v.insert(v.end(), params.b_f.begin(), params.b_f.end());
  return v;
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> v(grads.w.begin(), grads.w.end());
  v.insert(v.end(), grads.b.begin(), grads.b.end());
  v.insert(v.end(), grads.w_f.begin(), grads.w_f.end());
  v.insert(v.end(), grads.b_f.begin(), grads.b_f.end());
  return v;
}

void unflatten(std::span<const double> values, ModelParams& params) {
  const std::size_t outputs = params.w_f.size();
  if (values.size() != 2 * kNumFeatures + 2 * outputs) {
    throw Error(Errc::invalid_argument, "flattened parameter length mismatch");
  }
  auto it = values.begin();
  std::copy_n(it, kNumFeatures, params.w.begin());
  it += kNumFeatures;
  std::copy_n(it, kNumFeatures, params.b.begin());
  it += kNumFeatures;
  std::copy_n(it, outputs, params.w_f.begin());
  it += static_cast<std::ptrdiff_t>(outputs);
  std::copy_n(it, outputs, params.b_f.begin());
}

void adam_step(AdamState& state, ModelParams& params, const Gradients& grads, double learning_rate) {
  auto theta = flatten(params);
  const auto g = flatten(grads);
  if (g.size() != theta.size()) throw Error(Errc::invalid_argument, "gradient shape mismatch");
  if (state.m.empty()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
  }
  if (state.m.size() != theta.size()) throw Error(Errc::invalid_argument, "optimizer state shape mismatch");

  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    theta[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
  unflatten(theta, params);
}

FeatureArray apply_dropout(const FeatureArray& x_hat, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return x_hat;
  const double keep_scale = 1.0 / (1.0 - rate);
  FeatureArray out;
  for (std::size_t i = 0; i < kNumFeatures; ++i) out[i] = unit_uniform(rng) < rate ? 0.0 : x_hat[i] * keep_scale;
  return out;
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(Errc::invalid_argument, "train config: " + what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be positive");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) bad("dropout_rate must be in [0, 1)");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) bad("lr_decay must be in (0, 1]");
  if (max_epochs < 0) bad("max_epochs must be >= 0");
  if (patience < 1) bad("patience must be >= 1");
}

std::vector<int> predict_levels(const ModelParams& params, const Dataset& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(predict_level(params, forward(params, s.x)));
  return out;
}

EvalResult evaluate_model(const ModelParams& params, const Dataset& data) {
  std::vector<int> truth;
  truth.reserve(data.size());
  for (const auto& s : data) truth.push_back(s.level);
  return evaluate_predictions(predict_levels(params, data), truth, params.num_levels);
}

namespace {

void check_dataset(const Dataset& data, int num_levels, const char* name) {
  if (data.empty()) throw Error(Errc::fit, std::string(name) + " set is empty");
  for (const auto& s : data) {
    if (s.level < 1 || s.level > num_levels) {
      throw Error(Errc::fit, std::string(name) + " sample '" + s.id + "' has level outside [1, K]");
    }
    for (double v : s.x) {
      if (!std::isfinite(v)) throw Error(Errc::numeric, std::string(name) + " sample '" + s.id + "' is not finite");
    }
  }
}

}  // namespace

TrainReport fit(const Dataset& train, const Dataset& validation, const TrainConfig& config, int num_levels) {
  config.validate();
  if (num_levels < 2) throw Error(Errc::fit, "number of levels must be >= 2");
  check_dataset(train, num_levels, "train");
  check_dataset(validation, num_levels, "validation");

  std::vector<FeatureArray> raw_train;
  raw_train.reserve(train.size());
  for (const auto& s : train) raw_train.push_back(s.x);

  ModelParams params = ModelParams::zeros(num_levels, config.head);
  params.scaler = Scaler::fit(raw_train);

  std::vector<FeatureArray> x_train, x_val;
  std::vector<int> y_train, y_val;
  for (const auto& s : train) {
    x_train.push_back(params.scaler.transform(s.x));
    y_train.push_back(s.level);
  }
  for (const auto& s : validation) {
    x_val.push_back(params.scaler.transform(s.x));
    y_val.push_back(s.level);
  }

  std::mt19937_64 rng(config.seed);
  auto init = [&rng] { return -0.1 + 0.2 * unit_uniform(rng); };
  for (auto& v : params.w) v = init();
  for (auto& v : params.b) v = init();
  for (auto& v : params.w_f) v = init();
  for (auto& v : params.b_f) v = init();

  auto validate_now = [&](const ModelParams& p) {
    std::vector<int> pred;
    pred.reserve(x_val.size());
    for (const auto& x : x_val) pred.push_back(predict_level(p, forward_standardized(p, x)));
    return evaluate_predictions(pred, y_val, num_levels);
  };

  TrainReport report;
  report.config = config;
  report.best = params;
  report.initial_train_loss = batch_loss(params, x_train, y_train);
  const EvalResult initial = validate_now(params);
  report.best_val_accuracy = initial.macro_accuracy;
  report.best_val_mse = initial.macro_mse;

  double best_val_loss = batch_loss(params, x_val, y_val);
  double lr = config.learning_rate;
  const int decay_after = std::max(1, (config.patience + 1) / 2);
  int stale = 0;
  int plateau = 0;

  AdamState adam;
  std::vector<std::size_t> order(x_train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<FeatureArray> bx;
  std::vector<int> by;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      bx.clear();
      by.clear();
      for (std::size_t k = start; k < end; ++k) {
        bx.push_back(apply_dropout(x_train[order[k]], config.dropout_rate, rng));
        by.push_back(y_train[order[k]]);
      }
      const auto lg = gradients(params, bx, by);
      adam_step(adam, params, lg.grads, lr);
    }
    for (double v : flatten(params)) {
      if (!std::isfinite(v)) throw Error(Errc::numeric, "training diverged at epoch " + std::to_string(epoch));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    rec.train_loss = batch_loss(params, x_train, y_train);
    rec.val_loss = batch_loss(params, x_val, y_val);
    const EvalResult val = validate_now(params);
    rec.val_accuracy = val.macro_accuracy;
    rec.val_mse = val.macro_mse;
    report.history.push_back(rec);
    report.stopping_epoch = epoch;

    const bool improved = val.macro_accuracy > report.best_val_accuracy ||
                          (val.macro_accuracy == report.best_val_accuracy && val.macro_mse < report.best_val_mse);
    if (improved) {
      report.best = params;
      report.best_epoch = epoch;
      report.best_val_accuracy = val.macro_accuracy;
      report.best_val_mse = val.macro_mse;
      stale = 0;
    } else {
      ++stale;
    }

    if (rec.val_loss < best_val_loss) {
      best_val_loss = rec.val_loss;
      plateau = 0;
    } else if (++plateau >= decay_after) {
      lr *= config.lr_decay;
      plateau = 0;
    }
    if (stale >= config.patience) break;
  }
  return report;
}

}  // namespace rubricnet

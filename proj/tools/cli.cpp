#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "rubricnet/analysis.hpp"
#include "rubricnet/descriptors.hpp"
#include "rubricnet/ingest.hpp"
#include "rubricnet/numfmt.hpp"
#include "rubricnet/parallel.hpp"
#include "rubricnet/plots.hpp"
#include "rubricnet/report.hpp"
#include "rubricnet/synth.hpp"
#include "rubricnet/training.hpp"

namespace rubricnet::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string format;
};

struct SearchFlags {
  int budget = 50;
  int max_epochs = 300;
  int patience = 40;
  std::string head = "ordinal";

  SearchSpace space() const {
    SearchSpace s;
    s.budget = budget;
    s.max_epochs = max_epochs;
    s.patience = patience;
    s.head = parse_head(head);
    return s;
  }
};

std::optional<fs::path> cache_dir() {
  if (const char* dir = std::getenv("RUBRICNET_CACHE"); dir && *dir) return fs::path(dir);
  return std::nullopt;
}

bool is_score_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return fs::is_regular_file(p) && (ext == ".json" || ext == ".musicxml" || ext == ".xml");
}

std::vector<fs::path> list_scores(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (is_score_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Labeled features plus fold indices, from a score directory or a feature CSV.
struct LabeledData {
  Dataset data;
  std::vector<int> folds;
  std::vector<bool> tempo_assumed;
};

LabeledData features_from_corpus(const Corpus& corpus, int jobs) {
  LabeledData out;
  out.data.resize(corpus.pieces.size());
  out.tempo_assumed.resize(corpus.pieces.size());
  std::vector<FeatureVector> fvs(corpus.pieces.size());
  parallel_for(corpus.pieces.size(), jobs, [&](std::size_t i) { fvs[i] = extract_features(corpus.pieces[i]); });
  for (std::size_t i = 0; i < corpus.pieces.size(); ++i) {
    const auto& piece = corpus.pieces[i];
    out.data[i] = Sample{piece.id, fvs[i].values, piece.label->level};
    out.tempo_assumed[i] = fvs[i].tempo_assumed;
    out.folds.push_back(corpus.fold_of(piece.id));
  }
  return out;
}

LabeledData load_labeled(const fs::path& input, const std::string& labels, int levels, const Globals& g) {
  if (fs::is_directory(input)) {
    if (labels.empty()) throw UsageError("a labels file (--labels) is required for a score directory");
    LoadOptions opts;
    opts.num_levels = levels;
    opts.seed = g.seed;
    opts.jobs = g.jobs;
    opts.cache_dir = cache_dir();
    return features_from_corpus(load_corpus(input, labels, opts), g.jobs);
  }
  if (!fs::is_regular_file(input)) throw Error(Errc::load, "input not found: " + input.string());
  const auto rows = parse_feature_table(read_file(input));
  if (rows.empty()) throw Error(Errc::load, "feature table has no rows");

  std::map<std::string, LabelRow> label_rows;
  if (!labels.empty()) {
    for (auto& r : parse_labels_csv(read_file(labels), levels)) label_rows[r.id] = r;
  }
  LabeledData out;
  std::vector<std::pair<std::string, int>> id_levels;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    if (!seen.insert(r.id).second) throw Error(Errc::load, "duplicate id '" + r.id + "'");
    std::optional<int> level = r.label;
    if (auto it = label_rows.find(r.id); it != label_rows.end()) level = it->second.level;
    if (!level || *level < 1 || *level > levels) throw Error(Errc::load, "piece '" + r.id + "' lacks a valid label");
    out.data.push_back(Sample{r.id, r.features.values, *level});
    out.tempo_assumed.push_back(r.features.tempo_assumed);
    id_levels.emplace_back(r.id, *level);
  }
  const bool explicit_folds =
      !label_rows.empty() && std::all_of(out.data.begin(), out.data.end(), [&](const Sample& s) {
        auto it = label_rows.find(s.id);
        return it != label_rows.end() && it->second.fold;
      });
  const auto assigned = assign_stratified_folds(id_levels, g.seed);
  for (const auto& s : out.data) {
    out.folds.push_back(explicit_folds ? *label_rows.at(s.id).fold : assigned.at(s.id));
  }
  return out;
}

void write_folds_csv(const fs::path& file, const LabeledData& d) {
  std::string csv = "id,level,fold\n";
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    csv += d.data[i].id + "," + std::to_string(d.data[i].level) + "," + std::to_string(d.folds[i]) + "\n";
  }
  write_file(file, csv);
}

std::string trials_csv(const SearchResult& search) {
  std::string csv = "trial,learning_rate,batch_size,dropout_rate,lr_decay,val_acc,val_mse\n";
  for (std::size_t i = 0; i < search.trials.size(); ++i) {
    const auto& t = search.trials[i];
    csv += std::to_string(i) + "," + format_double(t.config.learning_rate) + "," + std::to_string(t.config.batch_size) +
           "," + format_double(t.config.dropout_rate) + "," + format_double(t.config.lr_decay) + "," +
           format_double(t.val_accuracy) + "," + format_double(t.val_mse) + "\n";
  }
  return csv;
}

// ---- subcommands ----

int cmd_extract(const fs::path& dir, const std::string& labels, int levels, const fs::path& out_file,
                const Globals& g, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) throw Error(Errc::load, "score directory missing: " + dir.string());

  std::vector<fs::path> files;
  std::vector<std::optional<int>> file_labels;
  std::vector<std::string> errors;
  if (!labels.empty()) {
    for (const auto& row : parse_labels_csv(read_file(labels), levels)) {
      if (auto f = find_score_file(dir, row.id)) {
        files.push_back(*f);
        file_labels.push_back(row.level);
      } else {
        errors.push_back(row.id + ": no score file found");
      }
    }
  } else {
    files = list_scores(dir);
    file_labels.assign(files.size(), std::nullopt);
  }
  if (files.empty() && errors.empty()) throw Error(Errc::load, "no score files in " + dir.string());

  std::vector<FeatureRow> rows(files.size());
  std::vector<std::string> file_errors(files.size());
  const auto cache = cache_dir();
  parallel_for(files.size(), g.jobs, [&](std::size_t i) {
    try {
      Piece piece = load_piece(files[i], levels, cache);
      rows[i].id = files[i].stem().string();
      rows[i].label = file_labels[i] ? file_labels[i] : (piece.label ? std::optional<int>(piece.label->level) : std::nullopt);
      rows[i].features = extract_features(piece);
    } catch (const std::exception& e) {
      file_errors[i] = files[i].string() + ": " + e.what();
    }
  });
  for (const auto& e : file_errors) {
    if (!e.empty()) errors.push_back(e);
  }
  if (!errors.empty()) {
    err << "extract failed for " << errors.size() << " file(s):\n";
    for (const auto& e : errors) err << "  " << e << "\n";
    return kDataError;
  }
  std::sort(rows.begin(), rows.end(), [](const FeatureRow& a, const FeatureRow& b) { return a.id < b.id; });
  write_file(out_file, write_feature_table(rows));
  out << "wrote " << rows.size() << " feature rows to " << out_file.string() << "\n";
  return kOk;
}

int cmd_train(const fs::path& input, const std::string& labels, int levels, const SearchFlags& flags, int val_fold,
              const fs::path& out_dir, const Globals& g, std::ostream& out) {
  const auto d = load_labeled(input, labels, levels, g);
  Dataset train, validation;
  for (std::size_t i = 0; i < d.data.size(); ++i) (d.folds[i] == val_fold ? validation : train).push_back(d.data[i]);
  if (train.empty() || validation.empty()) throw Error(Errc::fit, "validation fold leaves an empty split");

  const auto search = random_search(flags.space(), train, validation, levels, g.seed, g.jobs);
  const ModelParams& best = search.best.best;
  write_file(out_dir / "checkpoint.json", save_checkpoint(best));
  write_file(out_dir / "grade_stats.json", grade_statistics_json(compute_grade_statistics(best, train)));
  write_file(out_dir / "train_report.json", train_report_json(search.best));
  write_file(out_dir / "trials.csv", trials_csv(search));
  out << "best trial " << search.best_trial << ": validation acc " << format_double(search.best.best_val_accuracy)
      << ", mse " << format_double(search.best.best_val_mse) << "\n";
  return kOk;
}

int cmd_evaluate(const fs::path& input, const std::string& labels, int levels, const SearchFlags& flags,
                 const fs::path& out_dir, const Globals& g, std::ostream& out) {
  const auto d = load_labeled(input, labels, levels, g);
  const CvResult cv = cross_validate(d.data, d.folds, flags.space(), levels, g.seed, g.jobs);

  std::string predictions = "id,fold,level,predicted\n";
  for (const auto& f : cv.folds) {
    const fs::path fold_dir = out_dir / ("fold" + std::to_string(f.fold));
    const ModelParams& best = f.search.best.best;
    const FoldSplit split = split_for_fold(d.data, d.folds, f.fold);
    write_file(fold_dir / "checkpoint.json", save_checkpoint(best));
    write_file(fold_dir / "grade_stats.json", grade_statistics_json(compute_grade_statistics(best, split.train)));
    write_file(fold_dir / "train_report.json", train_report_json(f.search.best));
    write_file(fold_dir / "trials.csv", trials_csv(f.search));
    for (std::size_t i = 0; i < f.test_ids.size(); ++i) {
      predictions += f.test_ids[i] + "," + std::to_string(f.fold) + "," + std::to_string(f.test_truth[i]) + "," +
                     std::to_string(f.test_predicted[i]) + "\n";
    }
  }
  write_file(out_dir / "metrics.csv", metrics_csv(cv));
  write_file(out_dir / "predictions.csv", predictions);
  write_folds_csv(out_dir / "folds.csv", d);
  out << "Acc-" << levels << " " << format_mean_std(cv.mean_accuracy, cv.std_accuracy, 100.0) << "  MSE "
      << format_mean_std(cv.mean_mse, cv.std_mse) << "\n";
  return kOk;
}

int cmd_predict(const fs::path& checkpoint, const fs::path& piece_file, std::ostream& out) {
  const ModelParams params = load_checkpoint(read_file(checkpoint));
  const Piece piece = load_piece(piece_file, params.num_levels, cache_dir());
  const FeatureVector fv = extract_features(piece);
  out << predict_level(params, forward(params, fv)) << "\n";
  return kOk;
}

int cmd_explain(const fs::path& checkpoint, const fs::path& stats_file, const fs::path& piece_file,
                const std::string& out_file, const Globals& g, std::ostream& out) {
  const Format format = g.format.empty() ? Format::markdown : parse_format(g.format);
  const ModelParams params = load_checkpoint(read_file(checkpoint));
  const GradeStatistics stats = parse_grade_statistics(read_file(stats_file));
  if (stats.num_levels != params.num_levels) throw Error(Errc::checkpoint, "statistics and checkpoint disagree on K");
  const Piece piece = load_piece(piece_file, params.num_levels, cache_dir());
  const std::string rendered = render(build_report(params, piece, stats), format);
  if (out_file.empty()) {
    out << rendered;
  } else {
    write_file(out_file, rendered);
  }
  return kOk;
}

int cmd_analyze(const fs::path& features_csv, const std::string& labels, int levels, const std::string& cv_dir,
                const fs::path& out_dir, const Globals& g, std::ostream& out) {
  const auto d = load_labeled(features_csv, labels, levels, g);
  std::vector<FeatureArray> x;
  std::vector<int> y;
  for (const auto& s : d.data) {
    x.push_back(s.x);
    y.push_back(s.level);
  }
  const std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());

  const CorrelationTable table = feature_difficulty_table(x, y);
  const Matrix conditional = conditional_tau_matrix(x, y);
  const Dendrogram dendrogram = agglomerative_cluster(correlation_to_distance(conditional));
  write_file(out_dir / "tau_c.csv", correlation_table_csv(table));
  write_file(out_dir / "conditional_tau_c.csv", matrix_csv(conditional, names));
  write_file(out_dir / "dendrogram.json", dendrogram_json(dendrogram, names));
  write_file(out_dir / "tau_c.svg", correlation_bar_svg(table));
  write_file(out_dir / "dendrogram.svg", dendrogram_svg(dendrogram, names));

  if (!cv_dir.empty()) {
    // test folds as recorded by `evaluate`
    std::map<std::string, int> fold_of;
    for (const auto& r : parse_labels_csv(read_file(fs::path(cv_dir) / "folds.csv"), levels)) {
      if (!r.fold) throw Error(Errc::load, "folds.csv lacks a fold column");
      fold_of[r.id] = *r.fold;
    }
    std::vector<ModelParams> params;
    std::vector<Dataset> tests;
    for (int f = 0; f < kNumFolds; ++f) {
      params.push_back(load_checkpoint(read_file(fs::path(cv_dir) / ("fold" + std::to_string(f)) / "checkpoint.json"),
                                       levels));
      Dataset test;
      for (const auto& s : d.data) {
        auto it = fold_of.find(s.id);
        if (it != fold_of.end() && it->second == f) test.push_back(s);
      }
      tests.push_back(std::move(test));
    }
    std::vector<SplitData> splits;
    for (int f = 0; f < kNumFolds; ++f) {
      if (!tests[static_cast<std::size_t>(f)].empty()) {
        splits.push_back({&params[static_cast<std::size_t>(f)], &tests[static_cast<std::size_t>(f)]});
      }
    }
    const ContributionProfile profile = grade_contributions(splits);
    write_file(out_dir / "contributions.csv", contribution_csv(profile));
    write_file(out_dir / "contributions.svg", contribution_svg(profile));
  }
  out << "top feature: " << table.entries.front().name << " tau_c=" << format_double(table.entries.front().tau) << "\n";
  return kOk;
}

int cmd_synth(int levels, int per_class, double noise, const std::string& mode, const fs::path& out_dir,
              const Globals& g, std::ostream& out) {
  SynthSpec spec;
  spec.num_levels = levels;
  spec.n_per_class = per_class;
  spec.noise = noise;
  spec.seed = g.seed;
  spec.mode = mode == "feature" ? SynthMode::feature_level : SynthMode::score_level;
  spec.validate();
  if (spec.mode == SynthMode::score_level) {
    const Corpus corpus = gen_score_corpus(spec);
    write_corpus(corpus, out_dir);
    out << "wrote " << corpus.pieces.size() << " scores to " << out_dir.string() << "\n";
  } else {
    std::vector<FeatureRow> rows;
    for (const auto& s : gen_feature_dataset(spec)) rows.push_back(FeatureRow{s.id, s.level, FeatureVector{s.x}});
    write_file(out_dir / "features.csv", write_feature_table(rows));
    out << "wrote " << rows.size() << " feature rows to " << (out_dir / "features.csv").string() << "\n";
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interpretable piano-score difficulty estimation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "markdown", "html", "csv"}));

  int levels = kDefaultNumLevels;
  std::string labels;
  std::string out_path;
  std::string input;
  SearchFlags search;

  auto add_search_flags = [&](CLI::App* sub) {
    sub->add_option("--budget", search.budget, "Random-search trials")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--max-epochs", search.max_epochs, "Epoch limit per trial")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--patience", search.patience, "Early-stopping patience")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--head", search.head, "Output head")->check(CLI::IsMember({"ordinal", "one-hot"}))->capture_default_str();
  };
  auto add_levels = [&](CLI::App* sub) {
    sub->add_option("--levels", levels, "Number of difficulty levels K")->check(CLI::Range(2, 1000))->capture_default_str();
  };

  auto* extract = app.add_subcommand("extract", "Compute the 12 descriptors for every score");
  extract->add_option("scores", input, "Directory of scores")->required();
  extract->add_option("--labels", labels, "Labels CSV (id,level[,fold])");
  extract->add_option("--out", out_path, "Feature table CSV")->required();
  add_levels(extract);

  int val_fold = 0;
  auto* train = app.add_subcommand("train", "Fit one model: search on train folds, validate on one fold");
  train->add_option("input", input, "Score directory or feature CSV")->required();
  train->add_option("--labels", labels, "Labels CSV");
  train->add_option("--out", out_path, "Output directory")->required();
  train->add_option("--validation-fold", val_fold, "Fold used for validation")->check(CLI::Range(0, kNumFolds - 1));
  add_levels(train);
  add_search_flags(train);

  auto* evaluate = app.add_subcommand("evaluate", "5-fold cross-validation");
  evaluate->add_option("input", input, "Score directory or feature CSV")->required();
  evaluate->add_option("--labels", labels, "Labels CSV");
  evaluate->add_option("--out", out_path, "Output directory")->required();
  add_levels(evaluate);
  add_search_flags(evaluate);

  std::string checkpoint, stats;
  auto* predict = app.add_subcommand("predict", "Print the predicted level of a score");
  predict->add_option("piece", input, "Score file")->required();
  predict->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();

  auto* explain = app.add_subcommand("explain", "Render the rubric of a score");
  explain->add_option("piece", input, "Score file")->required();
  explain->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  explain->add_option("--stats", stats, "Grade statistics JSON written by train/evaluate")->required();
  explain->add_option("--out", out_path, "Output file (default stdout)");

  std::string cv_dir;
  auto* analyze = app.add_subcommand("analyze", "Correlation, clustering and contribution analysis");
  analyze->add_option("features", input, "Feature table CSV")->required();
  analyze->add_option("--labels", labels, "Labels CSV overriding the table labels");
  analyze->add_option("--cv-dir", cv_dir, "Output directory of `evaluate` for contribution profiles");
  analyze->add_option("--out", out_path, "Output directory")->required();
  add_levels(analyze);

  int per_class = 60;
  double noise = kDefaultSynthNoise;
  std::string mode = "score";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth->add_option("--per-class", per_class, "Pieces per level")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--noise", noise, "Latent difficulty noise")->check(CLI::NonNegativeNumber)->capture_default_str();
  synth->add_option("--mode", mode, "score or feature")->check(CLI::IsMember({"score", "feature"}))->capture_default_str();
  synth->add_option("--out", out_path, "Output directory")->required();
  add_levels(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (explain->parsed() && g.format == "csv") throw UsageError("explain supports json, markdown or html");
    if (extract->parsed()) return cmd_extract(input, labels, levels, out_path, g, out, err);
    if (train->parsed()) return cmd_train(input, labels, levels, search, val_fold, out_path, g, out);
    if (evaluate->parsed()) return cmd_evaluate(input, labels, levels, search, out_path, g, out);
    if (predict->parsed()) return cmd_predict(checkpoint, input, out);
    if (explain->parsed()) return cmd_explain(checkpoint, stats, input, out_path, g, out);
    if (analyze->parsed()) return cmd_analyze(input, labels, levels, cv_dir, out_path, g, out);
    if (synth->parsed()) return cmd_synth(levels, per_class, noise, mode, out_path, g, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == Errc::numeric ? kNumericFailure : kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace rubricnet::cli

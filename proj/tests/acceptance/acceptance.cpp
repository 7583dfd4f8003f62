// One line per acceptance criterion: "criterion N: PASS|FAIL|SKIP  title  (details)".
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "descriptor_oracle_check.hpp"
#include "golden_events.hpp"
#include "gradient_check.hpp"
#include "oracles.hpp"
#include "random_pieces.hpp"
#include "rubricnet/analysis.hpp"
#include "rubricnet/ingest.hpp"
#include "rubricnet/report.hpp"
#include "tau_check.hpp"

namespace fs = std::filesystem;
using namespace rubricnet;

namespace {

const fs::path kData = RUBRICNET_TEST_DATA;

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string details;
};

Outcome verdict(bool ok, std::string details) { return {ok ? Status::pass : Status::fail, std::move(details)}; }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "rubricnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(int(argv.size()), argv.data(), o, e);
  if (out) *out = o.str() + e.str();
  return code;
}

// Mean of the per-fold rows of metrics.csv.
std::pair<double, double> fold_means(const fs::path& metrics) {
  std::istringstream in(read_file(metrics));
  std::string line;
  std::getline(in, line);
  double acc = 0, mse = 0;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.rfind("mean", 0) == 0) continue;
    std::istringstream row(line);
    std::string fold, a, m;
    std::getline(row, fold, ',');
    std::getline(row, a, ',');
    std::getline(row, m, ',');
    acc += std::stod(a);
    mse += std::stod(m);
    ++n;
  }
  if (n == 0) throw std::runtime_error("metrics.csv has no fold rows");
  return {acc / n, mse / n};
}

struct Workspace {
  fs::path root = testing_support::scratch_dir("acceptance");
  fs::path corpus = root / "corpus";
  fs::path cv_a = root / "cv-a";
  fs::path cv_b = root / "cv-b";
  double first_run_seconds = -1;
  bool corpus_ok = false;
  bool first_run_ok = false;
};

Outcome check_descriptor_oracles() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = testing_support::run_descriptor_oracles(200, 11);
  const double t = seconds_since(start);
  return verdict(r.mismatches == 0 && r.max_error <= 1e-9 && t < 10.0,
                 std::to_string(r.parts) + " parts, " + std::to_string(r.mismatches) + " mismatches, max error " +
                     num(r.max_error) + ", " + num(t) + " s" +
                     (r.first_failure.empty() ? "" : ", first: " + r.first_failure));
}

Outcome check_gradients() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = testing_support::check_gradients(50, 12, Head::ordinal);
  const double t = seconds_since(start);
  return verdict(r.draws == 50 && r.max_rel_error < 1e-4 && t < 5.0,
                 std::to_string(r.draws) + " draws, max relative error " + num(r.max_rel_error) + ", " + num(t) + " s");
}

Outcome check_ordinal_decode() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t len = 1 + rng() % 11;
    std::vector<double> p(len);
    for (auto& v : p) v = rng() % 10 == 0 ? 0.5 : unit(rng);
    mismatches += decode(p) != oracle::decode_literal(p);
  }

  // aggregate set directly through the biases with zero weights
  ModelParams params = ModelParams::zeros(9);
  std::uniform_real_distribution<double> pos(0.05, 3.0), bias(-10.0, 10.0);
  for (auto& w : params.w_f) w = pos(rng);
  for (auto& b : params.b_f) b = bias(rng);
  int previous = 0, drops = 0;
  double worst_aggregate_error = 0;
  for (int i = 0; i < 1000; ++i) {
    const double target = -11.99 + 23.98 * i / 999.0;
    params.b.fill(std::atanh(target / double(kNumFeatures)));
    const auto trace = forward_standardized(params, FeatureArray{});
    worst_aggregate_error = std::max(worst_aggregate_error, std::abs(trace.aggregate - target));
    const int level = predict_level(params, trace);
    drops += level < previous;
    previous = level;
  }
  return verdict(mismatches == 0 && drops == 0 && worst_aggregate_error < 1e-9,
                 "10000 vectors, " + std::to_string(mismatches) + " decode mismatches; 1000-point sweep, " +
                     std::to_string(drops) + " decreases");
}

Outcome check_synthetic_end_to_end(Workspace& ws) {
  if (run_cli({"--seed", "0", "synth", "--levels", "9", "--per-class", "60", "--out", ws.corpus.string()}) != 0)
    return verdict(false, "synth failed");
  ws.corpus_ok = true;
  const auto start = std::chrono::steady_clock::now();
  std::string log;
  const int code = run_cli({"--seed", "0", "evaluate", ws.corpus.string(), "--labels", (ws.corpus / "labels.csv").string(),
                            "--levels", "9", "--budget", "20", "--out", ws.cv_a.string()},
                           &log);
  ws.first_run_seconds = seconds_since(start);
  if (code != 0) return verdict(false, "evaluate failed: " + log);
  ws.first_run_ok = true;
  const auto [acc, mse] = fold_means(ws.cv_a / "metrics.csv");
  return verdict(acc >= 0.90 && mse <= 0.2 && ws.first_run_seconds < 300.0,
                 "macro Acc-9 " + num(acc) + ", macro MSE " + num(mse) + ", " + num(ws.first_run_seconds) + " s");
}

Outcome check_cipi() {
  const char* dir = std::getenv("RUBRICNET_CIPI_DIR");
  if (!dir || !*dir) return {Status::skip, "RUBRICNET_CIPI_DIR not set"};
  const fs::path root = dir;
  const fs::path labels = root / "labels.csv";
  const auto work = testing_support::scratch_dir("acceptance-cipi");
  if (run_cli({"extract", root.string(), "--labels", labels.string(), "--levels", "9", "--out",
               (work / "features.csv").string()}) != 0)
    return verdict(false, "extract failed");
  if (run_cli({"--seed", "0", "evaluate", (work / "features.csv").string(), "--labels", labels.string(), "--levels",
               "9", "--out", (work / "cv").string()}) != 0)
    return verdict(false, "evaluate failed");
  const auto [acc, mse] = fold_means(work / "cv" / "metrics.csv");
  std::vector<double> entropy, level;
  for (const auto& row : parse_feature_table(read_file(work / "features.csv"))) {
    entropy.push_back(row.features[feature_slot(Descriptor::pitch_entropy, Hand::right)]);
    level.push_back(double(row.label.value_or(0)));
  }
  const double tau = kendall_tau_c(entropy, level);
  const double acc_pct = 100.0 * acc;
  return verdict(acc_pct >= 35.2 && acc_pct <= 47.6 && std::abs(tau - 0.583) <= 0.05,
                 "macro Acc-9 " + num(acc_pct) + "%, MSE " + num(mse) + ", PitchEntropy-R tau_c " + num(tau));
}

Outcome check_tau_c() {
  const double dev = testing_support::max_tau_deviation(100, 14);
  std::vector<double> x, y;
  for (int i = 0; i < 999; ++i) {
    y.push_back(1 + i % 9);
    x.push_back(y.back());
  }
  const double perfect = kendall_tau_c(x, y);
  for (auto& v : x) v = -v;
  const double reversed = kendall_tau_c(x, y);
  return verdict(dev <= 1e-12 && perfect == 1.0 && reversed == -1.0,
                 "100 tied datasets, max deviation " + num(dev) + "; perfect " + num(perfect) + ", reversal " +
                     num(reversed));
}

Outcome check_determinism(Workspace& ws) {
  if (!ws.first_run_ok) return verdict(false, "first evaluate run unavailable");
  if (run_cli({"--seed", "0", "evaluate", ws.corpus.string(), "--labels", (ws.corpus / "labels.csv").string(), "--levels",
               "9", "--budget", "20", "--out", ws.cv_b.string()}) != 0)
    return verdict(false, "second evaluate failed");
  std::vector<fs::path> files = {"metrics.csv", "predictions.csv", "folds.csv"};
  for (int f = 0; f < 5; ++f) files.push_back(fs::path("fold" + std::to_string(f)) / "checkpoint.json");
  int differing = 0;
  for (const auto& f : files) differing += read_file(ws.cv_a / f) != read_file(ws.cv_b / f);
  return verdict(differing == 0, std::to_string(files.size()) + " files compared, " + std::to_string(differing) +
                                     " differ");
}

Outcome check_rubric_integrity(Workspace& ws) {
  if (!ws.first_run_ok) return verdict(false, "evaluate outputs unavailable");
  std::map<std::string, int> fold_of;
  for (const auto& r : parse_labels_csv(read_file(ws.cv_a / "folds.csv"), 9)) fold_of[r.id] = r.fold.value_or(-1);
  std::vector<ModelParams> params;
  std::vector<GradeStatistics> stats;
  for (int f = 0; f < 5; ++f) {
    const fs::path dir = ws.cv_a / ("fold" + std::to_string(f));
    params.push_back(load_checkpoint(read_file(dir / "checkpoint.json"), 9));
    stats.push_back(parse_grade_statistics(read_file(dir / "grade_stats.json")));
  }
  LoadOptions options;
  options.num_levels = 9;
  const Corpus corpus = load_corpus(ws.corpus, ws.corpus / "labels.csv", options);
  int checked = 0, failures = 0;
  for (const auto& piece : corpus.pieces) {
    const int f = fold_of.at(piece.id);
    const auto& p = params[std::size_t(f)];
    const RubricReport report = build_report(p, piece, stats[std::size_t(f)]);
    const auto trace = forward(p, extract_features(piece));
    const bool ok = report.aggregated_score >= 0.0 && report.aggregated_score <= 12.0 &&
                    report.aggregated_score == rescale_aggregate(trace.aggregate) &&
                    report.predicted_level == decode(trace.probs) &&
                    parse_report_json(render(report, Format::json)) == report;
    failures += !ok;
    ++checked;
  }
  return verdict(checked == 540 && failures == 0,
                 std::to_string(checked) + " test pieces, " + std::to_string(failures) + " failures");
}

Outcome check_ingest() {
  std::mt19937_64 rng(15);
  int round_trip_failures = 0;
  for (int i = 0; i < 100; ++i) {
    const Piece p = testing_support::random_piece(rng, "piece-" + std::to_string(i));
    const std::string text = serialize_canonical_json(p);
    const Piece back = parse_canonical_json(text);
    round_trip_failures += !(back == p) || serialize_canonical_json(back) != text;
  }
  const Piece xml = parse_musicxml(read_file(kData / "two_staff.musicxml"), "two_staff");
  const auto [right, left] = testing_support::read_golden_events(kData / "two_staff.golden.txt");
  const bool golden = xml.right == right && xml.left == left;
  const Piece no_tempo = parse_musicxml(read_file(kData / "two_parts_no_tempo.musicxml"), "p");
  const bool tempo = !no_tempo.tempo_bpm && resolve_tempo(no_tempo) == 100.0 && tempo_is_assumed(no_tempo);
  return verdict(round_trip_failures == 0 && golden && tempo,
                 "100 round-trips, " + std::to_string(round_trip_failures) + " failures; golden " +
                     (golden ? "matches" : "differs") + "; missing tempo " + (tempo ? "100 bpm" : "wrong"));
}

}  // namespace

int main() {
  Workspace ws;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"descriptor oracle suite", check_descriptor_oracles},
      {"gradient correctness", check_gradients},
      {"ordinal decode properties", check_ordinal_decode},
      {"synthetic end-to-end", [&] { return check_synthetic_end_to_end(ws); }},
      {"CIPI reproduction", check_cipi},
      {"tau_c correctness", check_tau_c},
      {"determinism", [&] { return check_determinism(ws); }},
      {"rubric integrity", [&] { return check_rubric_integrity(ws); }},
      {"ingest", check_ingest},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failed += o.status == Status::fail;
    std::printf("criterion %zu: %s  %s  (%s)\n", i + 1, tag, criteria[i].first.c_str(), o.details.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(ws.root);
  return failed == 0 ? 0 : 1;
}

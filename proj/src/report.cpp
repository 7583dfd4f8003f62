#include "rubricnet/report.hpp"

#include <algorithm>

namespace rubricnet {

RubricReport build_report(const ModelParams& params, std::string piece_id, const FeatureVector& features,
                          std::optional<int> label, const GradeStatistics& stats) {
  const ForwardTrace trace = forward(params, features);
  const Divergence divergence = grade_divergence(params, features.values, label, stats);
  const FeatureArray normalized = normalize_scores(trace.scores);

  RubricReport r;
  r.piece_id = std::move(piece_id);
  r.num_levels = params.num_levels;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    r.rows[j] = RubricRow{std::string(kFeatureNames[j]), features.values[j], normalized[j], divergence.values[j]};
  }
  r.aggregate = trace.aggregate;
  r.aggregated_score = rescale_aggregate(trace.aggregate);
  r.predicted_level = predict_level(params, trace);
  r.labeled_level = label;
  r.reference_level = divergence.reference_level;
  r.divergence_from_prediction = divergence.from_prediction;
  for (const auto& b : decision_boundaries(params)) {
    r.boundaries.push_back(b ? std::optional<double>(rescale_aggregate(*b)) : std::nullopt);
  }
  r.boundaries_ordered = boundaries_ordered(params);
  r.tempo_assumed = features.tempo_assumed;
  r.all_below_grade_average =
      std::all_of(r.rows.begin(), r.rows.end(), [](const RubricRow& row) { return row.divergence < 0.0; });
  return r;
}

RubricReport build_report(const ModelParams& params, const Piece& piece, const GradeStatistics& stats) {
  std::optional<int> label;
  if (piece.label) {
    if (piece.label->num_levels != params.num_levels) {
      throw Error(Errc::invalid_argument, "piece label scale does not match the model K");
    }
    label = piece.label->level;
  }
  return build_report(params, piece.id, extract_features(piece), label, stats);
}

Format parse_format(std::string_view text) {
  if (text == "json") return Format::json;
  if (text == "markdown" || text == "md") return Format::markdown;
  if (text == "html") return Format::html;
  throw Error(Errc::invalid_argument, "unknown report format '" + std::string(text) + "'");
}

}  // namespace rubricnet

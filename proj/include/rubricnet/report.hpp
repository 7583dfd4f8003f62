#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rubricnet/analysis.hpp"
#include "rubricnet/model.hpp"

namespace rubricnet {

struct RubricRow {
  std::string name;
  double raw = 0.0;         // descriptor value
  double normalized = 0.0;  // (tanh score + 1) / 2
  double divergence = 0.0;  // normalized minus the reference grade mean

  friend bool operator==(const RubricRow&, const RubricRow&) = default;
};

struct RubricReport {
  std::string piece_id;
  int num_levels = 0;
  std::array<RubricRow, kNumFeatures> rows;
  double aggregate = 0.0;         // S_agg
  double aggregated_score = 0.0;  // S_agg on the 0-12 scale
  int predicted_level = 1;
  std::optional<int> labeled_level;
  int reference_level = 1;
  bool divergence_from_prediction = false;
  std::vector<std::optional<double>> boundaries;  // on the 0-12 scale
  bool boundaries_ordered = false;
  bool tempo_assumed = false;
  bool all_below_grade_average = false;

  friend bool operator==(const RubricReport&, const RubricReport&) = default;
};

inline constexpr std::string_view kAllBelowAverageNote = "all descriptors below grade average";

RubricReport build_report(const ModelParams& params, const Piece& piece, const GradeStatistics& stats);
RubricReport build_report(const ModelParams& params, std::string piece_id, const FeatureVector& features,
                          std::optional<int> label, const GradeStatistics& stats);

enum class Format { json, markdown, html };
Format parse_format(std::string_view text);

std::string render(const RubricReport& report, Format format);
RubricReport parse_report_json(std::string_view text);

}  // namespace rubricnet

#include <doctest.h>

#include <cmath>
#include <regex>

#include "rubricnet/report.hpp"

using namespace rubricnet;

namespace {

ModelParams example_params() {
  ModelParams p = ModelParams::zeros(4);
  p.w.fill(0.5);
  p.w_f = {1.0, 1.0, 1.0};
  p.b_f = {4.0, 0.0, -4.0};
  return p;
}

GradeStatistics flat_stats(int k, double value) {
  GradeStatistics s;
  s.num_levels = k;
  s.count.assign(std::size_t(k), 3);
  FeatureArray m;
  m.fill(value);
  s.mean.assign(std::size_t(k), m);
  return s;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("a piece at the grade mean has zero divergence") {
  const ModelParams p = example_params();
  FeatureVector fv;
  fv.values.fill(0.3);
  const double s = std::tanh(0.15);
  const RubricReport r = build_report(p, "mean", fv, 3, flat_stats(4, (s + 1.0) / 2.0));
  for (const auto& row : r.rows) CHECK(std::abs(row.divergence) < 1e-12);
  CHECK(r.aggregate == doctest::Approx(12 * s));
  CHECK(r.predicted_level == 3);
  CHECK(r.reference_level == 3);
  CHECK_FALSE(r.divergence_from_prediction);
  CHECK_FALSE(r.all_below_grade_average);
  CHECK(r.rows[0].name == "PitchEntropy-R");
  CHECK(r.rows[0].raw == 0.3);
}

TEST_CASE("aggregated score and boundaries live on the 0-12 scale") {
  ModelParams p = example_params();
  p.b.fill(50.0);
  const RubricReport r = build_report(p, "max", FeatureVector{}, std::nullopt, flat_stats(4, 0.5));
  CHECK(r.aggregated_score == doctest::Approx(12.0));
  CHECK(r.divergence_from_prediction);
  REQUIRE(r.boundaries.size() == 3);
  CHECK(*r.boundaries[0] == doctest::Approx(4.0));
  CHECK(*r.boundaries[1] == doctest::Approx(6.0));
  CHECK(*r.boundaries[2] == doctest::Approx(8.0));
  CHECK(r.boundaries_ordered);
  CHECK(r.aggregated_score == rescale_aggregate(r.aggregate));
}

TEST_CASE("all descriptors below the grade average") {
  const ModelParams p = example_params();
  FeatureVector fv;
  fv.values.fill(-1.0);
  const RubricReport r = build_report(p, "low", fv, 4, flat_stats(4, 0.9));
  CHECK(r.all_below_grade_average);
  CHECK(r.predicted_level < 4);
  CHECK(render(r, Format::markdown).find(kAllBelowAverageNote) != std::string::npos);
}

TEST_CASE("rendering") {
  ModelParams p = example_params();
  p.w_f[1] = 0.0;
  FeatureVector fv;
  fv.values.fill(0.2);
  fv.tempo_assumed = true;
  const RubricReport r = build_report(p, "piece<1>", fv, 2, flat_stats(4, 0.5));

  SUBCASE("json round-trip") {
    CHECK(parse_report_json(render(r, Format::json)) == r);
    CHECK(render(r, Format::json).find("\"boundaries\"") != std::string::npos);
  }
  SUBCASE("markdown has one row per descriptor") {
    const std::string md = render(r, Format::markdown);
    for (auto name : kFeatureNames) CHECK(count_of(md, "| " + std::string(name) + " |") == 1);
    std::size_t rows = 0;
    for (auto name : kFeatureNames) rows += count_of(md, "| " + std::string(name));
    CHECK(rows == 12);
    CHECK(md.find("unreachable") != std::string::npos);
    CHECK(md.find("100 bpm assumed") != std::string::npos);
  }
  SUBCASE("html has the 0-12 scale and one tick per reachable boundary") {
    const std::string html = render(r, Format::html);
    CHECK(count_of(html, "class=\"descriptor\"") == 12);
    CHECK(count_of(html, "class=\"scale\"") == 1);
    CHECK(count_of(html, "class=\"axis-tick\"") == 13);
    CHECK(count_of(html, "class=\"boundary\"") == 2);
    CHECK(html.find("piece&lt;1&gt;") != std::string::npos);
    CHECK(html.find("piece<1>") == std::string::npos);
  }
  SUBCASE("formats") {
    CHECK(parse_format("json") == Format::json);
    CHECK(parse_format("markdown") == Format::markdown);
    CHECK(parse_format("html") == Format::html);
    CHECK_THROWS_AS(parse_format("csv"), Error);
  }
}

TEST_CASE("label scale must match the model") {
  Piece piece;
  piece.id = "p";
  piece.right = HandPart(Hand::right, {NoteEvent::make(60, Beats(0), Beats(1))});
  piece.left = HandPart(Hand::left, {NoteEvent::make(48, Beats(0), Beats(1))});
  piece.label = DifficultyLabel::make(2, 9);
  CHECK_THROWS_AS(build_report(example_params(), piece, flat_stats(4, 0.5)), Error);
  piece.label = DifficultyLabel::make(2, 4);
  CHECK(build_report(example_params(), piece, flat_stats(4, 0.5)).labeled_level == 2);
}

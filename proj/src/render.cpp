#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "rubricnet/report.hpp"

namespace rubricnet {
namespace {

using nlohmann::json;

std::string fixed(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string signed_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.3f", v);
  return buf;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

json to_json(const RubricReport& r) {
  json doc;
  doc["piece_id"] = r.piece_id;
  doc["K"] = r.num_levels;
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"descriptor", row.name},
                    {"value", row.raw},
                    {"score", row.normalized},
                    {"grade_divergence", row.divergence}});
  }
  doc["descriptors"] = std::move(rows);
  doc["aggregate"] = r.aggregate;
  doc["aggregated_score"] = r.aggregated_score;
  doc["predicted_level"] = r.predicted_level;
  doc["labeled_level"] = r.labeled_level ? json(*r.labeled_level) : json(nullptr);
  doc["reference_level"] = r.reference_level;
  doc["divergence_from_prediction"] = r.divergence_from_prediction;
  json bounds = json::array();
  for (const auto& b : r.boundaries) bounds.push_back(b ? json(*b) : json(nullptr));
  doc["boundaries"] = std::move(bounds);
  doc["boundaries_ordered"] = r.boundaries_ordered;
  doc["tempo_assumed"] = r.tempo_assumed;
  doc["all_below_grade_average"] = r.all_below_grade_average;
  return doc;
}

std::string notes(const RubricReport& r) {
  std::string out;
  if (r.all_below_grade_average) out += "- Note: " + std::string(kAllBelowAverageNote) + ".\n";
  if (r.divergence_from_prediction) out += "- Note: no label; divergence is measured against the predicted level.\n";
  if (r.tempo_assumed) out += "- Note: no tempo marking; 100 bpm assumed, so Average IOI may be unreliable.\n";
  if (!r.boundaries.empty() && !r.boundaries_ordered) {
    out += "- Note: decision boundaries are not monotone in the aggregated score.\n";
  }
  return out;
}

std::string render_markdown(const RubricReport& r) {
  std::string out = "# Difficulty rubric: " + r.piece_id + "\n\n";
  out += "| Descriptor | Value | Score | Grade divergence |\n";
  out += "|---|---:|---:|---:|\n";
  for (const auto& row : r.rows) {
    out += "| " + row.name + " | " + fixed(row.raw) + " | " + fixed(row.normalized) + " | " +
           signed_fixed(row.divergence) + " |\n";
  }
  out += "\n";
  out += "- Aggregated score: " + fixed(r.aggregated_score) + " / 12\n";
  out += "- Predicted level: " + std::to_string(r.predicted_level) + " of " + std::to_string(r.num_levels) + "\n";
  if (r.labeled_level) out += "- Labeled level: " + std::to_string(*r.labeled_level) + "\n";
  out += "- Divergence reference level: " + std::to_string(r.reference_level) + "\n";
  out += notes(r);

  if (!r.boundaries.empty()) {
    out += "\n## Decision boundaries (0-12 scale)\n\n";
    out += "| Between levels | Position |\n|---|---:|\n";
    for (std::size_t k = 0; k < r.boundaries.size(); ++k) {
      out += "| " + std::to_string(k + 1) + " / " + std::to_string(k + 2) + " | " +
             (r.boundaries[k] ? fixed(*r.boundaries[k]) : std::string("unreachable")) + " |\n";
    }
    // 0-12 axis at half-unit resolution: '|' boundary, '*' aggregated score
    constexpr int kCells = 49;
    std::string axis(kCells, '-');
    auto cell = [](double v) { return std::clamp(static_cast<int>(std::lround(v * 4.0)), 0, kCells - 1); };
    for (const auto& b : r.boundaries) {
      if (b) axis[static_cast<std::size_t>(cell(*b))] = '|';
    }
    axis[static_cast<std::size_t>(cell(r.aggregated_score))] = '*';
    out += "\n```\n0 " + axis + " 12\n```\n";
  }
  return out;
}

std::string render_html(const RubricReport& r) {
  std::string out =
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Difficulty rubric: " + html_escape(r.piece_id) +
      "</title>\n<style>body{font-family:sans-serif}table{border-collapse:collapse}"
      "td,th{border:1px solid #999;padding:2px 8px;text-align:right}td:first-child{text-align:left}"
      ".neg{color:#b00}.pos{color:#070}</style></head><body>\n";
  out += "<h1>Difficulty rubric: " + html_escape(r.piece_id) + "</h1>\n";
  out += "<table class=\"rubric\">\n<tr><th>Descriptor</th><th>Value</th><th>Score</th><th>Grade divergence</th></tr>\n";
  for (const auto& row : r.rows) {
    out += "<tr class=\"descriptor\"><td>" + html_escape(row.name) + "</td><td>" + fixed(row.raw) + "</td><td>" +
           fixed(row.normalized) + "</td><td class=\"" + (row.divergence < 0 ? "neg" : "pos") + "\">" +
           signed_fixed(row.divergence) + "</td></tr>\n";
  }
  out += "</table>\n<ul>\n";
  out += "<li>Aggregated score: " + fixed(r.aggregated_score) + " / 12</li>\n";
  out += "<li>Predicted level: " + std::to_string(r.predicted_level) + " of " + std::to_string(r.num_levels) + "</li>\n";
  if (r.labeled_level) out += "<li>Labeled level: " + std::to_string(*r.labeled_level) + "</li>\n";
  out += "<li>Divergence reference level: " + std::to_string(r.reference_level) + "</li>\n</ul>\n";
  if (const auto n = notes(r); !n.empty()) out += "<pre class=\"notes\">" + html_escape(n) + "</pre>\n";

  constexpr double kLeft = 20.0, kWidth = 480.0;
  auto x_of = [&](double v) { return kLeft + std::clamp(v, 0.0, 12.0) / 12.0 * kWidth; };
  out += "<svg class=\"scale\" xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"70\" viewBox=\"0 0 520 70\">\n";
  out += "<line x1=\"" + fixed(kLeft, 1) + "\" y1=\"35\" x2=\"" + fixed(kLeft + kWidth, 1) +
         "\" y2=\"35\" stroke=\"#333\"/>\n";
  for (int t = 0; t <= 12; ++t) {
    const std::string x = fixed(x_of(t), 1);
    out += "<line class=\"axis-tick\" x1=\"" + x + "\" y1=\"32\" x2=\"" + x + "\" y2=\"38\" stroke=\"#333\"/>";
    out += "<text x=\"" + x + "\" y=\"52\" font-size=\"10\" text-anchor=\"middle\">" + std::to_string(t) + "</text>\n";
  }
  for (std::size_t k = 0; k < r.boundaries.size(); ++k) {
    if (!r.boundaries[k]) continue;
    const std::string x = fixed(x_of(*r.boundaries[k]), 1);
    out += "<line class=\"boundary\" data-levels=\"" + std::to_string(k + 1) + "/" + std::to_string(k + 2) +
           "\" x1=\"" + x + "\" y1=\"22\" x2=\"" + x + "\" y2=\"48\" stroke=\"#c60\" stroke-width=\"2\"/>\n";
  }
  out += "<circle class=\"score\" cx=\"" + fixed(x_of(r.aggregated_score), 1) +
         "\" cy=\"35\" r=\"5\" fill=\"#06c\"/>\n</svg>\n</body></html>\n";
  return out;
}

}  // namespace

std::string render(const RubricReport& report, Format format) {
  switch (format) {
    case Format::json: return to_json(report).dump(1) + "\n";
    case Format::markdown: return render_markdown(report);
    case Format::html: return render_html(report);
  }
  return {};
}

RubricReport parse_report_json(std::string_view text) {
  RubricReport r;
  try {
    const json doc = json::parse(text);
    r.piece_id = doc.at("piece_id").get<std::string>();
    r.num_levels = doc.at("K").get<int>();
    const auto& rows = doc.at("descriptors");
    if (rows.size() != kNumFeatures) throw Error(Errc::parse, "report: expected 12 descriptor rows");
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      r.rows[j] = RubricRow{rows[j].at("descriptor").get<std::string>(), rows[j].at("value").get<double>(),
                            rows[j].at("score").get<double>(), rows[j].at("grade_divergence").get<double>()};
    }
    r.aggregate = doc.at("aggregate").get<double>();
    r.aggregated_score = doc.at("aggregated_score").get<double>();
    r.predicted_level = doc.at("predicted_level").get<int>();
    if (!doc.at("labeled_level").is_null()) r.labeled_level = doc.at("labeled_level").get<int>();
    r.reference_level = doc.at("reference_level").get<int>();
    r.divergence_from_prediction = doc.at("divergence_from_prediction").get<bool>();
    for (const auto& b : doc.at("boundaries")) {
      r.boundaries.push_back(b.is_null() ? std::nullopt : std::optional<double>(b.get<double>()));
    }
    r.boundaries_ordered = doc.at("boundaries_ordered").get<bool>();
    r.tempo_assumed = doc.at("tempo_assumed").get<bool>();
    r.all_below_grade_average = doc.at("all_below_grade_average").get<bool>();
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("report: ") + e.what());
  }
  return r;
}

}  // namespace rubricnet

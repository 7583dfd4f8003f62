#include <sstream>

#include "rubricnet/descriptors.hpp"
#include "rubricnet/numfmt.hpp"

namespace rubricnet {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string feature_table_header() {
  std::string h = "id,label";
  for (auto name : kFeatureNames) {
    h += ',';
    h += name;
  }
  h += ",tempo_assumed";
  return h;
}

std::string write_feature_table(std::span<const FeatureRow> rows) {
  std::string out = feature_table_header() + "\n";
  for (const auto& row : rows) {
    out += row.id;
    out += ',';
    if (row.label) out += std::to_string(*row.label);
    for (double v : row.features.values) {
      out += ',';
      out += format_double(v);
    }
    out += row.features.tempo_assumed ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<FeatureRow> parse_feature_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::parse, "feature table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != feature_table_header()) throw Error(Errc::parse, "feature table header mismatch");

  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    const std::string where = "feature table line " + std::to_string(line_no);
    if (cells.size() != kNumFeatures + 3) throw Error(Errc::parse, where + ": wrong column count");
    FeatureRow row;
    row.id = cells[0];
    if (row.id.empty()) throw Error(Errc::parse, where + ": empty id");
    if (!cells[1].empty()) {
      const auto level = parse_double(cells[1]);
      if (!level || *level != static_cast<int>(*level)) throw Error(Errc::parse, where + ": bad label");
      row.label = static_cast<int>(*level);
    }
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      const auto v = parse_double(cells[2 + i]);
      if (!v) throw Error(Errc::parse, where + ": bad value in column " + std::string(kFeatureNames[i]));
      row.features.values[i] = *v;
    }
    const auto& flag = cells.back();
    if (flag != "0" && flag != "1") throw Error(Errc::parse, where + ": tempo_assumed must be 0 or 1");
    row.features.tempo_assumed = flag == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rubricnet

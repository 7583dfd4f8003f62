#include "rubricnet/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace rubricnet {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string header(int width, int height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

}  // namespace

std::string correlation_bar_svg(const CorrelationTable& table) {
  const int row_h = 20, left = 150, width = 520, bar_w = 300;
  const int height = 30 + row_h * static_cast<int>(table.entries.size());
  const double zero_x = left + bar_w / 2.0;
  std::string out = header(width, height);
  out += "<line x1=\"" + num(zero_x) + "\" y1=\"10\" x2=\"" + num(zero_x) + "\" y2=\"" + std::to_string(height - 10) +
         "\" stroke=\"#333\"/>\n";
  int y = 20;
  for (const auto& e : table.entries) {
    const double len = std::abs(e.tau) * bar_w / 2.0;
    const double x = e.tau >= 0 ? zero_x : zero_x - len;
    out += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + std::to_string(y + 12) +
           "\" text-anchor=\"end\">" + e.name + "</text>";
    out += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + std::to_string(y + 2) + "\" width=\"" + num(len) +
           "\" height=\"" + std::to_string(row_h - 6) + "\" fill=\"" + (e.tau >= 0 ? "#1f77b4" : "#d62728") + "\"/>";
    char label[32];
    std::snprintf(label, sizeof label, "%.3f", e.tau);
    out += "<text x=\"" + num(zero_x + bar_w / 2.0 + 8) + "\" y=\"" + std::to_string(y + 12) + "\">" + label +
           "</text>\n";
    y += row_h;
  }
  return out + "</svg>\n";
}

std::string dendrogram_svg(const Dendrogram& dendrogram, std::span<const std::string> names) {
  const int n = dendrogram.leaves;
  const int row_h = 22, left = 20, label_w = 140, plot_w = 340;
  const int width = left + plot_w + label_w + 20;
  const int height = 40 + row_h * std::max(n, 1);
  double max_d = 0.0;
  for (const auto& m : dendrogram.merges) max_d = std::max(max_d, m.distance);
  if (max_d <= 0.0) max_d = 1.0;
  // distance 0 at the right next to the labels, growing to the left
  auto x_of = [&](double d) { return left + plot_w * (1.0 - std::clamp(d, 0.0, max_d) / max_d); };

  std::map<int, std::pair<double, double>> pos;  // cluster id -> (x, y)
  const auto order = leaf_order(dendrogram);
  std::string out = header(width, height);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const double y = 20 + row_h * static_cast<double>(r) + row_h / 2.0;
    pos[order[r]] = {x_of(0.0), y};
    const auto idx = static_cast<std::size_t>(order[r]);
    out += "<text x=\"" + num(x_of(0.0) + 6) + "\" y=\"" + num(y + 4) + "\">" +
           (idx < names.size() ? names[idx] : std::to_string(idx)) + "</text>\n";
  }
  for (std::size_t i = 0; i < dendrogram.merges.size(); ++i) {
    const auto& m = dendrogram.merges[i];
    const auto [xa, ya] = pos.at(m.a);
    const auto [xb, yb] = pos.at(m.b);
    const double x = x_of(m.distance);
    out += "<path class=\"link\" d=\"M" + num(xa) + "," + num(ya) + " H" + num(x) + " V" + num(yb) + " H" + num(xb) +
           "\" fill=\"none\" stroke=\"#333\"/>\n";
    pos[n + static_cast<int>(i)] = {x, (ya + yb) / 2.0};
  }
  out += "<text x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(height - 6) + "\">distance " + num(max_d) +
         "</text><text x=\"" + num(x_of(0.0)) + "\" y=\"" + std::to_string(height - 6) +
         "\" text-anchor=\"end\">0</text>\n";
  return out + "</svg>\n";
}

std::string contribution_svg(const ContributionProfile& profile) {
  const int width = 560, height = 320, left = 50, right = 150, top = 20, bottom = 40;
  const int plot_w = width - left - right, plot_h = height - top - bottom;
  double lo = 0.0, hi = 0.0;
  for (const auto& row : profile.relative) {
    if (!row) continue;
    for (double v : *row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-9) hi = lo + 1.0;
  const int levels = std::max(profile.num_levels, 2);
  auto x_of = [&](int g) { return left + plot_w * (g - 1) / static_cast<double>(levels - 1); };
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::string out = header(width, height);
  out += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + num(y_of(0.0)) + "\" x2=\"" +
         std::to_string(left + plot_w) + "\" y2=\"" + num(y_of(0.0)) + "\" stroke=\"#999\"/>\n";
  for (int g = 1; g <= levels; ++g) {
    out += "<text x=\"" + num(x_of(g)) + "\" y=\"" + std::to_string(height - 20) + "\" text-anchor=\"middle\">" +
           std::to_string(g) + "</text>";
  }
  out += "\n";
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    std::string d;
    for (std::size_t g = 0; g < profile.relative.size(); ++g) {
      if (!profile.relative[g]) continue;
      d += (d.empty() ? "M" : " L") + num(x_of(static_cast<int>(g) + 1)) + "," + num(y_of((*profile.relative[g])[j]));
    }
    const char* colour = kPalette[j / 2];
    out += "<path class=\"series\" d=\"" + d + "\" fill=\"none\" stroke=\"" + colour + "\"" +
           (j % 2 ? " stroke-dasharray=\"4 3\"" : "") + "/>\n";
    out += "<text x=\"" + std::to_string(width - right + 8) + "\" y=\"" + std::to_string(top + 12 + 16 * static_cast<int>(j)) +
           "\" fill=\"" + colour + "\">" + std::string(kFeatureNames[j]) + "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace rubricnet

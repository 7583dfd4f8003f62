#pragma once

#include <string>

#include "rubricnet/analysis.hpp"

namespace rubricnet {

// Static SVG renderings of the analysis artifacts.
std::string correlation_bar_svg(const CorrelationTable& table);
std::string dendrogram_svg(const Dendrogram& dendrogram, std::span<const std::string> names);
std::string contribution_svg(const ContributionProfile& profile);

}  // namespace rubricnet

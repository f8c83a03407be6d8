#pragma once

#include <span>
#include <string>

#include "fairgap/analysis.hpp"

namespace fairgap::svg {

// Scatter of every point with a defined value (unfairness vs. accuracy) and a
// single polyline through the front.
std::string tradeoff_plot(std::span<const TradeoffPoint> points, const ParetoFront& front);

// Mirrored density outline with quartile marks.
std::string violin_plot(const ViolinSummary& violin);

}  // namespace fairgap::svg

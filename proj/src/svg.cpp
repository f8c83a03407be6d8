#include "fairgap/svg.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace fairgap::svg {
namespace {

constexpr double kWidth = 640, kHeight = 480, kMargin = 60;

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Axis {
  double lo, hi;
  double map(double v, double px_lo, double px_hi) const {
    const double span = hi > lo ? hi - lo : 1.0;
    return px_lo + (v - lo) / span * (px_hi - px_lo);
  }
};

Axis padded(double lo, double hi) {
  if (hi <= lo) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string header(std::string_view title) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"30\" font-family=\"sans-serif\" font-size=\"16\" "
      "text-anchor=\"middle\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2, escape(title));
}

std::string axes(std::string_view x_label, const Axis& x, std::string_view y_label, const Axis& y) {
  return fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "<text x=\"{4}\" y=\"{5}\" font-family=\"sans-serif\" font-size=\"12\" "
      "text-anchor=\"middle\">{6}</text>\n"
      "<text x=\"15\" y=\"{7}\" font-family=\"sans-serif\" font-size=\"12\" "
      "text-anchor=\"middle\" transform=\"rotate(-90 15 {7})\">{8}</text>\n"
      "<text x=\"{0}\" y=\"{9}\" font-family=\"sans-serif\" font-size=\"10\">{10:.4g}</text>\n"
      "<text x=\"{2}\" y=\"{9}\" font-family=\"sans-serif\" font-size=\"10\" "
      "text-anchor=\"end\">{11:.4g}</text>\n"
      "<text x=\"{12}\" y=\"{1}\" font-family=\"sans-serif\" font-size=\"10\" "
      "text-anchor=\"end\">{13:.4g}</text>\n"
      "<text x=\"{12}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"10\" "
      "text-anchor=\"end\">{14:.4g}</text>\n",
      kMargin, kHeight - kMargin, kWidth - kMargin, kMargin, kWidth / 2, kHeight - 15,
      escape(x_label), kHeight / 2, escape(y_label), kHeight - kMargin + 15, x.lo, x.hi,
      kMargin - 4, y.lo, y.hi);
}

}  // namespace

std::string tradeoff_plot(std::span<const TradeoffPoint> points, const ParetoFront& front) {
  std::vector<std::pair<double, double>> cloud;  // (unfairness, accuracy)
  for (const auto& p : points) {
    const auto& v = p.fairness[index_of(front.notion)];
    if (!v) continue;
    if (auto u = unfairness(front.notion, *v, front.mode)) cloud.emplace_back(*u, p.accuracy);
  }
  double ulo = 0.0, uhi = 0.0, alo = 1.0, ahi = 0.0;
  for (const auto& [u, a] : cloud) {
    uhi = std::max(uhi, u);
    alo = std::min(alo, a);
    ahi = std::max(ahi, a);
  }
  for (const auto& f : front.points) {
    uhi = std::max(uhi, f.unfairness);
    alo = std::min(alo, f.point.accuracy);
    ahi = std::max(ahi, f.point.accuracy);
  }
  const Axis x = padded(ulo, uhi), y = padded(std::min(alo, ahi), ahi);
  auto px = [&](double u) { return x.map(u, kMargin, kWidth - kMargin); };
  auto py = [&](double a) { return y.map(a, kHeight - kMargin, kMargin); };

  std::string out = header(fmt::format("{} ({}) accuracy vs. unfairness", label(front.notion),
                                       name(front.notion)));
  out += axes("unfairness", x, "accuracy", y);
  out += "<g fill=\"steelblue\" fill-opacity=\"0.6\">\n";
  for (const auto& [u, a] : cloud)
    out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"3\"/>\n", px(u), py(a));
  out += "</g>\n<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < front.points.size(); ++i) {
    if (i) out.push_back(' ');
    out += fmt::format("{:.3f},{:.3f}", px(front.points[i].unfairness),
                       py(front.points[i].point.accuracy));
  }
  out += "\"/>\n</svg>\n";
  return out;
}

std::string violin_plot(const ViolinSummary& v) {
  double dmax = 0.0;
  for (double d : v.density) dmax = std::max(dmax, d);
  const Axis value_axis = v.grid.empty() ? Axis{0, 1} : Axis{v.grid.front(), v.grid.back()};
  const double cx = kWidth / 2, half_width = kWidth / 2 - kMargin;
  auto py = [&](double value) { return value_axis.map(value, kHeight - kMargin, kMargin); };
  auto dx = [&](double d) { return dmax > 0 ? d / dmax * half_width : 0.0; };

  std::string out = header(fmt::format("{} | {} (n={})", v.variable, v.group, v.count));
  out += "<polygon fill=\"mediumpurple\" fill-opacity=\"0.6\" stroke=\"indigo\" points=\"";
  for (std::size_t i = 0; i < v.grid.size(); ++i)
    out += fmt::format("{:.3f},{:.3f} ", cx + dx(v.density[i]), py(v.grid[i]));
  for (std::size_t i = v.grid.size(); i-- > 0;)
    out += fmt::format("{:.3f},{:.3f}{}", cx - dx(v.density[i]), py(v.grid[i]), i ? " " : "");
  out += "\"/>\n";
  out += fmt::format(
      "<line x1=\"{0:.3f}\" y1=\"{1:.3f}\" x2=\"{0:.3f}\" y2=\"{2:.3f}\" stroke=\"black\" "
      "stroke-width=\"4\"/>\n"
      "<circle cx=\"{0:.3f}\" cy=\"{3:.3f}\" r=\"4\" fill=\"white\" stroke=\"black\"/>\n",
      cx, py(v.q1), py(v.q3), py(v.median));
  out += fmt::format(
      "<text x=\"{0}\" y=\"{1:.3f}\" font-family=\"sans-serif\" font-size=\"10\">{2:.4g}</text>\n"
      "<text x=\"{0}\" y=\"{3:.3f}\" font-family=\"sans-serif\" font-size=\"10\">{4:.4g}</text>\n",
      kMargin / 2, kHeight - kMargin, value_axis.lo, kMargin, value_axis.hi);
  out += "</svg>\n";
  return out;
}

}  // namespace fairgap::svg

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "chronolex/error.hpp"
#include "chronolex/report.hpp"

namespace chronolex {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string px(double v) {
  const std::string s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

struct Range {
  double lo;
  double hi;
};

Range padded(double lo, double hi) {
  if (hi - lo <= 0.0) {
    const double pad = std::max(1.0, std::abs(lo) * 0.1);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Duplicate labels get a " (2)", " (3)" ... suffix in point order.
std::vector<std::string> unique_labels(const std::vector<PlotPoint>& points) {
  std::map<std::string, int> seen;
  std::vector<std::string> out;
  for (const auto& p : points) {
    const int n = ++seen[p.label];
    out.push_back(n == 1 ? p.label : fmt::format("{} ({})", p.label, n));
  }
  return out;
}

std::vector<bool> labelled(const PlotSpec& spec) {
  const std::size_t n = spec.points.size();
  switch (spec.label_policy) {
    case LabelPolicy::all:
      return std::vector<bool>(n, true);
    case LabelPolicy::none:
      return std::vector<bool>(n, false);
    case LabelPolicy::top_n: {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return spec.points[a].weight > spec.points[b].weight; });
      std::vector<bool> keep(n, false);
      for (std::size_t k = 0; k < std::min(n, spec.top_n); ++k) keep[order[k]] = true;
      return keep;
    }
  }
  return std::vector<bool>(n, true);
}

}  // namespace

std::string axis_label(int axis, double percent_inertia) {
  return fmt::format("Axis {} ({:.2f}%)", axis, percent_inertia);
}

std::string render_svg(const PlotSpec& spec) {
  if (spec.points.empty()) throw DataError("cannot render a plot without points");
  for (const auto& p : spec.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DataError(fmt::format("non-finite coordinate for point '{}'", p.label));
    }
  }
  if (spec.width < 100 || spec.height < 100) throw DataError("plot dimensions must be at least 100 px");

  const double W = spec.width, H = spec.height;
  const double left = 70, right = 30, top = 50, bottom = 60;
  const double plot_w = W - left - right, plot_h = H - top - bottom;

  const bool bar = spec.kind == PlotKind::bar;
  double xmin, xmax, ymin, ymax;
  if (bar) {
    xmin = -0.5;
    xmax = double(spec.points.size()) - 0.5;
    ymin = 0.0;
    ymax = 0.0;
    for (const auto& p : spec.points) ymax = std::max(ymax, p.y);
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.05;
  } else {
    auto [xlo, xhi] = std::minmax_element(spec.points.begin(), spec.points.end(),
                                          [](const auto& a, const auto& b) { return a.x < b.x; });
    auto [ylo, yhi] = std::minmax_element(spec.points.begin(), spec.points.end(),
                                          [](const auto& a, const auto& b) { return a.y < b.y; });
    const Range xr = padded(xlo->x, xhi->x);
    const Range yr = padded(ylo->y, yhi->y);
    xmin = xr.lo, xmax = xr.hi, ymin = yr.lo, ymax = yr.hi;
  }
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * plot_h; };

  std::map<std::string, std::string> colour;
  {
    std::set<std::string> tags;
    for (const auto& p : spec.points) tags.insert(p.tag);
    std::size_t k = 0;
    for (const auto& t : tags) colour[t] = kPalette[k++ % std::size(kPalette)];
  }
  const auto labels = unique_labels(spec.points);
  const auto show = labelled(spec);

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
      spec.width, spec.height, spec.width, spec.height);
  out << fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", spec.width, spec.height);
  if (!spec.title.empty()) {
    out << fmt::format("<text class=\"title\" x=\"{}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                       "font-size=\"16\">{}</text>\n",
                       px(W / 2), xml_escape(spec.title));
  }

  // Frame and axes through the origin when it is in range.
  out << fmt::format("<rect class=\"frame\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                     "stroke=\"#444\" stroke-width=\"1\"/>\n",
                     px(left), px(top), px(plot_w), px(plot_h));
  if (!bar && xmin < 0.0 && xmax > 0.0) {
    out << fmt::format("<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#999\" "
                       "stroke-dasharray=\"4 3\"/>\n",
                       px(sx(0.0)), px(top), px(top + plot_h));
  }
  if (ymin < 0.0 && ymax > 0.0) {
    out << fmt::format("<line class=\"axis\" x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"#999\" "
                       "stroke-dasharray=\"4 3\"/>\n",
                       px(sy(0.0)), px(left), px(left + plot_w));
  }
  if (!spec.x_label.empty()) {
    out << fmt::format("<text class=\"axis-title\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                       "font-size=\"13\">{}</text>\n",
                       px(left + plot_w / 2), px(H - 20), xml_escape(spec.x_label));
  }
  if (!spec.y_label.empty()) {
    out << fmt::format("<text class=\"axis-title\" x=\"20\" y=\"{0}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                       "font-size=\"13\" transform=\"rotate(-90 20 {0})\">{1}</text>\n",
                       px(top + plot_h / 2), xml_escape(spec.y_label));
  }

  if (spec.kind == PlotKind::trajectory) {
    out << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"#555\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < spec.points.size(); ++i) {
      out << (i ? " " : "") << px(sx(spec.points[i].x)) << ',' << px(sy(spec.points[i].y));
    }
    out << "\"/>\n";
  }

  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    const auto& p = spec.points[i];
    const std::string& fill = colour[p.tag];
    if (bar) {
      const double slot = plot_w / double(spec.points.size());
      const double x0 = sx(double(i)) - 0.4 * slot;
      const double y0 = sy(p.y);
      out << fmt::format("<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", px(x0),
                         px(y0), px(0.8 * slot), px(top + plot_h - y0), fill);
      if (show[i]) {
        out << fmt::format("<text class=\"label\" x=\"{0}\" y=\"{1}\" font-family=\"sans-serif\" font-size=\"10\" "
                           "text-anchor=\"end\" transform=\"rotate(-60 {0} {1})\">{2}</text>\n",
                           px(sx(double(i))), px(top + plot_h + 12), xml_escape(labels[i]));
      }
    } else {
      out << fmt::format("<circle class=\"point\" cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n", px(sx(p.x)), px(sy(p.y)),
                         fill);
      if (show[i]) {
        out << fmt::format("<text class=\"label\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" "
                           "fill=\"{}\">{}</text>\n",
                           px(sx(p.x) + 4), px(sy(p.y) - 4), fill, xml_escape(labels[i]));
      }
    }
  }
  out << "</svg>\n";
  return out.str();
}

void render_svg(const PlotSpec& spec, const std::filesystem::path& path) {
  const std::string text = render_svg(spec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace chronolex

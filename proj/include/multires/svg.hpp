#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multires/errors.hpp"

namespace multires {

struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct ChartOptions {
  int width = 880;
  int height = 540;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  std::string title;
  std::string x_label;
  std::string y_label;
};

namespace svg_detail {

inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                           "#d62728", "#9467bd", "#8c564b",
                                           "#e377c2", "#7f7f7f"};
inline constexpr int kPaletteSize = 8;

inline std::string escape(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

inline std::string num(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

}  // namespace svg_detail

// Static line chart as standalone SVG text. Output is a deterministic
// function of the inputs: fixed palette, fixed 2-decimal coordinates, no
// timestamps or generated ids.
inline std::string line_chart_svg(const std::vector<ChartSeries>& series,
                                  const ChartOptions& opts) {
  if (!(opts.x_max > opts.x_min) || !(opts.y_max > opts.y_min))
    throw InvalidInputError("line_chart_svg: empty axis range");
  const double margin_left = 64.0;
  const double margin_right = 170.0;
  const double margin_top = 42.0;
  const double margin_bottom = 54.0;
  const double plot_w = opts.width - margin_left - margin_right;
  const double plot_h = opts.height - margin_top - margin_bottom;
  const auto sx = [&](double x) {
    return margin_left + (x - opts.x_min) / (opts.x_max - opts.x_min) * plot_w;
  };
  const auto sy = [&](double y) {
    return margin_top + (opts.y_max - y) / (opts.y_max - opts.y_min) * plot_h;
  };
  using svg_detail::escape;
  using svg_detail::num;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(opts.width) + "\" height=\"" +
         std::to_string(opts.height) + "\" viewBox=\"0 0 " +
         std::to_string(opts.width) + " " + std::to_string(opts.height) +
         "\">\n";
  out += "<rect width=\"" + std::to_string(opts.width) + "\" height=\"" +
         std::to_string(opts.height) + "\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    out += "<text x=\"" + num((margin_left + opts.width - margin_right) / 2.0) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" +
           escape(opts.title) + "</text>\n";

  // gridlines and ticks
  const double x_span = opts.x_max - opts.x_min;
  const double x_step = x_span <= 12.0 ? 1.0 : std::ceil(x_span / 10.0);
  const double y_step = (opts.y_max - opts.y_min) / 10.0;
  out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (double x = opts.x_min; x <= opts.x_max + 1e-9; x += x_step) {
    const std::string px = num(sx(x));
    out += "<line x1=\"" + px + "\" y1=\"" + num(margin_top) + "\" x2=\"" + px +
           "\" y2=\"" + num(margin_top + plot_h) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    char label[32];
    std::snprintf(label, sizeof(label), "%g", x);
    out += "<text x=\"" + px + "\" y=\"" + num(margin_top + plot_h + 16.0) +
           "\" text-anchor=\"middle\">" + label + "</text>\n";
  }
  for (double y = opts.y_min; y <= opts.y_max + 1e-9; y += y_step) {
    const std::string py = num(sy(y));
    out += "<line x1=\"" + num(margin_left) + "\" y1=\"" + py + "\" x2=\"" +
           num(margin_left + plot_w) + "\" y2=\"" + py +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    char label[32];
    std::snprintf(label, sizeof(label), "%.1f", y);
    out += "<text x=\"" + num(margin_left - 8.0) + "\" y=\"" + num(sy(y) + 4.0) +
           "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  out += "</g>\n";

  // axes
  out += "<line x1=\"" + num(margin_left) + "\" y1=\"" + num(margin_top) +
         "\" x2=\"" + num(margin_left) + "\" y2=\"" + num(margin_top + plot_h) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + num(margin_left) + "\" y1=\"" + num(margin_top + plot_h) +
         "\" x2=\"" + num(margin_left + plot_w) + "\" y2=\"" +
         num(margin_top + plot_h) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  if (!opts.x_label.empty())
    out += "<text x=\"" + num(margin_left + plot_w / 2.0) + "\" y=\"" +
           num(opts.height - 14.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">" +
           escape(opts.x_label) + "</text>\n";
  if (!opts.y_label.empty())
    out += "<text x=\"18\" y=\"" + num(margin_top + plot_h / 2.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18 " +
           num(margin_top + plot_h / 2.0) + ")\">" +
           escape(opts.y_label) + "</text>\n";

  // series
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color =
        svg_detail::kPalette[s % static_cast<std::size_t>(svg_detail::kPaletteSize)];
    std::string points;
    for (const auto& [x, y] : series[s].points) {
      if (!points.empty()) points += ' ';
      points += num(sx(x)) + "," + num(sy(y));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.8\" points=\"" + points + "\"/>\n";
  }

  // legend
  const double legend_x = margin_left + plot_w + 18.0;
  double legend_y = margin_top + 10.0;
  out += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#111111\">\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color =
        svg_detail::kPalette[s % static_cast<std::size_t>(svg_detail::kPaletteSize)];
    out += "<line x1=\"" + num(legend_x) + "\" y1=\"" + num(legend_y - 4.0) +
           "\" x2=\"" + num(legend_x + 22.0) + "\" y2=\"" + num(legend_y - 4.0) +
           "\" stroke=\"" + color + "\" stroke-width=\"2.5\"/>\n";
    out += "<text x=\"" + num(legend_x + 28.0) + "\" y=\"" + num(legend_y) +
           "\">" + escape(series[s].label) + "</text>\n";
    legend_y += 20.0;
  }
  out += "</g>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace multires

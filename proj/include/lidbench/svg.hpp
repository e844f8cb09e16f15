// SPDX-License-Identifier: Apache-2.0
//
// Standalone SVG 1.1 charts: recall/QPS tradeoff, LID ridgelines, per-query
// recall distributions, and recall-vs-LID density. Output is a pure function
// of the inputs.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lidbench/bench.hpp"
#include "lidbench/lid.hpp"

namespace lidbench {

namespace svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* color(std::size_t i) {
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};
  return palette[i % (sizeof palette / sizeof *palette)];
}

class Document {
 public:
  Document(double width, double height) : width_(width), height_(height) {}

  void raw(const std::string& s) { body_ += s + "\n"; }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            std::string_view cls = "", double width = 1.0) {
    body_ += "<line" + cls_attr(cls) + " x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" +
             num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + std::string(stroke) +
             "\" stroke-width=\"" + num(width) + "\"/>\n";
  }

  void rect(double x, double y, double w, double h, std::string_view fill, double opacity = 1.0,
            std::string_view cls = "", const std::string& extra = "") {
    body_ += "<rect" + cls_attr(cls) + " x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(w) + "\" height=\"" + num(h) + "\" fill=\"" + std::string(fill) +
             "\" fill-opacity=\"" + num(opacity) + "\"" + extra + "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke,
                std::string_view cls = "", const std::string& extra = "") {
    std::string p;
    for (const auto& [x, y] : pts) p += (p.empty() ? "" : " ") + num(x) + "," + num(y);
    body_ += "<polyline" + cls_attr(cls) + " points=\"" + p + "\" fill=\"none\" stroke=\"" +
             std::string(stroke) + "\" stroke-width=\"1.5\"" + extra + "/>\n";
  }

  void path(const std::string& d, std::string_view fill, std::string_view stroke,
            std::string_view cls = "") {
    body_ += "<path" + cls_attr(cls) + " d=\"" + d + "\" fill=\"" + std::string(fill) +
             "\" fill-opacity=\"0.5\" stroke=\"" + std::string(stroke) + "\"/>\n";
  }

  void circle(double cx, double cy, double r, std::string_view fill, std::string_view cls = "") {
    body_ += "<circle" + cls_attr(cls) + " cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" +
             num(r) + "\" fill=\"" + std::string(fill) + "\"/>\n";
  }

  void text(double x, double y, std::string_view s, std::string_view anchor = "start",
            std::string_view cls = "", double size = 11) {
    body_ += "<text" + cls_attr(cls) + " x=\"" + num(x) + "\" y=\"" + num(y) +
             "\" font-family=\"sans-serif\" font-size=\"" + num(size) + "\" text-anchor=\"" +
             std::string(anchor) + "\">" + escape(s) + "</text>\n";
  }

  void open_group(std::string_view cls, const std::string& attrs = "") {
    body_ += "<g" + cls_attr(cls) + attrs + ">\n";
  }
  void close_group() { body_ += "</g>\n"; }

  std::string str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           num(width_) + "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " +
           num(height_) + "\">\n<rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" +
           num(height_) + "\" fill=\"white\"/>\n" + body_ + "</svg>\n";
  }

 private:
  static std::string cls_attr(std::string_view cls) {
    return cls.empty() ? "" : " class=\"" + std::string(cls) + "\"";
  }

  double width_, height_;
  std::string body_;
};

struct Frame {
  double left = 70, top = 30, width = 460, height = 380;
  double right() const { return left + width; }
  double bottom() const { return top + height; }
};

/// Log10 axis spanning whole decades around [lo, hi].
struct LogAxis {
  int lo_exp = 0;
  int hi_exp = 1;

  static LogAxis covering(double lo, double hi) {
    LogAxis a;
    a.lo_exp = int(std::floor(std::log10(std::max(lo, 1e-12))));
    a.hi_exp = int(std::ceil(std::log10(std::max(hi, 1e-12))));
    if (a.hi_exp <= a.lo_exp) a.hi_exp = a.lo_exp + 1;
    return a;
  }

  double fraction(double v) const {
    return (std::log10(std::max(v, 1e-12)) - lo_exp) / double(hi_exp - lo_exp);
  }
};

inline void draw_axes(Document& doc, const Frame& f, std::string_view xlabel,
                      std::string_view ylabel) {
  doc.line(f.left, f.bottom(), f.right(), f.bottom(), "black", "axis");
  doc.line(f.left, f.top, f.left, f.bottom(), "black", "axis");
  doc.text(f.left + f.width / 2, f.bottom() + 38, xlabel, "middle", "xlabel", 12);
  doc.raw("<text class=\"ylabel\" x=\"" + num(18) + "\" y=\"" + num(f.top + f.height / 2) +
          "\" font-family=\"sans-serif\" font-size=\"12.00\" text-anchor=\"middle\" "
          "transform=\"rotate(-90 18.00 " + num(f.top + f.height / 2) + ")\">" + escape(ylabel) +
          "</text>");
}

inline void draw_recall_ticks(Document& doc, const Frame& f) {
  for (int i = 0; i <= 10; i += 2) {
    const double x = f.left + f.width * i / 10.0;
    doc.line(x, f.bottom(), x, f.bottom() + 5, "black", "xtick");
    doc.text(x, f.bottom() + 18, num(i / 10.0).substr(0, 3), "middle");
  }
}

inline void draw_log_ticks(Document& doc, const Frame& f, const LogAxis& axis) {
  for (int e = axis.lo_exp; e <= axis.hi_exp; ++e) {
    const double y = f.bottom() - f.height * double(e - axis.lo_exp) / (axis.hi_exp - axis.lo_exp);
    doc.line(f.left - 5, y, f.left, y, "black", "ytick");
    doc.line(f.left, y, f.right(), y, "#dddddd", "grid", 0.5);
    char buf[32];
    std::snprintf(buf, sizeof buf, "1e%d", e);
    doc.raw("<text class=\"ytick-label\" data-power=\"" + std::to_string(e) + "\" x=\"" +
            num(f.left - 8) + "\" y=\"" + num(y + 4) +
            "\" font-family=\"sans-serif\" font-size=\"11.00\" text-anchor=\"end\">" + buf +
            "</text>");
  }
}

}  // namespace svg

/// Recall (linear, 0..1) vs QPS (log) with one polyline per algorithm through
/// that algorithm's Pareto frontier.
inline std::string plot_tradeoff(std::span<const RunResult> runs, std::string_view title = "") {
  if (runs.empty()) throw ValidationError("plot_tradeoff: no runs");
  std::map<std::string, std::vector<TradeoffPoint>> by_algo;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& r : runs) {
    by_algo[std::string(to_string(r.algorithm))].push_back({r.summary.avg_recall, r.summary.qps});
    lo = std::min(lo, r.summary.qps);
    hi = std::max(hi, r.summary.qps);
  }
  const svg::Frame f;
  const auto axis = svg::LogAxis::covering(lo, hi);
  svg::Document doc(680, 470);
  if (!title.empty()) doc.text(f.left + f.width / 2, 18, title, "middle", "title", 13);
  svg::draw_axes(doc, f, "Recall", "Queries per second (1/s)");
  svg::draw_recall_ticks(doc, f);
  svg::draw_log_ticks(doc, f, axis);

  std::size_t series = 0;
  for (const auto& [algo, points] : by_algo) {
    const auto frontier = pareto(points);
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : frontier)
      pts.emplace_back(f.left + f.width * p.recall, f.bottom() - f.height * axis.fraction(p.qps));
    const char* c = svg::color(series);
    doc.polyline(pts, c, "series", " data-algorithm=\"" + svg::escape(algo) + "\"");
    for (const auto& [x, y] : pts) doc.circle(x, y, 3, c, "point");
    const double ly = f.top + 14 + 18 * double(series);
    doc.line(f.right() + 14, ly - 4, f.right() + 34, ly - 4, c, "legend-swatch", 2);
    doc.text(f.right() + 40, ly, algo, "start", "legend");
    ++series;
  }
  return doc.str();
}

struct RidgeInput {
  std::string name;
  const LidProfile* profile = nullptr;
  double hard_threshold = std::numeric_limits<double>::quiet_NaN();
};

/// One smoothed LID density row per dataset with 25/50/75 percentile ticks and
/// a red marker at the hard-set threshold.
inline std::string plot_lid_ridgeline(std::span<const RidgeInput> rows, std::size_t bins = 60) {
  if (rows.empty()) throw ValidationError("plot_lid_ridgeline: no profiles");
  std::vector<LidSummary> summaries;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rows) {
    summaries.push_back(lid_summary(*r.profile, bins));
    lo = std::min(lo, summaries.back().min);
    hi = std::max(hi, summaries.back().max);
  }
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double row_h = 70;
  svg::Frame f;
  f.height = row_h * double(rows.size());
  svg::Document doc(680, f.bottom() + 60);
  svg::draw_axes(doc, f, "Estimated LID", "");
  for (int i = 0; i <= 5; ++i) {
    const double x = f.left + f.width * i / 5.0;
    doc.line(x, f.bottom(), x, f.bottom() + 5, "black", "xtick");
    doc.text(x, f.bottom() + 18, svg::num(lo + (hi - lo) * i / 5.0), "middle");
  }
  auto xpos = [&](double v) { return f.left + f.width * (v - lo) / (hi - lo); };
  static constexpr double kernel[] = {1, 2, 3, 2, 1};

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& profile = *rows[r].profile;
    std::vector<double> finite;
    for (std::size_t i = 0; i < profile.size(); ++i)
      if (profile.finite(i)) finite.push_back(profile.values[i]);
    const auto hist = make_histogram(finite, lo, hi, bins);
    std::vector<double> smooth(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b)
      for (int o = -2; o <= 2; ++o) {
        const auto j = std::ptrdiff_t(b) + o;
        if (j >= 0 && j < std::ptrdiff_t(bins)) smooth[b] += kernel[o + 2] * double(hist.counts[std::size_t(j)]) / 9.0;
      }
    const double peak = std::max(*std::max_element(smooth.begin(), smooth.end()), 1e-12);
    const double base = f.top + row_h * double(r + 1) - 6;
    std::string d = "M" + svg::num(f.left) + "," + svg::num(base);
    for (std::size_t b = 0; b < bins; ++b) {
      const double x = f.left + f.width * (double(b) + 0.5) / double(bins);
      d += " L" + svg::num(x) + "," + svg::num(base - (row_h - 12) * smooth[b] / peak);
    }
    d += " L" + svg::num(f.right()) + "," + svg::num(base) + " Z";
    doc.open_group("ridge", " data-name=\"" + svg::escape(rows[r].name) + "\"");
    doc.path(d, svg::color(r), "black", "density");
    const auto& s = summaries[r];
    const std::pair<const char*, double> marks[] = {{"25", s.p25}, {"50", s.median}, {"75", s.p75}};
    for (const auto& [label, v] : marks)
      doc.raw("<line class=\"percentile\" data-p=\"" + std::string(label) + "\" x1=\"" +
              svg::num(xpos(v)) + "\" y1=\"" + svg::num(base) + "\" x2=\"" + svg::num(xpos(v)) +
              "\" y2=\"" + svg::num(base - row_h * 0.5) + "\" stroke=\"black\" stroke-width=\"1.00\"/>");
    if (std::isfinite(rows[r].hard_threshold))
      doc.line(xpos(rows[r].hard_threshold), base, xpos(rows[r].hard_threshold),
               base - (row_h - 12), "red", "threshold", 2);
    doc.text(f.right() + 10, base - 4, rows[r].name, "start", "row-label");
    doc.close_group();
  }
  return doc.str();
}

/// Per configuration, the recall histogram drawn as a curve whose baseline
/// sits at the configuration's QPS, plus a marker at (avg recall, QPS). A
/// second panel shows the spread of per-query 1/latency at each average recall.
inline std::string plot_recall_distribution(std::span<const RunResult> runs,
                                            std::size_t bins = 20) {
  if (runs.empty()) throw ValidationError("plot_recall_distribution: no runs");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& r : runs) {
    lo = std::min(lo, r.summary.qps);
    hi = std::max(hi, r.summary.qps);
    for (double v : inverse_latencies(r)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const auto axis = svg::LogAxis::covering(lo, hi);
  svg::Frame top;
  top.height = 300;
  svg::Frame bottom = top;
  bottom.top = top.bottom() + 70;
  svg::Document doc(680, bottom.bottom() + 60);
  svg::draw_axes(doc, top, "Recall", "QPS (1/s)");
  svg::draw_recall_ticks(doc, top);
  svg::draw_log_ticks(doc, top, axis);
  svg::draw_axes(doc, bottom, "Average recall", "1 / query time (1/s)");
  svg::draw_recall_ticks(doc, bottom);
  svg::draw_log_ticks(doc, bottom, axis);
  const double curve_h = 40;

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const char* c = svg::color(i);
    const double baseline = top.bottom() - top.height * axis.fraction(r.summary.qps);
    const auto hist = recall_histogram(r, bins);
    const double m = double(r.records.size());
    std::vector<std::pair<double, double>> pts;
    for (std::size_t b = 0; b < bins; ++b)
      pts.emplace_back(top.left + top.width * (double(b) + 0.5) / double(bins),
                       baseline - curve_h * double(hist[b]) / m);
    doc.open_group("config", " data-qps=\"" + svg::num(r.summary.qps) + "\" data-algorithm=\"" +
                                 std::string(to_string(r.algorithm)) + "\"");
    doc.line(top.left, baseline, top.right(), baseline, c, "baseline", 0.5);
    doc.polyline(pts, c, "recall-curve");
    doc.circle(top.left + top.width * r.summary.avg_recall, baseline, 3.5, "black", "avg-marker");

    // inverse latency spread, as a vertical log-binned histogram
    const auto inv = inverse_latencies(r);
    std::vector<double> log_inv;
    for (double v : inv) log_inv.push_back(axis.fraction(v));
    const auto lh = make_histogram(log_inv, 0.0, 1.0, 40);
    const double x0 = bottom.left + bottom.width * r.summary.avg_recall;
    std::vector<std::pair<double, double>> lpts;
    for (std::size_t b = 0; b < lh.counts.size(); ++b)
      lpts.emplace_back(x0 + 30 * double(lh.counts[b]) / m,
                        bottom.bottom() - bottom.height * (double(b) + 0.5) / 40.0);
    doc.polyline(lpts, c, "latency-curve");
    doc.circle(x0, bottom.bottom() - bottom.height * axis.fraction(r.summary.qps), 3.5, "black",
               "avg-marker-bottom");
    doc.close_group();
  }
  return doc.str();
}

/// Density of (query LID, recall) with marginal histograms: LID on top,
/// recall on the right.
inline std::string plot_recall_vs_lid(const RunResult& run, const LidProfile& profile,
                                      std::size_t x_bins = 30, std::size_t y_bins = 20) {
  const auto g = recall_vs_lid_bins(run, profile, x_bins, y_bins);
  svg::Frame f;
  f.top = 110;
  f.height = 320;
  f.width = 400;
  svg::Document doc(680, f.bottom() + 60);
  svg::draw_axes(doc, f, "Estimated LID", "Recall");
  const double cw = f.width / double(x_bins), ch = f.height / double(y_bins);
  for (int i = 0; i <= 5; ++i) {
    const double x = f.left + f.width * i / 5.0;
    doc.line(x, f.bottom(), x, f.bottom() + 5, "black", "xtick");
    doc.text(x, f.bottom() + 18, svg::num(g.lid_lo + (g.lid_hi - g.lid_lo) * i / 5.0), "middle");
    const double y = f.bottom() - f.height * i / 5.0;
    doc.line(f.left - 5, y, f.left, y, "black", "ytick");
    doc.text(f.left - 8, y + 4, svg::num(i / 5.0).substr(0, 3), "end");
  }
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(g.counts.begin(), g.counts.end()));
  for (std::size_t x = 0; x < x_bins; ++x)
    for (std::size_t y = 0; y < y_bins; ++y) {
      const auto c = g.at(x, y);
      if (c == 0) continue;
      doc.rect(f.left + cw * double(x), f.bottom() - ch * double(y + 1), cw, ch, "#08306b",
               0.15 + 0.85 * double(c) / double(peak), "cell",
               " data-count=\"" + std::to_string(c) + "\"");
    }
  const std::size_t lid_peak =
      std::max<std::size_t>(1, *std::max_element(g.lid_marginal.begin(), g.lid_marginal.end()));
  for (std::size_t x = 0; x < x_bins; ++x) {
    const double h = 70.0 * double(g.lid_marginal[x]) / double(lid_peak);
    doc.rect(f.left + cw * double(x), f.top - 8 - h, cw, h, "#4292c6", 1.0, "lid-bar",
             " data-count=\"" + std::to_string(g.lid_marginal[x]) + "\"");
  }
  const std::size_t rec_peak =
      std::max<std::size_t>(1, *std::max_element(g.recall_marginal.begin(), g.recall_marginal.end()));
  for (std::size_t y = 0; y < y_bins; ++y) {
    const double w = 90.0 * double(g.recall_marginal[y]) / double(rec_peak);
    doc.rect(f.right() + 8, f.bottom() - ch * double(y + 1), w, ch, "#4292c6", 1.0, "recall-bar",
             " data-count=\"" + std::to_string(g.recall_marginal[y]) + "\"");
  }
  return doc.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = detail::open_for_write(path);
  out << text;
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

}  // namespace lidbench

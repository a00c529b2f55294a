#include "weakmeas/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace weakmeas::cli {

namespace {

constexpr int kColumns = 10;

void put(std::string& out, const std::optional<double>& v) {
  if (!v) return;
  if (!std::isfinite(*v)) throw std::invalid_argument("CSV rows must hold finite values");
  out += format_number(*v);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": bad number '" + field +
                                "'");
  }
  return value;
}

std::optional<double> parse_optional(const std::string& field, std::size_t line_no) {
  if (field.empty()) return std::nullopt;
  return parse_double(field, line_no);
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << contents;
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

// ---- SVG ----

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string escape_xml(const std::string& s) {
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

Chart build_chart(const std::vector<SweepRow>& rows, Mode mode) {
  Chart chart;
  auto add = [](Series& s, double x, const std::optional<double>& y) {
    if (y) s.points.emplace_back(x, *y);
  };
  switch (mode) {
    case Mode::SweepG: {
      chart.title = "Estimator vs coupling strength";
      chart.x_label = "g";
      chart.y_label = "estimator (real part)";
      std::map<double, std::size_t> by_theta;
      for (const auto& row : rows) {
        if (!by_theta.count(row.theta)) {
          by_theta[row.theta] = chart.series.size();
          chart.series.push_back({"theta = " + format_number(row.theta, 4), {}, false});
          chart.series.push_back({"prediction, theta = " + format_number(row.theta, 4), {}, true});
        }
        const std::size_t i = by_theta[row.theta];
        add(chart.series[i], row.g, row.estimator_real);
        add(chart.series[i + 1], row.g, row.finite_g_prediction);
      }
      break;
    }
    case Mode::SweepTheta: {
      chart.title = "Estimator vs pre-selection angle";
      chart.x_label = "theta (rad)";
      chart.y_label = "estimator (real part)";
      chart.series = {{"estimator", {}, false}, {"prediction", {}, true}};
      for (const auto& row : rows) {
        add(chart.series[0], row.theta, row.estimator_real);
        add(chart.series[1], row.theta, row.finite_g_prediction);
      }
      break;
    }
    case Mode::SweepAlpha: {
      chart.title = "Complex weak value vs observable angle";
      chart.x_label = "alpha (rad)";
      chart.y_label = "estimator";
      chart.series = {{"real part", {}, false}, {"imaginary part", {}, false}};
      for (const auto& row : rows) {
        add(chart.series[0], row.alpha, row.estimator_real);
        add(chart.series[1], row.alpha, row.estimator_imag);
      }
      break;
    }
    case Mode::Single:
    case Mode::Grape: {
      chart.title = "Single measurement";
      chart.x_label = "g";
      chart.y_label = "estimator";
      chart.series = {{"real part", {}, false}, {"imaginary part", {}, false}};
      for (const auto& row : rows) {
        add(chart.series[0], row.g, row.estimator_real);
        add(chart.series[1], row.g, row.estimator_imag);
      }
      break;
    }
  }
  std::erase_if(chart.series, [](const Series& s) { return s.points.empty(); });
  return chart;
}

std::vector<double> ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= target) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return out;
}

}  // namespace

const std::string& csv_header() {
  static const std::string header =
      "g,theta,alpha,estimator_real,estimator_imag,p0,weak_value_real,weak_value_imag,"
      "finite_g_prediction,pathway";
  return header;
}

std::string format_number(double value, int significant_digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general,
                                 significant_digits);
  if (res.ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, res.ptr);
}

std::string format_csv(const std::vector<SweepRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const auto& row : rows) {
    if (row.pathway.find_first_of(",\n\r\"") != std::string::npos) {
      throw std::invalid_argument("pathway tag must not contain CSV delimiters");
    }
    put(out, row.g);
    out += ',';
    put(out, row.theta);
    out += ',';
    put(out, row.alpha);
    out += ',';
    put(out, row.estimator_real);
    out += ',';
    put(out, row.estimator_imag);
    out += ',';
    put(out, row.p0);
    out += ',';
    put(out, row.weak_value_real);
    out += ',';
    put(out, row.weak_value_imag);
    out += ',';
    put(out, row.finite_g_prediction);
    out += ',';
    out += row.pathway;
    out += '\n';
  }
  return out;
}

std::vector<SweepRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) {
    throw std::invalid_argument("CSV: missing or unexpected header");
  }
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != kColumns) {
      throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(kColumns) + " fields");
    }
    SweepRow row;
    row.g = parse_double(f[0], line_no);
    row.theta = parse_double(f[1], line_no);
    row.alpha = parse_double(f[2], line_no);
    row.estimator_real = parse_optional(f[3], line_no);
    row.estimator_imag = parse_optional(f[4], line_no);
    row.p0 = parse_optional(f[5], line_no);
    row.weak_value_real = parse_optional(f[6], line_no);
    row.weak_value_imag = parse_optional(f[7], line_no);
    row.finite_g_prediction = parse_optional(f[8], line_no);
    row.pathway = f[9];
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  write_file(path, format_csv(rows));
}

std::vector<SweepRow> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string render_svg(const std::vector<SweepRow>& rows, Mode mode) {
  const Chart chart = build_chart(rows, mode);
  constexpr double width = 720.0;
  constexpr double height = 480.0;
  constexpr double left = 80.0;
  constexpr double right = 220.0;
  constexpr double top = 50.0;
  constexpr double bottom = 60.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool first = true;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        x_lo = x_hi = x;
        y_lo = y_hi = y;
        first = false;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  auto widen = [](double& lo, double& hi) {
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  };
  widen(x_lo, x_hi);
  widen(y_lo, y_hi);
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * plot_h; };
  auto num = [](double v) { return format_number(v, 6); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  std::ostringstream svg;
  svg.imbue(std::locale::classic());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-size=\"16\">" << escape_xml(chart.title) << "</text>\n";
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticks(x_lo, x_hi, 6)) {
    svg << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
        << num(px(t)) << "\" y2=\"" << num(top + plot_h + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + plot_h + 18)
        << "\" text-anchor=\"middle\">" << format_number(t, 4) << "</text>\n";
  }
  for (double t : ticks(y_lo, y_hi, 6)) {
    svg << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(t) + 4)
        << "\" text-anchor=\"end\">" << format_number(t, 4) << "</text>\n";
  }
  svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 15)
      << "\" text-anchor=\"middle\">" << escape_xml(chart.x_label) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 20 " << num(top + plot_h / 2) << ")\">"
      << escape_xml(chart.y_label) << "</text>\n";

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const Series& s = chart.series[i];
    // Dashed predictions share their measured series' colour.
    const std::size_t colour = (mode == Mode::SweepG || mode == Mode::SweepTheta) ? i / 2 : i;
    const char* stroke = palette[colour % std::size(palette)];
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"";
    if (s.dashed) svg << " stroke-dasharray=\"5,4\"";
    svg << " points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      if (k) svg << ' ';
      svg << num(px(s.points[k].first)) << ',' << num(py(s.points[k].second));
    }
    svg << "\"/>\n";
    if (!s.dashed) {
      for (const auto& [x, y] : s.points) {
        svg << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"2.5\" fill=\""
            << stroke << "\"/>\n";
      }
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << num(left + plot_w + 15) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(left + plot_w + 40) << "\" y2=\"" << num(ly) << "\" stroke=\"" << stroke
        << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
    svg << "<text x=\"" << num(left + plot_w + 46) << "\" y=\"" << num(ly + 4) << "\">"
        << escape_xml(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg(const std::vector<SweepRow>& rows, const std::string& path, Mode mode) {
  if (rows.empty()) throw std::invalid_argument("emit_svg: no rows");
  write_file(path, render_svg(rows, mode));
}

}  // namespace weakmeas::cli

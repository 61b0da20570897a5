#include "semcom/svg_plot.hpp"

#include "semcom/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace semcom::plot {
namespace {

constexpr int kWidth = 720, kHeight = 480;
constexpr int kMarginLeft = 70, kMarginRight = 150, kMarginTop = 40,
              kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range data_range(const std::vector<Series>& series, bool y_axis, bool log_y) {
  Range r{std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      double v = y_axis ? y : x;
      if (y_axis && log_y && v <= 0.0) continue;
      if (!std::isfinite(v)) continue;
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  }
  if (!std::isfinite(r.lo)) return {0.0, 1.0};
  if (r.lo == r.hi) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

std::string chart(const std::string& title, const std::string& x_label,
                  const std::string& y_label,
                  const std::vector<Series>& series, bool log_y,
                  bool lines) {
  const Range xr = data_range(series, false, false);
  Range yr = data_range(series, true, log_y);
  if (log_y) {
    yr.lo = std::log10(yr.lo);
    yr.hi = std::log10(yr.hi);
    if (yr.lo == yr.hi) {
      yr.lo -= 0.5;
      yr.hi += 0.5;
    }
  } else {
    const double pad = 0.05 * (yr.hi - yr.lo);
    yr.lo -= pad;
    yr.hi += pad;
  }
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) {
    return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w;
  };
  auto sy = [&](double y) {
    const double v = log_y ? std::log10(y) : y;
    return kMarginTop + (1.0 - (v - yr.lo) / (yr.hi - yr.lo)) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-size=\"15\">"
      << title << "</text>\n";

  // axes
  svg << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop
      << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double tx = xr.lo + (xr.hi - xr.lo) * i / n_ticks;
    svg << "<line x1=\"" << sx(tx) << "\" y1=\"" << kMarginTop + plot_h
        << "\" x2=\"" << sx(tx) << "\" y2=\"" << kMarginTop + plot_h + 5
        << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << sx(tx) << "\" y=\"" << kMarginTop + plot_h + 20
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(tx)
        << "</text>\n";
    const double tv = yr.lo + (yr.hi - yr.lo) * i / n_ticks;
    const double ty = kMarginTop + (1.0 - double(i) / n_ticks) * plot_h;
    svg << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << ty << "\" x2=\""
        << kMarginLeft << "\" y2=\"" << ty << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << ty + 4
        << "\" text-anchor=\"end\" font-size=\"11\">"
        << fmt(log_y ? std::pow(10.0, tv) : tv) << "</text>\n";
  }
  svg << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\""
      << kHeight - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << x_label << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    if (lines && series[s].points.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, y] : series[s].points)
        svg << fmt(sx(x)) << ',' << fmt(sy(y)) << ' ';
      svg << "\"/>\n";
    }
    for (const auto& [x, y] : series[s].points)
      svg << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y))
          << "\" r=\"" << (lines ? 3.5 : 2.5) << "\" fill=\"" << color
          << "\"/>\n";
    // legend
    const double ly = kMarginTop + 16.0 * double(s);
    svg << "<rect x=\"" << kWidth - kMarginRight + 12 << "\" y=\"" << ly
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << kWidth - kMarginRight + 30 << "\" y=\"" << ly + 10
        << "\" font-size=\"12\">" << series[s].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

} // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series, bool log_y) {
  return chart(title, x_label, y_label, series, log_y, true);
}

std::string scatter_chart(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<Series>& series) {
  return chart(title, x_label, y_label, series, false, false);
}

PlotKind plot_kind_from_name(const std::string& name) {
  if (name == "kpe") return PlotKind::kpe;
  if (name == "p2point") return PlotKind::p2point;
  if (name == "latency") return PlotKind::latency;
  if (name == "scatter_denoise") return PlotKind::scatter_denoise;
  throw std::invalid_argument("unknown plot kind: " + name);
}

namespace {

std::vector<Series> scatter_series_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "series,x,y")
    throw std::runtime_error(
        "csv parse error: row 1: expected header series,x,y");
  std::map<std::string, Series> by_name;
  std::vector<std::string> order;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, xs, ys;
    if (!std::getline(ls, name, ',') || !std::getline(ls, xs, ',') ||
        !std::getline(ls, ys, ','))
      throw std::runtime_error("csv parse error: row " + std::to_string(row) +
                               ": expected series,x,y");
    double x, y;
    try {
      x = std::stod(xs);
      y = std::stod(ys);
    } catch (const std::exception&) {
      throw std::runtime_error("csv parse error: row " + std::to_string(row) +
                               ", column x/y: not a number");
    }
    if (!by_name.count(name)) order.push_back(name);
    by_name[name].label = name;
    by_name[name].points.push_back({x, y});
  }
  std::vector<Series> series;
  for (const auto& name : order) series.push_back(by_name[name]);
  return series;
}

double metric_of(const harness::RunRecord& r, PlotKind kind) {
  switch (kind) {
    case PlotKind::kpe: return r.report.kpe_px;
    case PlotKind::p2point: return r.report.p2point_m;
    case PlotKind::latency: return r.report.latency.total;
    default: return 0.0;
  }
}

const char* metric_label(PlotKind kind) {
  switch (kind) {
    case PlotKind::kpe: return "KPE (px)";
    case PlotKind::p2point: return "P2Point (m)";
    case PlotKind::latency: return "latency (s)";
    default: return "";
  }
}

} // namespace

std::vector<std::string> plot_emit(const std::string& csv_path, PlotKind kind,
                                   const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;

  if (kind == PlotKind::scatter_denoise) {
    const auto series = scatter_series_from_csv(csv_path);
    if (series.empty())
      throw std::runtime_error("no points to plot in " + csv_path);
    const std::string path = out_dir + "/scatter_denoise.svg";
    std::ofstream out(path);
    out << scatter_chart("keypoint denoising", "u (px)", "v (px)", series);
    written.push_back(path);
    return written;
  }

  const auto records = harness::records_from_csv_file(csv_path);
  std::set<std::string> channels;
  for (const auto& r : records)
    if (r.ok()) channels.insert(channel::channel_kind_name(r.channel_kind));
  if (channels.empty())
    throw std::runtime_error("no successful rows to plot in " + csv_path);

  for (const auto& ch : channels) {
    // median metric per (framework, snr)
    std::map<std::string, std::map<double, std::vector<double>>> cells;
    for (const auto& r : records) {
      if (!r.ok() || channel::channel_kind_name(r.channel_kind) != ch)
        continue;
      cells[scene::framework_name(r.framework)][r.snr_db].push_back(
          metric_of(r, kind));
    }
    std::vector<Series> series;
    for (auto& [fw, by_snr] : cells) {
      Series s;
      s.label = fw;
      for (auto& [snr, vals] : by_snr) {
        std::sort(vals.begin(), vals.end());
        const std::size_t n = vals.size();
        const double median = n % 2 ? vals[n / 2]
                                    : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
        s.points.push_back({snr, median});
      }
      series.push_back(std::move(s));
    }
    std::string kind_name = metric_label(kind);
    kind_name = kind_name.substr(0, kind_name.find(' '));
    std::string lower;
    for (char c : kind_name) lower += char(std::tolower(c));
    const std::string path = out_dir + "/" + lower + "_" + ch + ".svg";
    std::ofstream out(path);
    out << line_chart(lower + " vs SNR (" + ch + ")", "SNR (dB)",
                      metric_label(kind), series,
                      kind == PlotKind::kpe || kind == PlotKind::p2point);
    written.push_back(path);
  }
  return written;
}

} // namespace semcom::plot

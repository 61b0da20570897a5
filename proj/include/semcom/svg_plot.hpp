#pragma once

#include <string>
#include <vector>

namespace semcom::plot {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Minimal static SVG line chart: one polyline per series, linear axes,
/// legend in the top-right corner.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series, bool log_y = false);

/// Marker-only variant for the denoising scatter overlays.
std::string scatter_chart(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<Series>& series);

enum class PlotKind { kpe, p2point, latency, scatter_denoise };
PlotKind plot_kind_from_name(const std::string& name);

/// kpe/p2point/latency read a sweep rows CSV and write one SVG per channel
/// (metric vs SNR, one series per framework). scatter_denoise reads a
/// "series,x,y" point CSV and writes a single overlay. Returns the written
/// paths; an empty selection is an error and writes nothing.
std::vector<std::string> plot_emit(const std::string& csv_path, PlotKind kind,
                                   const std::string& out_dir);

} // namespace semcom::plot

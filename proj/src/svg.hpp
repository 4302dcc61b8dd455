#pragma once

#include <string>
#include <vector>

namespace abcmc::svg {

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  double dx = 0.0;  // half-width of the x error bar
  double dy = 0.0;
  std::string series;
};

/// Log-log scatter with error bars, one color per series. Points with
/// nonpositive coordinates are dropped (log axes).
void write_scatter(const std::string& path, const std::vector<ScatterPoint>& points,
                   const std::string& x_label, const std::string& y_label,
                   const std::string& title);

struct HeatCell {
  double row_value = 0.0;  // e.g. alpha
  double col_value = 0.0;  // e.g. p_acc_min
  double value = 0.0;
};

/// Row-value by column-value grid, each cell colored by value on a log color
/// scale and labelled with the value.
void write_heatmap(const std::string& path, const std::vector<HeatCell>& cells,
                   const std::string& row_label, const std::string& col_label,
                   const std::string& title);

}  // namespace abcmc::svg

#pragma once

#include <string>
#include <vector>

#include "eegx/extremal.hpp"

namespace eegx::cli {

struct LineSeries {
  std::string label;
  std::vector<double> y;  ///< NaN points break the line
};

/// Line chart with labelled axes; every series shares `x`.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<double>& x,
                           const std::vector<LineSeries>& series);

/// Channel-by-channel heatmap of chi on a white-to-red scale; sparse pairs are grey.
std::string chi_heatmap_svg(const ChiMatrix& matrix, const std::string& title);

}  // namespace eegx::cli

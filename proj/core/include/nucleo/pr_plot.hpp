#pragma once

#include <string>
#include <vector>

#include "nucleo/metrics.hpp"

namespace nucleo {

// P-R table text format: header "threshold precision recall", one point per
// line with 6 fractional digits.
std::string pr_table_to_text(const std::vector<PrPoint>& points);
std::vector<PrPoint> pr_table_from_text(const std::string& text);

// Resamples onto `n` evenly spaced recall values in [0, 1] using the usual
// interpolated precision max{p_j : r_j >= r}; recall cells carry the grid
// value, thresholds the smallest achieving one.
std::vector<PrPoint> resample_pr(const std::vector<PrPoint>& points, int n = 101);

// Renders the curve into an RGB PNG (axes, gridlines, polyline).
void render_pr_curve_png(const std::string& path, const std::vector<PrPoint>& points,
                         int size = 512);

// Best F1 over the curve points; returns the index into `points`.
std::size_t best_f1_index(const std::vector<PrPoint>& points);
double f1_of(const PrPoint& p);

} // namespace nucleo

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mta {

/// Equal-width histogram over [lo, hi]. Bin k covers [lo + k w, lo + (k+1) w);
/// the last bin also takes hi. Constant input yields a single bin of width 0.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
};

Histogram make_histogram(std::span<const double> values, std::size_t n_bins);

/// Self-contained SVG panel: histogram bars, the central 95% interval shaded,
/// axis ticks and labels. Needs at least two finite values.
std::string render_density_svg(std::span<const double> values, const std::string& label,
                               std::size_t n_bins = 30);

}  // namespace mta

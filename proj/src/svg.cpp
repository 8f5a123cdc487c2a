#include "mta/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mta/diagnostics.hpp"
#include "mta/errors.hpp"

namespace mta {

namespace {

constexpr double kWidth = 480.0;
constexpr double kHeight = 300.0;
constexpr double kLeft = 56.0;
constexpr double kRight = 16.0;
constexpr double kTop = 28.0;
constexpr double kBottom = 48.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

Histogram make_histogram(std::span<const double> values, std::size_t n_bins) {
  if (values.empty()) throw InvalidInput("histogram of no values");
  if (n_bins == 0) throw InvalidInput("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  Histogram h;
  h.lo = *lo_it;
  h.hi = *hi_it;
  if (h.lo == h.hi) {
    h.counts.assign(1, values.size());
    return h;
  }
  h.counts.assign(n_bins, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(n_bins);
  for (double v : values) {
    auto k = static_cast<std::size_t>(std::floor((v - h.lo) / width));
    if (k >= n_bins) k = n_bins - 1;
    ++h.counts[k];
  }
  return h;
}

std::string render_density_svg(std::span<const double> values, const std::string& label,
                               std::size_t n_bins) {
  if (values.size() < 2) throw Unsupported("density plot needs at least two values");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("density plot values must be finite");
  }
  const Histogram h = make_histogram(values, n_bins);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double q025 = quantile_sorted(sorted, 0.025);
  const double q975 = quantile_sorted(sorted, 0.975);

  // A constant sample is drawn as one spike centred in a unit-wide axis.
  const bool spike = h.lo == h.hi;
  const double axis_lo = spike ? h.lo - 0.5 : h.lo;
  const double axis_hi = spike ? h.hi + 0.5 : h.hi;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto x_of = [&](double v) { return kLeft + (v - axis_lo) / (axis_hi - axis_lo) * plot_w; };
  const std::size_t peak = *std::max_element(h.counts.begin(), h.counts.end());
  const auto y_of = [&](std::size_t count) {
    return kTop + plot_h - static_cast<double>(count) / static_cast<double>(peak) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "  <title>" << escape_xml(label) << "</title>\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";

  // Central 95% interval.
  const double band_lo = x_of(q025);
  const double band_w = std::max(x_of(q975) - band_lo, 1.0);
  svg << "  <rect class=\"interval95\" x=\"" << num(band_lo) << "\" y=\"" << num(kTop)
      << "\" width=\"" << num(band_w) << "\" height=\"" << num(plot_h)
      << "\" fill=\"#9ecae1\" fill-opacity=\"0.35\"/>\n";

  svg << "  <g class=\"bins\" fill=\"#3182bd\">\n";
  if (spike) {
    const double x = x_of(h.lo);
    svg << "    <rect x=\"" << num(x - 1.5) << "\" y=\"" << num(kTop) << "\" width=\"3.00\" height=\""
        << num(plot_h) << "\" data-count=\"" << h.counts[0] << "\"/>\n";
  } else {
    const double bin_w = plot_w / static_cast<double>(h.counts.size());
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      const double top = y_of(h.counts[k]);
      svg << "    <rect x=\"" << num(kLeft + static_cast<double>(k) * bin_w) << "\" y=\""
          << num(top) << "\" width=\"" << num(bin_w) << "\" height=\""
          << num(kTop + plot_h - top) << "\" data-count=\"" << h.counts[k] << "\"/>\n";
    }
  }
  svg << "  </g>\n";

  // Axes.
  const double base_y = kTop + plot_h;
  svg << "  <g stroke=\"black\" stroke-width=\"1\">\n"
      << "    <line x1=\"" << num(kLeft) << "\" y1=\"" << num(base_y) << "\" x2=\""
      << num(kLeft + plot_w) << "\" y2=\"" << num(base_y) << "\"/>\n"
      << "    <line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(base_y) << "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = kLeft + plot_w * i / 4.0;
    svg << "    <line x1=\"" << num(x) << "\" y1=\"" << num(base_y) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(base_y + 4) << "\"/>\n";
  }
  svg << "  </g>\n";
  svg << "  <g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = kLeft + plot_w * i / 4.0;
    const double v = axis_lo + (axis_hi - axis_lo) * i / 4.0;
    svg << "    <text x=\"" << num(x) << "\" y=\"" << num(base_y + 16) << "\">" << tick(v)
        << "</text>\n";
  }
  svg << "    <text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 10) << "\">"
      << escape_xml(label) << "</text>\n";
  svg << "    <text x=\"14\" y=\"" << num(kTop + plot_h / 2) << "\" transform=\"rotate(-90 14 "
      << num(kTop + plot_h / 2) << ")\">count</text>\n";
  svg << "    <text x=\"" << num(kWidth / 2) << "\" y=\"18\">" << escape_xml(label)
      << "  95% interval [" << tick(q025) << ", " << tick(q975) << "]</text>\n";
  svg << "  </g>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mta

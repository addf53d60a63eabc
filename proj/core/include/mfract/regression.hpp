#pragma once

#include <span>

namespace mfract {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;  // x or y has zero spread
};

// Ordinary least squares y = slope * x + intercept. Coordinates are centered
// before accumulation. Requires x.size() == y.size() >= 2.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace mfract

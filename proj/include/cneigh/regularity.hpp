#pragma once

#include "cneigh/common.hpp"

#include <optional>
#include <vector>

namespace cneigh {

/// One discretely observed curve on [0,1]: design points and values.
struct Curve {
    VectorX<double> t;
    VectorX<double> x;
};

using CurveSet = std::vector<Curve>;

struct RegularityEstimate {
    std::vector<double> t_grid;
    std::vector<double> H;
    std::vector<double> L;
    double H_min = 0.0;
    double beta = 0.0;
    double delta = 0.0;
};

/// 8 x the median spacing between consecutive design points of a curve.
double default_regularity_spacing(const CurveSet& curves);

/// Equispaced grid of `n` points in [lo, hi].
std::vector<double> regularity_grid(double lo, double hi, int n);

/// Local Hölder exponent and constant from the mean squared increments
/// theta(t, a) = mean_i |X_i(t + a/2) - X_i(t - a/2)|^2 at a = delta and 2 delta:
///   H_t = log(theta(t, 2 delta) / theta(t, delta)) / (2 log 2), clamped to [0.01, 0.99],
///   L_t = sqrt(theta(t, delta) / delta^{2 H_t}).
/// Values at t +- a/2 are read off each curve's linear interpolant (curves
/// with a gap wider than a/2 at either end are skipped); windows that cross
/// the observed range of a curve are shifted inside it. `target_M` feeds select_beta (defaults to
/// the mean curve size). Noise in the observations biases H downwards.
RegularityEstimate estimate_local_regularity(const CurveSet& curves, const std::vector<double>& t_grid,
                                             std::optional<double> delta = std::nullopt,
                                             std::optional<double> target_M = std::nullopt);

/// beta = H_min - 1 / log^2(M), floored at 0.01 (natural log).
double select_beta(double H_min, double M);

} // namespace cneigh

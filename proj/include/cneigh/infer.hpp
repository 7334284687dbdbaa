#pragma once

#include "cneigh/integrate.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace cneigh {

enum class IntervalMethod { SubsamplePi, CltCiConditional, CltCiLimit, MeanClt };

const char* to_string(IntervalMethod m) noexcept;

struct IntervalEstimate {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    IntervalMethod method = IntervalMethod::SubsamplePi;
    std::map<std::string, double> meta;

    double length() const noexcept { return upper - lower; }
    bool covers(double truth) const noexcept { return lower <= truth && truth <= upper; }
};

/// Any integration rule applied to a (sub)design and its values.
using Estimator = std::function<double(const IntegrandEvaluations<double>&)>;

Estimator control_estimator(WeightOptions opts = {});
Estimator control_nn_estimator(WeightOptions opts = {});
Estimator mean_estimator();
Estimator trapezoid_estimator();

struct SubsampleConfig {
    int B = 1000;
    /// Subsample size; floor(M/2) when unset.
    std::optional<Index> mstar;
    double beta = 1.0;
    std::uint64_t seed = 0;
    /// Overrides the scaling exponent 1/2 + beta/d, for competitor rules
    /// (1/2 for the sample mean, beta/d for the trapezoid).
    std::optional<double> rate_exponent;
    /// Suppress the beta > 1 diagnostic (the harness reports it once).
    bool quiet = false;
};

/// Sample quantile by linear interpolation between order statistics at
/// 1-based position h = (n-1)p + 1.
double empirical_quantile(std::span<const double> sample, double p);

/// Standard normal quantile.
double normal_quantile(double p);

/// Subsampling prediction interval for a noiseless integral estimate.
///
/// The full-sample estimate is recentred by the empirical quantiles of
/// (M*)^r (I_b - I) over B subsamples of size M* drawn without replacement,
/// rescaled by M^{-r}, r = 1/2 + beta/d. Replicate b uses its own random
/// stream keyed by (seed, b).
IntervalEstimate subsample_pi(const IntegrandEvaluations<double>& ev, const Estimator& estimator,
                              const SubsampleConfig& cfg, double delta);

enum class CltMode { Conditional, Limit1d };

/// Gaussian interval for a noisy integrand: I +- z_{1-delta/2} s_M with
/// s_M^2 = sum w_m^2 sigma_m^2 (conditional) or (5/2) M^{-1} mean(sigma^2)
/// (limit form on [0,1]).
IntervalEstimate clt_ci(const IntegrandEvaluations<double>& ev, const WeightSet<double>& w, double delta, CltMode mode);

/// Sample mean +- z_{1-delta/2} sd / sqrt(M), the textbook competitor.
IntervalEstimate mean_clt_interval(const IntegrandEvaluations<double>& ev, double delta);

} // namespace cneigh

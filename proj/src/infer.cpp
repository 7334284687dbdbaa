#include "cneigh/infer.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace cneigh {

const char* to_string(IntervalMethod m) noexcept
{
    switch (m) {
    case IntervalMethod::SubsamplePi:
        return "subsample-pi";
    case IntervalMethod::CltCiConditional:
        return "clt-ci-conditional";
    case IntervalMethod::CltCiLimit:
        return "clt-ci-limit";
    case IntervalMethod::MeanClt:
        return "mean-clt";
    }
    return "unknown";
}

Estimator control_estimator(WeightOptions opts)
{
    return [opts](const IntegrandEvaluations<double>& ev) { return integrate_control(ev, default_weights(ev.sample, opts)); };
}

Estimator control_nn_estimator(WeightOptions opts)
{
    return [opts](const IntegrandEvaluations<double>& ev) { return integrate_control(ev, control_weights_nn(ev.sample, opts)); };
}

Estimator mean_estimator()
{
    return [](const IntegrandEvaluations<double>& ev) { return integrate_mean(ev); };
}

Estimator trapezoid_estimator()
{
    return [](const IntegrandEvaluations<double>& ev) { return integrate_trapezoid(ev); };
}

double empirical_quantile(std::span<const double> sample, double p)
{
    if (sample.empty())
        throw Error("empirical quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0))
        throw Error("quantile level must lie in [0, 1]");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double h = static_cast<double>(s.size() - 1) * p; // 0-based
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return s[lo] + frac * (s[hi] - s[lo]);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw Error("normal quantile needs p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

namespace {

void check_delta(double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw Error("interval level 1 - delta must lie in (0, 1)");
}

} // namespace

IntervalEstimate subsample_pi(const IntegrandEvaluations<double>& ev, const Estimator& estimator,
                              const SubsampleConfig& cfg, double delta)
{
    check_delta(delta);
    if (ev.noisy)
        throw Error("subsampling prediction intervals need noiseless integrand values; use clt_ci");
    const Index M = ev.size();
    const Index mstar = cfg.mstar.value_or(M / 2);
    if (mstar >= M)
        throw Error("subsample size M* = " + std::to_string(mstar) + " must be < M = " + std::to_string(M));
    if (mstar < 1)
        throw Error("subsample size M* must be >= 1");
    if (cfg.B < 2)
        throw Error("subsampling needs B >= 2 replicates");
    if (!(cfg.beta > 0.0))
        throw Error("regularity beta must be > 0");
    if (cfg.beta > 1.0 && !cfg.quiet && !cfg.rate_exponent)
        warn("beta = " + std::to_string(cfg.beta) + " > 1 exceeds the range covered by the rate theory");

    const double d = static_cast<double>(ev.sample.dim());
    const double r = cfg.rate_exponent.value_or(0.5 + cfg.beta / d);
    const double full = estimator(ev);

    std::vector<Index> all(static_cast<std::size_t>(M));
    std::iota(all.begin(), all.end(), Index{0});
    std::vector<double> dev(static_cast<std::size_t>(cfg.B));
    const double up = std::pow(static_cast<double>(mstar), r);
    std::vector<Index> pick(static_cast<std::size_t>(mstar));
    for (int b = 0; b < cfg.B; ++b) {
        Rng rng = make_stream(cfg.seed, StreamRole::Subsample, static_cast<std::uint64_t>(b));
        std::sample(all.begin(), all.end(), pick.begin(), static_cast<std::size_t>(mstar), rng);
        dev[static_cast<std::size_t>(b)] = up * (estimator(ev.subset(pick)) - full);
    }

    const double down = std::pow(static_cast<double>(M), -r);
    IntervalEstimate iv;
    iv.point = full;
    iv.lower = full + down * empirical_quantile(dev, delta / 2.0);
    iv.upper = full + down * empirical_quantile(dev, 1.0 - delta / 2.0);
    iv.level = 1.0 - delta;
    iv.method = IntervalMethod::SubsamplePi;
    iv.meta = {{"B", static_cast<double>(cfg.B)},
               {"M*", static_cast<double>(mstar)},
               {"beta", cfg.beta},
               {"rate", r}};
    return iv;
}

IntervalEstimate clt_ci(const IntegrandEvaluations<double>& ev, const WeightSet<double>& w, double delta, CltMode mode)
{
    check_delta(delta);
    if (!ev.noise_scale)
        throw Error("CLT confidence interval needs the per-point noise scale");
    if (w.size() != ev.size())
        throw Error("weight set does not match the integrand");
    const auto& sigma = *ev.noise_scale;
    const bool sphere = ev.sample.domain().is_sphere();
    double s2 = 0.0;
    if (mode == CltMode::Limit1d) {
        if (ev.sample.dim() != 1 || sphere)
            throw Error("limit-form variance is only available on [0,1]");
        s2 = 2.5 / static_cast<double>(ev.size()) * sigma.array().square().mean();
    } else {
        if (sphere)
            warn("Gaussian limit of the control-neighbour estimate is conjectural on the sphere");
        s2 = (w.weights.array().square() * sigma.array().square()).sum();
    }
    const double z = normal_quantile(1.0 - delta / 2.0);
    const double s = std::sqrt(s2);
    IntervalEstimate iv;
    iv.point = integrate_control(ev, w);
    iv.lower = iv.point - z * s;
    iv.upper = iv.point + z * s;
    iv.level = 1.0 - delta;
    iv.method = mode == CltMode::Limit1d ? IntervalMethod::CltCiLimit : IntervalMethod::CltCiConditional;
    iv.meta = {{"s_M", s}, {"z", z}};
    return iv;
}

IntervalEstimate mean_clt_interval(const IntegrandEvaluations<double>& ev, double delta)
{
    check_delta(delta);
    const Index M = ev.size();
    if (M < 2)
        throw Error("sample-mean interval needs at least two values");
    const double mean = ev.values.mean();
    const double var = (ev.values.array() - mean).square().sum() / static_cast<double>(M - 1);
    const double half = normal_quantile(1.0 - delta / 2.0) * std::sqrt(var / static_cast<double>(M));
    IntervalEstimate iv;
    iv.point = mean;
    iv.lower = mean - half;
    iv.upper = mean + half;
    iv.level = 1.0 - delta;
    iv.method = IntervalMethod::MeanClt;
    return iv;
}

} // namespace cneigh

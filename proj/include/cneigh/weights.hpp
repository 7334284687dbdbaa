#pragma once

#include "cneigh/voronoi.hpp"

#include <string>

namespace cneigh {

enum class WeightVariant { UnbiasedLoo, NnVariant };

const char* to_string(WeightVariant v) noexcept;

struct WeightOptions {
    /// Refuse designs with M < 4 instead of warning.
    bool strict = false;
    /// Allow the leave-one-out weights for d > 1 (M Voronoi deletions).
    bool expensive_loo = false;
    VolumeOptions volumes;
};

/// Linear integration rule sum_m w_m phi(T_m). Weights sum to one and may be
/// negative; they are never clipped.
template <typename Scalar = double>
struct WeightSet {
    VectorX<Scalar> weights;
    WeightVariant variant = WeightVariant::UnbiasedLoo;
    VoronoiSummary<Scalar> source;

    Index size() const noexcept { return weights.size(); }
};

/// Unbiased leave-one-out control-neighbour weights, w_m = (1 + c_m - d_m) / M.
template <typename Scalar>
WeightSet<Scalar> control_weights_unbiased(const DesignSample<Scalar>& sample, const WeightOptions& opts = {})
{
    const Index M = sample.size();
    if (M < 2)
        throw Error("insufficient points for LOO query");
    if (M < 4) {
        if (opts.strict)
            throw Error("control-neighbour weights need M >= 4 in strict mode (got M = " + std::to_string(M) + ")");
        warn("control-neighbour weights with M = " + std::to_string(M) + " < 4; the variance bound does not apply");
    }
    if (sample.dim() > 1 && !opts.expensive_loo)
        throw Error("unbiased leave-one-out weights for d > 1 need the expensive-LOO option; "
                    "use control_weights_nn for the single-diagram variant");

    WeightSet<Scalar> w;
    w.variant = WeightVariant::UnbiasedLoo;
    w.source = summarize(sample, opts.volumes, true);
    const auto& c = *w.source.loo_cum_volumes;
    w.weights.resize(M);
    const Scalar inv = Scalar(1) / static_cast<Scalar>(M);
    for (Index m = 0; m < M; ++m)
        w.weights(m) = (Scalar(1) + c(m) - static_cast<Scalar>(w.source.degrees[static_cast<std::size_t>(m)])) * inv;
    return w;
}

/// Single-diagram variant, w_m = (1 + M V_m - d_m) / M.
template <typename Scalar>
WeightSet<Scalar> control_weights_nn(const DesignSample<Scalar>& sample, const WeightOptions& opts = {})
{
    const Index M = sample.size();
    if (M < 2)
        throw Error("insufficient points for LOO query");
    if (M < 4) {
        if (opts.strict)
            throw Error("control-neighbour weights need M >= 4 in strict mode (got M = " + std::to_string(M) + ")");
        warn("control-neighbour weights with M = " + std::to_string(M) + " < 4; the variance bound does not apply");
    }
    WeightSet<Scalar> w;
    w.variant = WeightVariant::NnVariant;
    w.source = summarize(sample, opts.volumes, false);
    const auto& V = w.source.std_volumes;
    w.weights.resize(M);
    const Scalar Ms = static_cast<Scalar>(M);
    for (Index m = 0; m < M; ++m)
        w.weights(m) = (Scalar(1) + Ms * V(m) - static_cast<Scalar>(w.source.degrees[static_cast<std::size_t>(m)])) / Ms;
    return w;
}

/// Unbiased weights on the line, the single-diagram variant otherwise.
template <typename Scalar>
WeightSet<Scalar> default_weights(const DesignSample<Scalar>& sample, const WeightOptions& opts = {})
{
    if (sample.dim() == 1 && !sample.domain().is_sphere())
        return control_weights_unbiased(sample, opts);
    return control_weights_nn(sample, opts);
}

} // namespace cneigh

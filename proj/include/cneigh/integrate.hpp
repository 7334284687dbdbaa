#pragma once

#include "cneigh/weights.hpp"

#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace cneigh {

/// Integrand values at the design points. When `noisy` is set the values are
/// phi(T_m) + sigma(T_m) eta_m and `noise_scale` may carry sigma(T_m).
template <typename Scalar = double>
struct IntegrandEvaluations {
    DesignSample<Scalar> sample;
    VectorX<Scalar> values;
    bool noisy = false;
    std::optional<VectorX<Scalar>> noise_scale;

    IntegrandEvaluations(DesignSample<Scalar> s, VectorX<Scalar> v)
        : sample(std::move(s))
        , values(std::move(v))
    {
        validate();
    }

    IntegrandEvaluations(DesignSample<Scalar> s, VectorX<Scalar> v, VectorX<Scalar> scale)
        : sample(std::move(s))
        , values(std::move(v))
        , noisy(true)
        , noise_scale(std::move(scale))
    {
        validate();
        if (noise_scale->size() != values.size())
            throw Error("noise scale has " + std::to_string(noise_scale->size()) + " entries, expected "
                        + std::to_string(values.size()));
        if (!noise_scale->allFinite() || (noise_scale->array() < Scalar(0)).any())
            throw Error("noise scale must be finite and nonnegative");
    }

    Index size() const noexcept { return values.size(); }

    IntegrandEvaluations subset(const std::vector<Index>& ids) const
    {
        VectorX<Scalar> v(static_cast<Index>(ids.size()));
        for (std::size_t j = 0; j < ids.size(); ++j)
            v(static_cast<Index>(j)) = values(ids[j]);
        return IntegrandEvaluations(sample.subset(ids), std::move(v));
    }

private:
    void validate() const
    {
        if (values.size() != sample.size())
            throw Error("integrand has " + std::to_string(values.size()) + " values for " + std::to_string(sample.size())
                        + " design points");
        if (!values.allFinite())
            throw Error("integrand values must be finite");
    }
};

template <typename Scalar>
Scalar integrate_mean(const VectorX<Scalar>& values)
{
    if (values.size() == 0)
        throw Error("cannot average an empty sample");
    return values.mean();
}

template <typename Scalar>
Scalar integrate_mean(const IntegrandEvaluations<Scalar>& ev)
{
    return integrate_mean(ev.values);
}

/// Trapezoidal rule over the sorted design on [0,1] with flat extensions to
/// both ends. It approximates the Lebesgue integral of the values, which is
/// the target only for a uniform design.
template <typename Scalar>
Scalar integrate_trapezoid(const IntegrandEvaluations<Scalar>& ev)
{
    if (ev.sample.dim() != 1 || ev.sample.domain().is_sphere())
        throw Error("trapezoid requires univariate domain");
    const Index M = ev.size();
    std::vector<Index> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), Index{0});
    const auto& p = ev.sample.points();
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return p(0, a) < p(0, b) || (p(0, a) == p(0, b) && a < b); });

    Scalar prev_t = 0;
    Scalar prev_v = ev.values(order.front());
    Scalar sum = 0;
    for (Index id : order) {
        sum += Scalar(0.5) * (prev_v + ev.values(id)) * (p(0, id) - prev_t);
        prev_t = p(0, id);
        prev_v = ev.values(id);
    }
    sum += prev_v * (Scalar(1) - prev_t);
    return sum;
}

/// sum_m w_m value_m.
template <typename Scalar>
Scalar integrate_control(const IntegrandEvaluations<Scalar>& ev, const WeightSet<Scalar>& w)
{
    if (w.size() != ev.size())
        throw Error("weight set has " + std::to_string(w.size()) + " entries for " + std::to_string(ev.size()) + " values");
    return w.weights.dot(ev.values);
}

/// Three-term form of the single-diagram estimator: sample mean, minus the
/// mean of the integrand at each point's leave-one-out nearest neighbour,
/// plus the Voronoi-volume Riemann sum.
template <typename Scalar>
Scalar integrate_control_threeterm(const IntegrandEvaluations<Scalar>& ev, const VolumeOptions& opts = {})
{
    const Index M = ev.size();
    if (M < 2)
        throw Error("insufficient points for LOO query");
    const NNIndex<Scalar> index(ev.sample.points());
    const auto vol = voronoi_volumes(ev.sample, index, opts);
    Scalar at_neighbour = 0;
    for (Index m = 0; m < M; ++m)
        at_neighbour += ev.values(index.nearest_excluding(ev.sample.points().col(m), m));
    const Scalar Ms = static_cast<Scalar>(M);
    return ev.values.sum() / Ms - at_neighbour / Ms + ev.values.dot(vol.volumes);
}

} // namespace cneigh

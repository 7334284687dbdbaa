#include "cneigh/domain.hpp"

#include <algorithm>
#include <random>

namespace cneigh {

Domain Domain::cube(int d)
{
    if (d < 1)
        throw Error("domain dimension must be >= 1");
    return {DomainKind::UnitCube, d};
}

Domain Domain::sphere(int d)
{
    if (d < 1)
        throw Error("domain dimension must be >= 1");
    return {DomainKind::UnitSphere, d};
}

std::string Domain::describe() const
{
    return (is_sphere() ? "unit-sphere(" : "unit-cube(") + std::to_string(dim) + ")";
}

SamplingMeasure SamplingMeasure::uniform()
{
    return {};
}

SamplingMeasure SamplingMeasure::linear(double b)
{
    if (!(b >= 0.0 && b < 2.0))
        throw Error("linear design density needs b in [0, 2), got " + std::to_string(b));
    SamplingMeasure m;
    if (b == 0.0)
        return m;
    m.kind_ = MeasureKind::Linear1d;
    m.b_ = b;
    return m;
}

SamplingMeasure SamplingMeasure::tabulated(std::vector<double> grid, std::vector<double> values)
{
    if (grid.size() < 2 || grid.size() != values.size())
        throw Error("tabulated density needs matching grid and values with at least two nodes");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || !std::isfinite(values[i]))
            throw Error("tabulated density has non-finite entries");
        if (!(values[i] > 0.0))
            throw Error("tabulated density must be strictly positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw Error("tabulated density grid must be strictly increasing");
    }
    if (std::abs(grid.front()) > 1e-12 || std::abs(grid.back() - 1.0) > 1e-12)
        throw Error("tabulated density grid must span [0, 1]");
    grid.front() = 0.0;
    grid.back() = 1.0;

    SamplingMeasure m;
    m.kind_ = MeasureKind::Tabulated;
    m.cum_.assign(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        m.cum_[i] = m.cum_[i - 1] + 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    const double total = m.cum_.back();
    if (!(total > 0.0))
        throw Error("tabulated density integrates to zero");
    for (auto& v : values)
        v /= total;
    for (auto& c : m.cum_)
        c /= total;
    m.grid_ = std::move(grid);
    m.values_ = std::move(values);
    return m;
}

double SamplingMeasure::density(double t) const
{
    switch (kind_) {
    case MeasureKind::Uniform:
        return 1.0;
    case MeasureKind::Linear1d:
        return 1.0 - b_ / 2.0 + b_ * t;
    case MeasureKind::Tabulated: {
        if (t <= 0.0)
            return values_.front();
        if (t >= 1.0)
            return values_.back();
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - grid_.begin());
        const double h = grid_[i] - grid_[i - 1];
        const double s = (t - grid_[i - 1]) / h;
        return (1.0 - s) * values_[i - 1] + s * values_[i];
    }
    }
    return 1.0;
}

double SamplingMeasure::cdf(double t) const
{
    if (t <= 0.0)
        return 0.0;
    if (t >= 1.0)
        return 1.0;
    switch (kind_) {
    case MeasureKind::Uniform:
        return t;
    case MeasureKind::Linear1d:
        return (1.0 - b_ / 2.0) * t + b_ * t * t / 2.0;
    case MeasureKind::Tabulated: {
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - grid_.begin());
        const double x = t - grid_[i - 1];
        const double h = grid_[i] - grid_[i - 1];
        const double slope = (values_[i] - values_[i - 1]) / h;
        return cum_[i - 1] + values_[i - 1] * x + 0.5 * slope * x * x;
    }
    }
    return t;
}

double SamplingMeasure::quantile(double u) const
{
    if (!(u >= 0.0 && u <= 1.0))
        throw Error("quantile level must lie in [0, 1]");
    switch (kind_) {
    case MeasureKind::Uniform:
        return u;
    case MeasureKind::Linear1d: {
        // b/2 t^2 + (1 - b/2) t - u = 0, positive root, written to avoid cancellation
        const double a = 1.0 - b_ / 2.0;
        return 2.0 * u / (a + std::sqrt(a * a + 2.0 * b_ * u));
    }
    case MeasureKind::Tabulated: {
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cum_.begin());
        if (i >= cum_.size())
            return 1.0;
        if (i == 0)
            i = 1;
        const double h = grid_[i] - grid_[i - 1];
        const double slope = (values_[i] - values_[i - 1]) / h;
        const double r = u - cum_[i - 1];
        const double f0 = values_[i - 1];
        double x;
        if (std::abs(slope) < 1e-14) {
            x = f0 > 0.0 ? r / f0 : 0.0;
        } else {
            const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * r);
            x = 2.0 * r / (f0 + std::sqrt(disc));
        }
        return std::clamp(grid_[i - 1] + x, grid_[i - 1], grid_[i]);
    }
    }
    return u;
}

VectorX<double> SamplingMeasure::draw(const Domain& domain, Rng& rng) const
{
    VectorX<double> p(domain.ambient_dim());
    if (domain.is_sphere()) {
        std::normal_distribution<double> normal;
        do {
            for (Index i = 0; i < p.size(); ++i)
                p(i) = normal(rng);
        } while (p.squaredNorm() == 0.0);
        p.normalize();
        return p;
    }
    if (kind_ == MeasureKind::Uniform) {
        for (Index i = 0; i < p.size(); ++i)
            p(i) = uniform01(rng);
        return p;
    }
    p(0) = quantile(uniform01(rng));
    return p;
}

void SamplingMeasure::check_compatible(const Domain& domain) const
{
    if (kind_ != MeasureKind::Uniform && (domain.is_sphere() || domain.dim != 1))
        throw Error("measure '" + describe() + "' is only defined on unit-cube(1)");
}

std::string SamplingMeasure::describe() const
{
    switch (kind_) {
    case MeasureKind::Uniform:
        return "uniform";
    case MeasureKind::Linear1d:
        return "linear-1d(b=" + std::to_string(b_) + ")";
    case MeasureKind::Tabulated:
        return "tabulated-density(" + std::to_string(grid_.size()) + " nodes)";
    }
    return "unknown";
}

} // namespace cneigh

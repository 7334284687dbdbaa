#pragma once

#include "cneigh/common.hpp"
#include "cneigh/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace cneigh {

enum class DomainKind { UnitCube, UnitSphere };

/// Integration domain: the unit cube [0,1]^d, or the unit sphere S^d embedded
/// in R^{d+1}. On the sphere distances are geodesic; nearest-neighbour
/// queries use the chordal distance, which orders points identically.
struct Domain {
    DomainKind kind = DomainKind::UnitCube;
    int dim = 1;

    static Domain cube(int d);
    static Domain sphere(int d);

    /// Number of coordinates per point (d for the cube, d+1 for the sphere).
    int ambient_dim() const noexcept { return kind == DomainKind::UnitSphere ? dim + 1 : dim; }
    bool is_sphere() const noexcept { return kind == DomainKind::UnitSphere; }

    std::string describe() const;

    friend bool operator==(const Domain&, const Domain&) = default;
};

enum class MeasureKind { Uniform, Linear1d, Tabulated };

/// Law of the design points. Densities are with respect to Lebesgue measure
/// on the cube, or the normalized surface measure on the sphere.
class SamplingMeasure {
public:
    static SamplingMeasure uniform();
    /// f(t) = 1 - b/2 + b t on [0,1], b in [0, 2).
    static SamplingMeasure linear(double b);
    /// Piecewise-linear density through (grid, values) on [0,1]; rescaled to
    /// integrate to one. The grid must be strictly increasing and span [0,1].
    static SamplingMeasure tabulated(std::vector<double> grid, std::vector<double> values);

    MeasureKind kind() const noexcept { return kind_; }
    double slope() const noexcept { return b_; }
    bool is_uniform() const noexcept { return kind_ == MeasureKind::Uniform; }
    bool univariate_only() const noexcept { return kind_ != MeasureKind::Uniform; }

    double density(double t) const;
    double cdf(double t) const;
    double quantile(double u) const;

    /// Density at a point of the domain; for multivariate domains only the
    /// uniform measure is available.
    template <typename Derived>
    double density_at(const Eigen::MatrixBase<Derived>& point) const
    {
        if (kind_ == MeasureKind::Uniform)
            return 1.0;
        return density(static_cast<double>(point(0)));
    }

    /// One draw from the measure on the domain.
    VectorX<double> draw(const Domain& domain, Rng& rng) const;

    void check_compatible(const Domain& domain) const;

    std::string describe() const;

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    MeasureKind kind_ = MeasureKind::Uniform;
    double b_ = 0.0;
    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> cum_;
};

/// M design points in a domain, stored column-wise (ambient_dim x M), plus
/// the sampling measure they were drawn from.
template <typename Scalar = double>
class DesignSample {
public:
    using PointMatrix = MatrixX<Scalar>;

    DesignSample(Domain domain, PointMatrix points, SamplingMeasure measure = SamplingMeasure::uniform())
        : domain_(domain)
        , points_(std::move(points))
        , measure_(std::move(measure))
    {
        validate();
    }

    /// Univariate convenience constructor on [0,1].
    static DesignSample from_values(const std::vector<Scalar>& t, SamplingMeasure measure = SamplingMeasure::uniform())
    {
        PointMatrix p(1, static_cast<Index>(t.size()));
        for (std::size_t i = 0; i < t.size(); ++i)
            p(0, static_cast<Index>(i)) = t[i];
        return DesignSample(Domain::cube(1), std::move(p), std::move(measure));
    }

    const Domain& domain() const noexcept { return domain_; }
    const PointMatrix& points() const noexcept { return points_; }
    const SamplingMeasure& measure() const noexcept { return measure_; }
    Index size() const noexcept { return points_.cols(); }
    int dim() const noexcept { return domain_.dim; }

    auto point(Index m) const { return points_.col(m); }

    double density(Index m) const { return measure_.density_at(points_.col(m)); }

    /// Sub-design made of the listed columns, in the listed order.
    DesignSample subset(const std::vector<Index>& ids) const
    {
        PointMatrix p(points_.rows(), static_cast<Index>(ids.size()));
        for (std::size_t j = 0; j < ids.size(); ++j)
            p.col(static_cast<Index>(j)) = points_.col(ids[j]);
        return DesignSample(domain_, std::move(p), measure_, Unchecked{});
    }

private:
    struct Unchecked {};
    DesignSample(Domain domain, PointMatrix points, SamplingMeasure measure, Unchecked)
        : domain_(domain)
        , points_(std::move(points))
        , measure_(std::move(measure))
    {
    }

    void validate() const
    {
        if (domain_.dim < 1)
            throw Error("domain dimension must be >= 1");
        if (points_.cols() < 1)
            throw Error("design sample needs at least one point");
        if (points_.rows() != domain_.ambient_dim())
            throw Error("design points have " + std::to_string(points_.rows()) + " coordinates, domain "
                        + domain_.describe() + " expects " + std::to_string(domain_.ambient_dim()));
        measure_.check_compatible(domain_);
        for (Index m = 0; m < points_.cols(); ++m) {
            const auto p = points_.col(m);
            if (!p.allFinite())
                throw Error("design point " + std::to_string(m) + " has non-finite coordinates");
            if (domain_.is_sphere()) {
                const double n = static_cast<double>(p.norm());
                if (std::abs(n - 1.0) > 1e-9)
                    throw Error("design point " + std::to_string(m) + " is not on the unit sphere");
            } else if ((p.array() < Scalar(0)).any() || (p.array() > Scalar(1)).any()) {
                throw Error("design point " + std::to_string(m) + " lies outside the unit cube");
            }
        }
    }

    Domain domain_;
    PointMatrix points_;
    SamplingMeasure measure_;
};

} // namespace cneigh

#include "cneigh/fda.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cneigh {

Field univariate(std::function<double(double)> f)
{
    return [f = std::move(f)](const VectorX<double>& t) { return f(t(0)); };
}

TabulatedFunction::TabulatedFunction(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid))
    , values_(std::move(values))
{
    if (grid_.empty() || grid_.size() != values_.size())
        throw Error("tabulated function needs matching, non-empty grid and values");
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!std::isfinite(grid_[i]) || !std::isfinite(values_[i]))
            throw Error("tabulated function entries must be finite");
        if (i > 0 && !(grid_[i] > grid_[i - 1]))
            throw Error("tabulated grid must be strictly increasing");
    }
}

double TabulatedFunction::operator()(double t) const
{
    if (t <= grid_.front())
        return values_.front();
    if (t >= grid_.back())
        return values_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    const auto i = static_cast<std::size_t>(it - grid_.begin());
    const double u = (t - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
    return values_[i - 1] + u * (values_[i] - values_[i - 1]);
}

Field TabulatedFunction::as_field() const
{
    return [self = *this](const VectorX<double>& t) { return self(t(0)); };
}

Link Link::identity()
{
    return {[](double x) { return x; }, "identity"};
}

Link Link::logistic()
{
    return {[](double x) { return 1.0 / (1.0 + std::exp(-x)); }, "logistic"};
}

RegressionModel RegressionModel::scalar(double alpha0, Field alpha)
{
    RegressionModel m;
    m.alpha0 = alpha0;
    m.K = 1;
    m.alpha = [a = std::move(alpha)](const VectorX<double>& t) { return VectorX<double>::Constant(1, a(t)); };
    return m;
}

namespace {

VectorX<double> checked_density(const DesignSample<double>& s)
{
    VectorX<double> f(s.size());
    for (Index m = 0; m < s.size(); ++m) {
        f(m) = s.density(m);
        if (!(f(m) >= kDensityFloor))
            throw Error("density floor violated at design point " + std::to_string(m));
    }
    return f;
}

void check_size(Index got, Index M, const char* what)
{
    if (got != M)
        throw Error(std::string(what) + " has " + std::to_string(got) + " entries for " + std::to_string(M)
                    + " design points");
}

IntervalEstimate shifted(IntervalEstimate iv, double by)
{
    iv.point += by;
    iv.lower += by;
    iv.upper += by;
    return iv;
}

} // namespace

VectorX<double> flm_integrand(const RegressionModel& model, const MatrixX<double>& covariate,
                              const DesignSample<double>& sample)
{
    if (!model.alpha)
        throw Error("regression model has no slope function");
    check_size(covariate.cols(), sample.size(), "covariate");
    if (covariate.rows() != model.K)
        throw Error("covariate has " + std::to_string(covariate.rows()) + " components, model expects "
                    + std::to_string(model.K));
    const VectorX<double> f = checked_density(sample);
    VectorX<double> phi(sample.size());
    for (Index m = 0; m < sample.size(); ++m) {
        const VectorX<double> a = model.alpha(sample.point(m));
        if (a.size() != model.K)
            throw Error("slope function returned the wrong number of components");
        phi(m) = a.dot(covariate.col(m)) / f(m);
    }
    return phi;
}

double predict_flm(const RegressionModel& model, const MatrixX<double>& covariate, const DesignSample<double>& sample,
                   const WeightSet<double>& w)
{
    const IntegrandEvaluations<double> ev(sample, flm_integrand(model, covariate, sample));
    return model.alpha0 + integrate_control(ev, w);
}

IntervalEstimate predict_flm_pi(const RegressionModel& model, const MatrixX<double>& covariate,
                                const DesignSample<double>& sample, const SubsampleConfig& cfg, double delta,
                                WeightOptions opts)
{
    const IntegrandEvaluations<double> ev(sample, flm_integrand(model, covariate, sample));
    return shifted(subsample_pi(ev, control_estimator(opts), cfg, delta), model.alpha0);
}

IntervalEstimate predict_flm_ci_noisy(const RegressionModel& model, const VectorX<double>& noisy_covariate,
                                      const VectorX<double>& sigma, const DesignSample<double>& sample,
                                      const WeightSet<double>& w, double delta, CltMode mode)
{
    if (model.K != 1)
        throw Error("noisy-covariate intervals are defined for a scalar covariate (K = 1)");
    check_size(noisy_covariate.size(), sample.size(), "noisy covariate");
    check_size(sigma.size(), sample.size(), "noise scale");
    const VectorX<double> f = checked_density(sample);
    VectorX<double> phi(sample.size()), scale(sample.size());
    for (Index m = 0; m < sample.size(); ++m) {
        const double a = model.alpha(sample.point(m))(0);
        phi(m) = a * noisy_covariate(m) / f(m);
        scale(m) = std::abs(a) * sigma(m) / f(m);
    }
    const IntegrandEvaluations<double> ev(sample, phi, scale);
    return shifted(clt_ci(ev, w, delta, mode), model.alpha0);
}

IntervalEstimate glm_transform_interval(const IntervalEstimate& iv, const Link& link)
{
    IntervalEstimate out = iv;
    out.point = link.g(iv.point);
    const double a = link.g(iv.lower), b = link.g(iv.upper);
    out.lower = std::min(a, b);
    out.upper = std::max(a, b);
    return out;
}

VectorX<double> fpca_integrand(const FPCAModel& model, int j, const VectorX<double>& values,
                               const DesignSample<double>& sample)
{
    if (j < 1 || j > model.J())
        throw Error("score index " + std::to_string(j) + " outside 1.." + std::to_string(model.J()));
    check_size(values.size(), sample.size(), "curve");
    const VectorX<double> f = checked_density(sample);
    const auto& psi = model.psi[static_cast<std::size_t>(j - 1)];
    VectorX<double> phi(sample.size());
    for (Index m = 0; m < sample.size(); ++m) {
        const VectorX<double> t = sample.point(m);
        const double mu = model.mu ? model.mu(t) : 0.0;
        phi(m) = (values(m) - mu) * psi(t) / f(m);
    }
    return phi;
}

double fpca_score(const FPCAModel& model, int j, const VectorX<double>& values, const DesignSample<double>& sample,
                  const WeightSet<double>& w)
{
    return integrate_control(IntegrandEvaluations<double>(sample, fpca_integrand(model, j, values, sample)), w);
}

IntervalEstimate fpca_score_pi(const FPCAModel& model, int j, const VectorX<double>& values,
                               const DesignSample<double>& sample, const SubsampleConfig& cfg, double delta,
                               WeightOptions opts)
{
    const IntegrandEvaluations<double> ev(sample, fpca_integrand(model, j, values, sample));
    const Estimator est = sample.dim() == 1 ? control_estimator(opts) : control_nn_estimator(opts);
    return subsample_pi(ev, est, cfg, delta);
}

IntervalEstimate fpca_score_ci(const FPCAModel& model, int j, const VectorX<double>& values,
                               const VectorX<double>& sigma, const DesignSample<double>& sample,
                               const WeightSet<double>& w, double delta, CltMode mode)
{
    check_size(sigma.size(), sample.size(), "noise scale");
    const VectorX<double> phi = fpca_integrand(model, j, values, sample);
    const VectorX<double> f = checked_density(sample);
    const auto& psi = model.psi[static_cast<std::size_t>(j - 1)];
    VectorX<double> scale(sample.size());
    for (Index m = 0; m < sample.size(); ++m)
        scale(m) = sigma(m) * std::abs(psi(sample.point(m))) / f(m);
    return clt_ci(IntegrandEvaluations<double>(sample, phi, scale), w, delta, mode);
}

IntervalEstimate fpca_score_ci(const FPCAModel& model, int j, const VectorX<double>& values, const NoiseScale& sigma,
                               const DesignSample<double>& sample, const WeightSet<double>& w, double delta,
                               CltMode mode)
{
    check_size(values.size(), sample.size(), "curve");
    VectorX<double> s(sample.size());
    for (Index m = 0; m < sample.size(); ++m)
        s(m) = sigma(sample.point(m), values(m));
    return fpca_score_ci(model, j, values, s, sample, w, delta, mode);
}

DepthSpec DepthSpec::tukey_gaussian(Field mean, Field sd)
{
    DepthSpec spec;
    spec.depth = [mean = std::move(mean), sd = std::move(sd)](double x, const VectorX<double>& t) {
        const double s = sd(t);
        if (!(s > 0))
            throw Error("Gaussian marginal needs a positive standard deviation");
        const double F = boost::math::cdf(boost::math::normal_distribution<double>(mean(t), s), x);
        return std::min(F, 1.0 - F);
    };
    return spec;
}

DepthSpec DepthSpec::tukey_empirical(CurveSet reference)
{
    if (reference.empty())
        throw Error("empirical depth needs at least one reference curve");
    std::vector<TabulatedFunction> curves;
    curves.reserve(reference.size());
    for (const auto& c : reference)
        curves.emplace_back(std::vector<double>(c.t.begin(), c.t.end()), std::vector<double>(c.x.begin(), c.x.end()));
    DepthSpec spec;
    spec.depth = [curves = std::move(curves)](double x, const VectorX<double>& t) {
        std::size_t below = 0;
        for (const auto& c : curves)
            below += c(t(0)) <= x ? 1 : 0;
        const double F = static_cast<double>(below) / static_cast<double>(curves.size());
        return std::min(F, 1.0 - F);
    };
    return spec;
}

VectorX<double> depth_integrand(const DepthSpec& spec, const VectorX<double>& values, const DesignSample<double>& sample)
{
    if (!spec.depth)
        throw Error("depth specification has no depth function");
    check_size(values.size(), sample.size(), "curve");
    const VectorX<double> f = checked_density(sample);
    VectorX<double> phi(sample.size());
    for (Index m = 0; m < sample.size(); ++m) {
        const VectorX<double> t = sample.point(m);
        const double D = spec.depth(values(m), t);
        if (!(D >= 0.0 && D <= 1.0))
            throw Error("depth values must lie in [0, 1]");
        if (spec.omega) {
            const double om = (*spec.omega)(t);
            if (!(om >= 0))
                throw Error("depth weight must be nonnegative");
            phi(m) = D * om / f(m);
        } else {
            phi(m) = D;
        }
    }
    return phi;
}

double depth_mfd(const DepthSpec& spec, const VectorX<double>& values, const DesignSample<double>& sample,
                 const WeightSet<double>& w)
{
    return integrate_control(IntegrandEvaluations<double>(sample, depth_integrand(spec, values, sample)), w);
}

IntervalEstimate depth_mfd_pi(const DepthSpec& spec, const VectorX<double>& values, const DesignSample<double>& sample,
                              const SubsampleConfig& cfg, double delta, WeightOptions opts)
{
    const IntegrandEvaluations<double> ev(sample, depth_integrand(spec, values, sample));
    const Estimator est = sample.dim() == 1 ? control_estimator(opts) : control_nn_estimator(opts);
    return subsample_pi(ev, est, cfg, delta);
}

double cosine_basis(int k, double t)
{
    return k == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(k * std::numbers::pi * t);
}

double DensityFit::raw(double t) const
{
    double s = 0;
    for (int k = 0; k <= K_hat; ++k)
        if (kept[static_cast<std::size_t>(k)])
            s += theta[static_cast<std::size_t>(k)] * cosine_basis(k, t);
    return s;
}

double DensityFit::operator()(double t) const
{
    return std::max(raw(t) / scale, constants.floor);
}

SamplingMeasure DensityFit::to_measure(int grid_points) const
{
    if (grid_points < 2)
        throw Error("density grid needs at least two points");
    std::vector<double> g(static_cast<std::size_t>(grid_points)), v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = static_cast<double>(i) / static_cast<double>(grid_points - 1);
        v[i] = (*this)(g[i]);
    }
    g.back() = 1.0;
    return SamplingMeasure::tabulated(std::move(g), std::move(v));
}

namespace {

// Trapezoid integral of max(raw / s, floor) on a fine grid.
double clipped_mass(const std::vector<double>& raw, double s, double floor)
{
    const double h = 1.0 / static_cast<double>(raw.size() - 1);
    double sum = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = std::max(raw[i] / s, floor);
        sum += (i == 0 || i + 1 == raw.size()) ? 0.5 * v : v;
    }
    return sum * h;
}

} // namespace

DensityFit fit_density_threshold(const std::vector<VectorX<double>>& designs, const DensityConstants& c)
{
    const std::size_t n = designs.size();
    if (n < 2)
        throw Error("need n >= 2 for variance");
    double Mbar = 0;
    for (const auto& d : designs) {
        if (d.size() == 0)
            throw Error("every curve needs at least one observation time");
        if (!d.allFinite() || (d.array() < 0).any() || (d.array() > 1).any())
            throw Error("observation times must lie in [0, 1]");
        Mbar += static_cast<double>(d.size());
    }
    if (Mbar < 10)
        throw Error("density estimation needs at least 10 pooled points");

    DensityFit fit;
    fit.constants = c;
    const int Kmax = std::max(0, static_cast<int>(std::floor(c.c_k0 + c.c_k1 * std::log(Mbar))));
    fit.theta.assign(static_cast<std::size_t>(Kmax + 1), 0.0);
    fit.variance.assign(fit.theta.size(), 0.0);
    fit.kept.assign(fit.theta.size(), false);
    fit.theta[0] = 1.0;
    fit.kept[0] = true;

    const double nd = static_cast<double>(n);
    std::vector<double> avg(n);
    for (int k = 1; k <= Kmax; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (Index m = 0; m < designs[i].size(); ++m)
                s += cosine_basis(k, designs[i](m));
            avg[i] = s / static_cast<double>(designs[i].size());
        }
        double mean = 0;
        for (double a : avg)
            mean += a;
        mean /= nd;
        double var = 0;
        for (double a : avg)
            var += (a - mean) * (a - mean);
        var /= nd - 1.0;
        const auto kk = static_cast<std::size_t>(k);
        fit.theta[kk] = mean;
        fit.variance[kk] = var / nd;
        fit.kept[kk] = mean * mean > c.c_th * fit.variance[kk];
    }

    double best = 0, crit = 0;
    fit.K_hat = 0;
    for (int k = 1; k <= Kmax; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        crit += 2.0 * fit.variance[kk] - fit.theta[kk] * fit.theta[kk];
        if (crit < best) {
            best = crit;
            fit.K_hat = k;
        }
    }

    // Choose the scale s so that max(raw / s, floor) integrates to one; the
    // clipped mass decreases in s.
    constexpr int kGrid = 1 << 16;
    std::vector<double> raw(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i)
        raw[static_cast<std::size_t>(i)] = fit.raw(static_cast<double>(i) / kGrid);
    double lo = 1e-6, hi = 1.0;
    while (clipped_mass(raw, hi, c.floor) > 1.0)
        hi *= 2.0;
    while (clipped_mass(raw, lo, c.floor) < 1.0 && lo > 1e-300)
        lo *= 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (clipped_mass(raw, mid, c.floor) > 1.0 ? lo : hi) = mid;
    }
    fit.scale = 0.5 * (lo + hi);
    return fit;
}

} // namespace cneigh

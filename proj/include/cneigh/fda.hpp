#pragma once

#include "cneigh/infer.hpp"
#include "cneigh/regularity.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cneigh {

/// Real-valued evaluator on the domain; points are columns of ambient size.
using Field = std::function<double(const VectorX<double>&)>;

/// Wraps a univariate function as a Field reading the first coordinate.
Field univariate(std::function<double(double)> f);

/// Piecewise-linear interpolant through (grid, values), held constant beyond
/// the end nodes.
class TabulatedFunction {
public:
    TabulatedFunction(std::vector<double> grid, std::vector<double> values);

    double operator()(double t) const;
    Field as_field() const;

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

/// Integrands are divided by the design density; below this it is refused.
inline constexpr double kDensityFloor = 1e-3;

/// Monotone link of a generalized functional linear model.
struct Link {
    std::function<double(double)> g;
    std::string name = "custom";

    static Link identity();
    static Link logistic();
};

struct RegressionModel {
    double alpha0 = 0.0;
    /// Slope at a point, one entry per covariate component.
    std::function<VectorX<double>(const VectorX<double>&)> alpha;
    int K = 1;
    std::optional<Link> link;

    /// Scalar slope convenience constructor (K = 1).
    static RegressionModel scalar(double alpha0, Field alpha);
};

/// phi_m = alpha(T_m)' X(T_m) / f_T(T_m); covariate is K x M.
VectorX<double> flm_integrand(const RegressionModel& model, const MatrixX<double>& covariate,
                              const DesignSample<double>& sample);

double predict_flm(const RegressionModel& model, const MatrixX<double>& covariate, const DesignSample<double>& sample,
                   const WeightSet<double>& w);

IntervalEstimate predict_flm_pi(const RegressionModel& model, const MatrixX<double>& covariate,
                                const DesignSample<double>& sample, const SubsampleConfig& cfg, double delta,
                                WeightOptions opts = {});

/// CLT interval for the prediction from a noisy scalar covariate
/// Z_m = X(T_m) + sigma_m e_m; s^2 = sum w^2 alpha^2 sigma^2 / f^2.
IntervalEstimate predict_flm_ci_noisy(const RegressionModel& model, const VectorX<double>& noisy_covariate,
                                      const VectorX<double>& sigma, const DesignSample<double>& sample,
                                      const WeightSet<double>& w, double delta, CltMode mode = CltMode::Conditional);

/// Maps point and endpoints through the link, reordering the endpoints when
/// the link is decreasing.
IntervalEstimate glm_transform_interval(const IntervalEstimate& iv, const Link& link);

struct FPCAModel {
    Field mu;
    std::vector<Field> psi;
    std::vector<double> lambda;

    int J() const noexcept { return static_cast<int>(psi.size()); }
};

/// (value_m - mu(T_m)) psi_j(T_m) / f_T(T_m), j 1-based.
VectorX<double> fpca_integrand(const FPCAModel& model, int j, const VectorX<double>& values,
                               const DesignSample<double>& sample);

double fpca_score(const FPCAModel& model, int j, const VectorX<double>& values, const DesignSample<double>& sample,
                  const WeightSet<double>& w);

IntervalEstimate fpca_score_pi(const FPCAModel& model, int j, const VectorX<double>& values,
                               const DesignSample<double>& sample, const SubsampleConfig& cfg, double delta,
                               WeightOptions opts = {});

/// Noisy curve values with per-point noise scale sigma_m:
/// s^2 = sum w^2 sigma^2 psi_j^2 / f^2.
IntervalEstimate fpca_score_ci(const FPCAModel& model, int j, const VectorX<double>& values,
                               const VectorX<double>& sigma, const DesignSample<double>& sample,
                               const WeightSet<double>& w, double delta, CltMode mode = CltMode::Conditional);

/// Noise scale depending on the location and the observed value.
using NoiseScale = std::function<double(const VectorX<double>&, double)>;

IntervalEstimate fpca_score_ci(const FPCAModel& model, int j, const VectorX<double>& values, const NoiseScale& sigma,
                               const DesignSample<double>& sample, const WeightSet<double>& w, double delta,
                               CltMode mode = CltMode::Conditional);

/// Pointwise depth D(x; P_t) in [0,1] and weight Omega. Without Omega the
/// weight is the design density, so Omega / f_T = 1.
struct DepthSpec {
    std::function<double(double x, const VectorX<double>& t)> depth;
    std::optional<Field> omega;

    /// Tukey depth min(F, 1 - F) under a Gaussian marginal N(mean(t), sd(t)^2).
    static DepthSpec tukey_gaussian(Field mean, Field sd);
    /// Tukey depth under the pointwise empirical law of a reference sample of
    /// curves, each linearly interpolated (univariate domains).
    static DepthSpec tukey_empirical(CurveSet reference);
};

VectorX<double> depth_integrand(const DepthSpec& spec, const VectorX<double>& values, const DesignSample<double>& sample);

double depth_mfd(const DepthSpec& spec, const VectorX<double>& values, const DesignSample<double>& sample,
                 const WeightSet<double>& w);

/// Depth paths are as smooth as the curves; beta defaults to 1 in cfg.
IntervalEstimate depth_mfd_pi(const DepthSpec& spec, const VectorX<double>& values, const DesignSample<double>& sample,
                              const SubsampleConfig& cfg, double delta, WeightOptions opts = {});

struct DensityConstants {
    double c_th = 0.4;
    double c_k0 = 3.0;
    double c_k1 = 0.8;
    double floor = kDensityFloor;
};

/// Cosine basis on [0,1]: 1, sqrt(2) cos(k pi t).
double cosine_basis(int k, double t);

/// Thresholded projection estimate of the design density on [0,1].
struct DensityFit {
    std::vector<double> theta;
    std::vector<double> variance;
    std::vector<bool> kept;
    int K_hat = 0;
    DensityConstants constants;
    double scale = 1.0;

    /// Unclipped projection sum_{k <= K_hat, kept} theta_k Phi_k(t).
    double raw(double t) const;
    /// max(raw / scale, floor), integrating to one.
    double operator()(double t) const;
    SamplingMeasure to_measure(int grid_points = 2001) const;
};

/// designs holds the observation times of each curve (n >= 2 curves, at
/// least 10 points in total).
DensityFit fit_density_threshold(const std::vector<VectorX<double>>& designs, const DensityConstants& c = {});

} // namespace cneigh

#pragma once

#include "cneigh/infer.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cneigh {

/// M i.i.d. points on [0,1] with density f(t) = 1 - b/2 + b t, by inverse
/// transform sampling (b = 0 is the uniform design).
DesignSample<double> gen_design(Index M, double b, Rng& rng);
DesignSample<double> gen_design(Index M, double b, std::uint64_t seed);

/// M i.i.d. uniform points in [0,1]^d.
DesignSample<double> gen_uniform_design(Index M, int d, Rng& rng);

/// sqrt(2) sin((k - 1/2) pi t), k >= 1: eigenfunctions of Brownian motion.
double brownian_eigenfunction(int k, double t);

/// ((k - 1/2) pi)^{-nu}.
double kl_eigenvalue(int k, double nu);

struct Process1DConfig {
    double nu = 2.0;
    int K = 50;
};

/// Truncated Karhunen-Loeve path X(t) = sum_k xi_k e_k(t).
struct SimulatedProcess1D {
    std::vector<double> scores;

    double operator()(double t) const;
    VectorX<double> evaluate(const DesignSample<double>& s) const;
};

SimulatedProcess1D gen_path_1d(const Process1DConfig& cfg, Rng& rng);

/// alpha(t) = sum_k 4 (-1)^{k+1} k^{-p} e_k(t). Because the e_k are
/// orthonormal, <alpha, X> is the coefficient-score dot product.
struct SlopeFunction {
    std::vector<double> coefficients;

    double operator()(double t) const;
    double inner(const SimulatedProcess1D& x) const;
};

SlopeFunction slope_alpha(double p, int K);

struct Process2DConfig {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    int K1 = 12;
    int K2 = 12;
};

/// sqrt(2) cos(k1 pi t1) * sqrt(2) cos(k2 pi t2).
double cosine_basis_2d(int k1, int k2, double t1, double t2);

/// Truncated 2D expansion X(t) = sum xi_{k1,k2} cosine_basis_2d(k1, k2, t),
/// xi = omega / ((k1 pi)^{gamma1} (k2 pi)^{gamma2}).
struct SimulatedSurface {
    MatrixX<double> scores; // K1 x K2, entry (k1-1, k2-1)

    double operator()(double t1, double t2) const;
    VectorX<double> evaluate(const DesignSample<double>& s) const;
    /// xi_{j,j}, j >= 1.
    double diagonal_score(int j) const;
};

SimulatedSurface gen_surface_2d(const Process2DConfig& cfg, Rng& rng);

/// Share of the variance of the untruncated expansion carried by the
/// K x K leading terms when gamma1 = gamma2 = gamma.
double explained_variance_2d(double gamma, int K);

/// Fractional Brownian motion with Hurst index H at the given times
/// (Cholesky of the exact covariance).
VectorX<double> gen_fbm(const VectorX<double>& times, double H, Rng& rng);

struct NoisyValues {
    VectorX<double> values;
    VectorX<double> scale;
};

/// values_m + sigma_m eta_m with standard normal eta.
NoisyValues add_noise(const VectorX<double>& values, const VectorX<double>& sigma, Rng& rng);

/// log|err_nn| - log|err_competitor|; negative when the control-neighbour
/// estimate is closer to the truth. Empty (censored) when either error is 0.
std::optional<double> log_ratio_risk(double err_competitor, double err_nn);

enum class ScenarioKind { Regression1d, Scores2d };

struct Scenario {
    std::string id = "scenario";
    ScenarioKind kind = ScenarioKind::Regression1d;
    Index M = 200;
    // 1D regression
    double nu = 2.0;
    double b = 0.0;
    double sigma = 0.0;
    double p = 2.0;
    int K = 50;
    // 2D scores
    double gamma = 2.0;
    int K2d = 12;
    int score = 1;
    // estimators and intervals
    std::vector<std::string> methods = {"NN", "mean", "trapez", "ms"};
    int B = 1000;
    double level = 0.95;
    std::optional<Index> mstar;
    std::optional<double> beta;
    int reps = 500;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool record_timing = false;

    /// min((nu - 1)/2, 1) for 1D paths, min(gamma) - 1/2 for surfaces.
    double effective_beta() const;
    void validate() const;
};

struct ExperimentRecord {
    std::string scenario_id;
    int rep = 0;
    std::string method;
    double estimate = 0.0;
    double truth = 0.0;
    double abs_error = 0.0;
    std::optional<double> log_ratio_vs_nn;
    std::optional<bool> covered;
    std::optional<double> length;
    double seconds = 0.0;
};

struct ExperimentResult {
    std::vector<ExperimentRecord> records;
    std::vector<std::string> skipped;
};

/// Runs all replications. Each replication draws a fresh design, path and
/// noise from streams keyed by (seed, rep, role); every requested method is
/// evaluated on the same draws. Records come back in (rep, method) order
/// whatever the number of jobs.
ExperimentResult run_experiment(const Scenario& scenario);

extern const char* const kExperimentCsvHeader;

void write_csv_header(std::ostream& os);
/// Header line (optional) followed by one row per record; numbers as %.17g,
/// unset optionals as empty fields.
void write_csv(std::ostream& os, const std::vector<ExperimentRecord>& records, bool header = true);

struct MethodSummary {
    std::string method;
    std::size_t n = 0;
    std::optional<double> coverage;
    std::optional<double> mean_length;
    std::optional<double> median_log_ratio;
    double rmse = 0.0;
};

std::vector<MethodSummary> summarize_records(const std::vector<ExperimentRecord>& records);

} // namespace cneigh

#include "cneigh/simulate.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

namespace cneigh {

namespace {

constexpr double pi = std::numbers::pi;

double standard_normal(Rng& rng)
{
    std::normal_distribution<double> n;
    return n(rng);
}

} // namespace

DesignSample<double> gen_design(Index M, double b, Rng& rng)
{
    if (M < 1)
        throw Error("design size must be >= 1");
    const SamplingMeasure mu = SamplingMeasure::linear(b);
    MatrixX<double> p(1, M);
    for (Index m = 0; m < M; ++m)
        p(0, m) = mu.quantile(uniform01(rng));
    return DesignSample<double>(Domain::cube(1), std::move(p), mu);
}

DesignSample<double> gen_design(Index M, double b, std::uint64_t seed)
{
    Rng rng = make_stream(seed, StreamRole::Design);
    return gen_design(M, b, rng);
}

DesignSample<double> gen_uniform_design(Index M, int d, Rng& rng)
{
    if (M < 1)
        throw Error("design size must be >= 1");
    MatrixX<double> p(d, M);
    for (Index m = 0; m < M; ++m)
        for (int k = 0; k < d; ++k)
            p(k, m) = uniform01(rng);
    return DesignSample<double>(Domain::cube(d), std::move(p));
}

double brownian_eigenfunction(int k, double t)
{
    return std::numbers::sqrt2 * std::sin((k - 0.5) * pi * t);
}

double kl_eigenvalue(int k, double nu)
{
    return std::pow((k - 0.5) * pi, -nu);
}

double SimulatedProcess1D::operator()(double t) const
{
    double x = 0;
    for (std::size_t k = 0; k < scores.size(); ++k)
        x += scores[k] * brownian_eigenfunction(static_cast<int>(k) + 1, t);
    return x;
}

VectorX<double> SimulatedProcess1D::evaluate(const DesignSample<double>& s) const
{
    VectorX<double> v(s.size());
    for (Index m = 0; m < s.size(); ++m)
        v(m) = (*this)(s.points()(0, m));
    return v;
}

SimulatedProcess1D gen_path_1d(const Process1DConfig& cfg, Rng& rng)
{
    if (!(cfg.nu > 0) || cfg.K < 1)
        throw Error("process needs nu > 0 and K >= 1");
    SimulatedProcess1D x;
    x.scores.resize(static_cast<std::size_t>(cfg.K));
    for (int k = 1; k <= cfg.K; ++k)
        x.scores[static_cast<std::size_t>(k - 1)] = standard_normal(rng) * std::sqrt(kl_eigenvalue(k, cfg.nu));
    return x;
}

double SlopeFunction::operator()(double t) const
{
    double a = 0;
    for (std::size_t k = 0; k < coefficients.size(); ++k)
        a += coefficients[k] * brownian_eigenfunction(static_cast<int>(k) + 1, t);
    return a;
}

double SlopeFunction::inner(const SimulatedProcess1D& x) const
{
    const std::size_t n = std::min(coefficients.size(), x.scores.size());
    double s = 0;
    for (std::size_t k = 0; k < n; ++k)
        s += coefficients[k] * x.scores[k];
    return s;
}

SlopeFunction slope_alpha(double p, int K)
{
    if (!(p > 0.5) || K < 1)
        throw Error("slope function needs p > 1/2 and K >= 1");
    SlopeFunction a;
    a.coefficients.resize(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k)
        a.coefficients[static_cast<std::size_t>(k - 1)] = 4.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::pow(k, -p);
    return a;
}

double cosine_basis_2d(int k1, int k2, double t1, double t2)
{
    return 2.0 * std::cos(k1 * pi * t1) * std::cos(k2 * pi * t2);
}

double SimulatedSurface::operator()(double t1, double t2) const
{
    VectorX<double> c1(scores.rows()), c2(scores.cols());
    for (Index k = 0; k < scores.rows(); ++k)
        c1(k) = std::numbers::sqrt2 * std::cos(static_cast<double>(k + 1) * pi * t1);
    for (Index k = 0; k < scores.cols(); ++k)
        c2(k) = std::numbers::sqrt2 * std::cos(static_cast<double>(k + 1) * pi * t2);
    return c1.dot(scores * c2);
}

VectorX<double> SimulatedSurface::evaluate(const DesignSample<double>& s) const
{
    if (s.dim() != 2 || s.domain().is_sphere())
        throw Error("surface evaluation needs a design in [0,1]^2");
    VectorX<double> v(s.size());
    for (Index m = 0; m < s.size(); ++m)
        v(m) = (*this)(s.points()(0, m), s.points()(1, m));
    return v;
}

double SimulatedSurface::diagonal_score(int j) const
{
    if (j < 1 || j > std::min(scores.rows(), scores.cols()))
        throw Error("diagonal score index out of range");
    return scores(j - 1, j - 1);
}

SimulatedSurface gen_surface_2d(const Process2DConfig& cfg, Rng& rng)
{
    if (!(cfg.gamma1 > 0.5) || !(cfg.gamma2 > 0.5) || cfg.K1 < 1 || cfg.K2 < 1)
        throw Error("surface needs gamma > 1/2 and K >= 1 in both directions");
    SimulatedSurface x;
    x.scores.resize(cfg.K1, cfg.K2);
    for (int k1 = 1; k1 <= cfg.K1; ++k1)
        for (int k2 = 1; k2 <= cfg.K2; ++k2)
            x.scores(k1 - 1, k2 - 1)
                = standard_normal(rng) * std::pow(k1 * pi, -cfg.gamma1) * std::pow(k2 * pi, -cfg.gamma2);
    return x;
}

double explained_variance_2d(double gamma, int K)
{
    if (!(gamma > 0.5) || K < 1)
        throw Error("explained variance needs gamma > 1/2 and K >= 1");
    double partial = 0;
    for (int k = 1; k <= K; ++k)
        partial += std::pow(k, -2 * gamma);
    const double ratio = partial / std::riemann_zeta(2 * gamma);
    return ratio * ratio;
}

VectorX<double> gen_fbm(const VectorX<double>& times, double H, Rng& rng)
{
    if (!(H > 0 && H < 1))
        throw Error("Hurst index must lie in (0, 1)");
    const Index n = times.size();
    MatrixX<double> C(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const double s = std::abs(times(i)), t = std::abs(times(j));
            C(i, j) = 0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(std::abs(times(i) - times(j)), 2 * H));
        }
    C.diagonal().array() += 1e-12;
    const Eigen::LLT<MatrixX<double>> llt(C);
    if (llt.info() != Eigen::Success)
        throw Error("fBM covariance is not positive definite (repeated times?)");
    VectorX<double> z(n);
    for (Index i = 0; i < n; ++i)
        z(i) = standard_normal(rng);
    return llt.matrixL() * z;
}

NoisyValues add_noise(const VectorX<double>& values, const VectorX<double>& sigma, Rng& rng)
{
    if (sigma.size() != values.size())
        throw Error("noise scale length does not match the values");
    if ((sigma.array() < 0).any())
        throw Error("noise scale must be nonnegative");
    NoisyValues out{values, sigma};
    for (Index m = 0; m < values.size(); ++m)
        out.values(m) += sigma(m) * standard_normal(rng);
    return out;
}

std::optional<double> log_ratio_risk(double err_competitor, double err_nn)
{
    const double a = std::abs(err_nn), c = std::abs(err_competitor);
    if (!(a > 0) || !(c > 0) || !std::isfinite(a) || !std::isfinite(c))
        return std::nullopt;
    return std::log(a) - std::log(c);
}

double Scenario::effective_beta() const
{
    if (beta)
        return *beta;
    if (kind == ScenarioKind::Regression1d)
        return std::min((nu - 1.0) / 2.0, 1.0);
    return gamma - 0.5;
}

void Scenario::validate() const
{
    if (reps < 0)
        throw Error("reps must be >= 0");
    if (M < 4)
        throw Error("scenario needs M >= 4");
    if (B < 2)
        throw Error("scenario needs B >= 2");
    if (!(level > 0 && level < 1))
        throw Error("level must lie in (0, 1)");
    if (mstar && (*mstar < 2 || *mstar >= M))
        throw Error("M* must satisfy 2 <= M* < M");
    if (!(sigma >= 0))
        throw Error("sigma must be nonnegative");
    if (jobs < 1)
        throw Error("jobs must be >= 1");
    if (kind == ScenarioKind::Regression1d) {
        if (!(nu > 1))
            throw Error("1D scenarios need nu > 1 (Hoelder paths)");
        if (!(b >= 0 && b < 2))
            throw Error("design slope b must lie in [0, 2)");
        if (K < 1)
            throw Error("K must be >= 1");
    } else {
        if (!(gamma > 0.5))
            throw Error("2D scenarios need gamma > 1/2");
        if (K2d < 1 || score < 1 || score > K2d)
            throw Error("score index must lie in 1..K");
        if (sigma > 0)
            throw Error("2D scenarios are noiseless");
    }
    if (!(effective_beta() > 0))
        throw Error("effective beta must be positive");
    for (const auto& m : methods)
        if (m != "NN" && m != "mean" && m != "trapez" && m != "ms")
            throw Error("unknown method '" + m + "' (expected NN, mean, trapez or ms)");
}

namespace {

using Clock = std::chrono::steady_clock;

struct Replication {
    std::vector<ExperimentRecord> records;
};

bool wants(const Scenario& sc, const char* m)
{
    return std::find(sc.methods.begin(), sc.methods.end(), m) != sc.methods.end();
}

std::vector<std::string> skipped_methods(const Scenario& sc)
{
    std::vector<std::string> s;
    if (sc.kind == ScenarioKind::Scores2d && wants(sc, "trapez"))
        s.push_back("trapez: trapezoid requires univariate domain");
    if (sc.sigma > 0 && wants(sc, "ms"))
        s.push_back("ms: subsampling intervals need noiseless values");
    return s;
}

class Timer {
public:
    explicit Timer(bool on)
        : on_(on)
        , start_(Clock::now())
    {
    }
    double seconds() const
    {
        return on_ ? std::chrono::duration<double>(Clock::now() - start_).count() : 0.0;
    }

private:
    bool on_;
    Clock::time_point start_;
};

ExperimentRecord make_record(const Scenario& sc, int rep, std::string method, double estimate, double truth)
{
    ExperimentRecord r;
    r.scenario_id = sc.id;
    r.rep = rep;
    r.method = std::move(method);
    r.estimate = estimate;
    r.truth = truth;
    r.abs_error = std::abs(estimate - truth);
    return r;
}

void attach(ExperimentRecord& r, const IntervalEstimate& iv)
{
    r.covered = iv.covers(r.truth);
    r.length = iv.length();
}

SubsampleConfig subsample_config(const Scenario& sc, int rep)
{
    SubsampleConfig cfg;
    cfg.B = sc.B;
    cfg.mstar = sc.mstar;
    cfg.beta = sc.effective_beta();
    cfg.seed = stream_seed(sc.seed, {static_cast<std::uint64_t>(StreamRole::Subsample), static_cast<std::uint64_t>(rep)});
    cfg.quiet = true;
    return cfg;
}

Replication run_regression(const Scenario& sc, int rep, const SlopeFunction& alpha)
{
    const auto r = static_cast<std::uint64_t>(rep);
    Rng design_rng = make_stream(sc.seed, StreamRole::Design, r);
    Rng path_rng = make_stream(sc.seed, StreamRole::Path, r);
    Rng noise_rng = make_stream(sc.seed, StreamRole::Noise, r);

    const auto design = gen_design(sc.M, sc.b, design_rng);
    const auto path = gen_path_1d({sc.nu, sc.K}, path_rng);
    const double truth = alpha.inner(path);
    const double delta = 1.0 - sc.level;

    VectorX<double> x = path.evaluate(design);
    VectorX<double> a(sc.M), f(sc.M);
    for (Index m = 0; m < sc.M; ++m) {
        a(m) = alpha(design.points()(0, m));
        f(m) = design.density(m);
    }

    Replication out;
    if (sc.sigma == 0) {
        const VectorX<double> g = a.cwiseProduct(x);
        const IntegrandEvaluations<double> ev(design, g.cwiseQuotient(f));
        const IntegrandEvaluations<double> ev_lebesgue(design, g);
        const SubsampleConfig base = subsample_config(sc, rep);
        for (const auto& method : sc.methods) {
            const Timer timer(sc.record_timing);
            if (method == "NN") {
                const auto iv = subsample_pi(ev, control_estimator(), base, delta);
                auto rec = make_record(sc, rep, method, iv.point, truth);
                attach(rec, iv);
                rec.seconds = timer.seconds();
                out.records.push_back(std::move(rec));
            } else if (method == "mean") {
                const auto iv = mean_clt_interval(ev, delta);
                auto rec = make_record(sc, rep, method, iv.point, truth);
                attach(rec, iv);
                rec.seconds = timer.seconds();
                out.records.push_back(std::move(rec));
            } else if (method == "ms") {
                SubsampleConfig cfg = base;
                cfg.rate_exponent = 0.5;
                const auto iv = subsample_pi(ev, mean_estimator(), cfg, delta);
                auto rec = make_record(sc, rep, method, iv.point, truth);
                attach(rec, iv);
                rec.seconds = timer.seconds();
                out.records.push_back(std::move(rec));
            } else if (method == "trapez") {
                SubsampleConfig cfg = base;
                cfg.rate_exponent = sc.effective_beta();
                const auto iv = subsample_pi(ev_lebesgue, trapezoid_estimator(), cfg, delta);
                auto rec = make_record(sc, rep, method, iv.point, truth);
                attach(rec, iv);
                rec.seconds = timer.seconds();
                out.records.push_back(std::move(rec));
            }
        }
        return out;
    }

    // Noisy covariate Z = X + sigma e: the integrand alpha Z / f carries
    // noise of scale |alpha| sigma / f.
    const auto z = add_noise(x, VectorX<double>::Constant(sc.M, sc.sigma), noise_rng);
    const VectorX<double> g = a.cwiseProduct(z.values);
    const VectorX<double> scale = a.cwiseAbs().cwiseProduct(z.scale).cwiseQuotient(f);
    const IntegrandEvaluations<double> ev(design, g.cwiseQuotient(f), scale);
    for (const auto& method : sc.methods) {
        const Timer timer(sc.record_timing);
        if (method == "NN") {
            const auto w = default_weights(design);
            const auto cond = clt_ci(ev, w, delta, CltMode::Conditional);
            auto rec = make_record(sc, rep, "NN", cond.point, truth);
            attach(rec, cond);
            rec.seconds = timer.seconds();
            out.records.push_back(std::move(rec));
            const Timer timer_lim(sc.record_timing);
            const auto lim = clt_ci(ev, w, delta, CltMode::Limit1d);
            auto rec_lim = make_record(sc, rep, "NN-lim", lim.point, truth);
            attach(rec_lim, lim);
            rec_lim.seconds = timer_lim.seconds();
            out.records.push_back(std::move(rec_lim));
        } else if (method == "mean") {
            const auto iv = mean_clt_interval(ev, delta);
            auto rec = make_record(sc, rep, method, iv.point, truth);
            attach(rec, iv);
            rec.seconds = timer.seconds();
            out.records.push_back(std::move(rec));
        } else if (method == "trapez") {
            const IntegrandEvaluations<double> ev_lebesgue(design, g);
            auto rec = make_record(sc, rep, method, integrate_trapezoid(ev_lebesgue), truth);
            rec.seconds = timer.seconds();
            out.records.push_back(std::move(rec));
        }
    }
    return out;
}

Replication run_scores(const Scenario& sc, int rep)
{
    const auto r = static_cast<std::uint64_t>(rep);
    Rng design_rng = make_stream(sc.seed, StreamRole::Design, r);
    Rng path_rng = make_stream(sc.seed, StreamRole::Path, r);

    const auto design = gen_uniform_design(sc.M, 2, design_rng);
    const auto surface = gen_surface_2d({sc.gamma, sc.gamma, sc.K2d, sc.K2d}, path_rng);
    const double truth = surface.diagonal_score(sc.score);
    const double delta = 1.0 - sc.level;

    VectorX<double> phi = surface.evaluate(design);
    for (Index m = 0; m < sc.M; ++m)
        phi(m) *= cosine_basis_2d(sc.score, sc.score, design.points()(0, m), design.points()(1, m));
    const IntegrandEvaluations<double> ev(design, phi);
    const SubsampleConfig base = subsample_config(sc, rep);

    Replication out;
    for (const auto& method : sc.methods) {
        const Timer timer(sc.record_timing);
        std::optional<IntervalEstimate> iv;
        if (method == "NN")
            iv = subsample_pi(ev, control_nn_estimator(), base, delta);
        else if (method == "mean")
            iv = mean_clt_interval(ev, delta);
        else if (method == "ms") {
            SubsampleConfig cfg = base;
            cfg.rate_exponent = 0.5;
            iv = subsample_pi(ev, mean_estimator(), cfg, delta);
        }
        if (!iv)
            continue;
        auto rec = make_record(sc, rep, method, iv->point, truth);
        attach(rec, *iv);
        rec.seconds = timer.seconds();
        out.records.push_back(std::move(rec));
    }
    return out;
}

void fill_log_ratios(std::vector<ExperimentRecord>& recs)
{
    std::optional<double> nn_err;
    for (const auto& r : recs)
        if (r.method == "NN")
            nn_err = r.estimate - r.truth;
    if (!nn_err)
        return;
    for (auto& r : recs)
        r.log_ratio_vs_nn = log_ratio_risk(r.estimate - r.truth, *nn_err);
}

} // namespace

ExperimentResult run_experiment(const Scenario& sc)
{
    sc.validate();
    ExperimentResult result;
    result.skipped = skipped_methods(sc);
    for (const auto& s : result.skipped)
        warn("scenario " + sc.id + ": skipping " + s);
    if (sc.effective_beta() > 1 && wants(sc, "NN"))
        warn("scenario " + sc.id + ": beta = " + std::to_string(sc.effective_beta())
             + " > 1; the rate theory covers beta <= 1");
    if (sc.reps == 0)
        return result;

    const SlopeFunction alpha = slope_alpha(sc.p, sc.K);
    std::vector<Replication> reps(static_cast<std::size_t>(sc.reps));
    auto work = [&](int first, int stride) {
        for (int rep = first; rep < sc.reps; rep += stride) {
            auto rr = sc.kind == ScenarioKind::Regression1d ? run_regression(sc, rep, alpha) : run_scores(sc, rep);
            fill_log_ratios(rr.records);
            reps[static_cast<std::size_t>(rep)] = std::move(rr);
        }
    };

    const int jobs = std::min(sc.jobs, sc.reps);
    if (jobs <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&, j] {
                try {
                    work(j, jobs);
                } catch (...) {
                    errors[static_cast<std::size_t>(j)] = std::current_exception();
                }
            });
        for (auto& t : pool)
            t.join();
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }
    for (auto& r : reps)
        for (auto& rec : r.records)
            result.records.push_back(std::move(rec));
    return result;
}

const char* const kExperimentCsvHeader
    = "scenario_id,rep,method,estimate,truth,abs_error,log_ratio_vs_nn,covered,length,seconds";

void write_csv_header(std::ostream& os)
{
    os << kExperimentCsvHeader << '\n';
}

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_csv(std::ostream& os, const std::vector<ExperimentRecord>& records, bool header)
{
    if (header)
        write_csv_header(os);
    for (const auto& r : records) {
        os << r.scenario_id << ',' << r.rep << ',' << r.method << ',' << fmt(r.estimate) << ',' << fmt(r.truth) << ','
           << fmt(r.abs_error) << ',' << (r.log_ratio_vs_nn ? fmt(*r.log_ratio_vs_nn) : "") << ','
           << (r.covered ? (*r.covered ? "1" : "0") : "") << ',' << (r.length ? fmt(*r.length) : "") << ','
           << fmt(r.seconds) << '\n';
    }
}

std::vector<MethodSummary> summarize_records(const std::vector<ExperimentRecord>& records)
{
    std::vector<std::string> order;
    for (const auto& r : records)
        if (std::find(order.begin(), order.end(), r.method) == order.end())
            order.push_back(r.method);

    std::vector<MethodSummary> out;
    for (const auto& method : order) {
        MethodSummary s;
        s.method = method;
        std::size_t n_cov = 0, n_hit = 0, n_len = 0;
        double len = 0, sq = 0;
        std::vector<double> lr;
        for (const auto& r : records) {
            if (r.method != method)
                continue;
            ++s.n;
            sq += r.abs_error * r.abs_error;
            if (r.covered) {
                ++n_cov;
                n_hit += *r.covered ? 1 : 0;
            }
            if (r.length) {
                ++n_len;
                len += *r.length;
            }
            if (r.log_ratio_vs_nn)
                lr.push_back(*r.log_ratio_vs_nn);
        }
        if (n_cov > 0)
            s.coverage = static_cast<double>(n_hit) / static_cast<double>(n_cov);
        if (n_len > 0)
            s.mean_length = len / static_cast<double>(n_len);
        if (!lr.empty())
            s.median_log_ratio = empirical_quantile(lr, 0.5);
        s.rmse = std::sqrt(sq / static_cast<double>(s.n));
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace cneigh

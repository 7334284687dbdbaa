// Command-line front end. Exit codes: 0 success, 2 usage or input error, 3 I/O error.

#include "config.hpp"

#include "cneigh/fda.hpp"
#include "cneigh/infer.hpp"
#include "cneigh/regularity.hpp"
#include "cneigh/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <thread>

using namespace cneigh;
using cneigh::cli::CsvTable;
using cneigh::cli::IoError;

namespace {

void print(const char* key, double v) { std::printf("%s\t%.17g\n", key, v); }

void print(const char* key, const std::string& v) { std::printf("%s\t%s\n", key, v.c_str()); }

struct DesignOptions {
    int dim = 1;
    std::string domain = "cube";
    std::string density = "uniform";
};

void add_design_options(CLI::App* cmd, DesignOptions& o)
{
    cmd->add_option("--dim", o.dim, "Dimension d of the domain")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--domain", o.domain, "cube ([0,1]^d, columns t1..td) or sphere (S^d, columns t1..t{d+1})")
        ->check(CLI::IsMember({"cube", "sphere"}))
        ->capture_default_str();
    cmd->add_option("--density", o.density,
                    "Design density: uniform, linear:B (f = 1 - B/2 + B t) or file:PATH (CSV t,f); non-uniform needs d = 1")
        ->capture_default_str();
}

SamplingMeasure parse_measure(const std::string& spec)
{
    if (spec == "uniform")
        return SamplingMeasure::uniform();
    if (spec.rfind("linear:", 0) == 0) {
        const std::string arg = spec.substr(7);
        char* end = nullptr;
        const double b = std::strtod(arg.c_str(), &end);
        if (arg.empty() || end != arg.c_str() + arg.size())
            throw Error("--density linear:B needs a number, got '" + arg + "'");
        return SamplingMeasure::linear(b);
    }
    if (spec.rfind("file:", 0) == 0) {
        const CsvTable t = cli::read_csv(spec.substr(5));
        if (t.rows.front().size() != 2)
            throw Error("density file needs two columns t,f");
        std::vector<double> g, f;
        for (const auto& r : t.rows) {
            g.push_back(r[0]);
            f.push_back(r[1]);
        }
        return SamplingMeasure::tabulated(std::move(g), std::move(f));
    }
    throw Error("unknown --density '" + spec + "' (uniform, linear:B, file:PATH)");
}

struct LoadedData {
    DesignSample<double> sample;
    VectorX<double> values;
    std::optional<VectorX<double>> sigma;
};

// Header names t1..tk and value are looked up; without a header the first k
// columns are coordinates and the next one holds the values.
LoadedData load_data(const std::string& path, const DesignOptions& o, const std::string& sigma_col)
{
    const CsvTable t = cli::read_csv(path);
    const Domain domain = o.domain == "sphere" ? Domain::sphere(o.dim) : Domain::cube(o.dim);
    const int k = domain.ambient_dim();
    std::vector<std::size_t> coord;
    std::size_t value = 0;
    if (t.header.empty()) {
        for (int j = 0; j < k; ++j)
            coord.push_back(static_cast<std::size_t>(j));
        value = static_cast<std::size_t>(k);
        if (t.rows.front().size() < value + 1)
            throw Error(path + ": expected at least " + std::to_string(k + 1) + " columns (t1..t" + std::to_string(k)
                        + ", value)");
    } else {
        for (int j = 1; j <= k; ++j) {
            const std::string name = "t" + std::to_string(j);
            const auto it = std::find(t.header.begin(), t.header.end(), name);
            if (it == t.header.end() && !(k == 1 && std::count(t.header.begin(), t.header.end(), "t")))
                throw Error(path + ": missing column '" + name + "'");
            coord.push_back(it != t.header.end()
                                ? static_cast<std::size_t>(it - t.header.begin())
                                : static_cast<std::size_t>(std::find(t.header.begin(), t.header.end(), "t") - t.header.begin()));
        }
        const auto it = std::find(t.header.begin(), t.header.end(), "value");
        if (it == t.header.end())
            throw Error(path + ": missing column 'value'");
        value = static_cast<std::size_t>(it - t.header.begin());
    }
    const Index M = static_cast<Index>(t.rows.size());
    MatrixX<double> pts(k, M);
    VectorX<double> v(M);
    for (Index m = 0; m < M; ++m) {
        const auto& row = t.rows[static_cast<std::size_t>(m)];
        for (int j = 0; j < k; ++j)
            pts(j, m) = row[coord[static_cast<std::size_t>(j)]];
        v(m) = row[value];
    }
    std::optional<VectorX<double>> sigma;
    if (!sigma_col.empty()) {
        const std::size_t c = cli::column_index(t, sigma_col);
        VectorX<double> s(M);
        for (Index m = 0; m < M; ++m)
            s(m) = t.rows[static_cast<std::size_t>(m)][c];
        sigma = std::move(s);
    }
    try {
        return {DesignSample<double>(domain, std::move(pts), parse_measure(o.density)), std::move(v), std::move(sigma)};
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

// Long-format curves: columns curve,t,value (header required), rows grouped by curve id.
CurveSet load_curves(const std::string& path, bool need_values = true)
{
    const CsvTable t = cli::read_csv(path);
    if (t.header.empty())
        throw Error(path + ": curve files need a header with columns curve,t" + (need_values ? ",value" : ""));
    const std::size_t ci = cli::column_index(t, "curve");
    const std::size_t ti = cli::column_index(t, "t");
    const std::optional<std::size_t> xi = need_values ? std::optional(cli::column_index(t, "value")) : std::nullopt;
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_id;
    for (const auto& r : t.rows) {
        auto& [ts, xs] = by_id[r[ci]];
        ts.push_back(r[ti]);
        xs.push_back(xi ? r[*xi] : 0.0);
    }
    CurveSet curves;
    for (auto& [id, tx] : by_id) {
        Curve c;
        c.t = Eigen::Map<VectorX<double>>(tx.first.data(), static_cast<Index>(tx.first.size()));
        c.x = Eigen::Map<VectorX<double>>(tx.second.data(), static_cast<Index>(tx.second.size()));
        curves.push_back(std::move(c));
    }
    return curves;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed)
{
    if (seed)
        return *seed;
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    print("seed", std::to_string(s));
    return s;
}

WeightSet<double> pick_weights(const std::string& method, const DesignSample<double>& s)
{
    return method == "nn-fast" ? control_weights_nn(s) : default_weights(s);
}

void check_method(const std::string& method, const DesignSample<double>& s)
{
    if (method == "trapezoid" && (s.dim() != 1 || s.domain().is_sphere()))
        throw Error("--method trapezoid requires --dim 1 on the cube");
    if (method == "trapezoid" && !s.measure().is_uniform())
        warn("the trapezoid rule targets the Lebesgue integral of the values, not the integral under the design density");
}

// --- integrate ---------------------------------------------------------------

struct IntegrateArgs {
    std::string input;
    std::string method = "nn";
    DesignOptions design;
};

int run_integrate(const IntegrateArgs& a)
{
    const LoadedData d = load_data(a.input, a.design, "");
    check_method(a.method, d.sample);
    const IntegrandEvaluations<double> ev(d.sample, d.values);
    double est = 0.0;
    std::string detail;
    if (a.method == "mean") {
        est = integrate_mean(ev);
    } else if (a.method == "trapezoid") {
        est = integrate_trapezoid(ev);
    } else {
        const auto w = pick_weights(a.method, d.sample);
        est = integrate_control(ev, w);
        detail = to_string(w.variant);
    }
    print("estimate", est);
    print("method", a.method);
    if (!detail.empty())
        print("weights", detail);
    print("M", std::to_string(d.sample.size()));
    print("domain", d.sample.domain().describe());
    print("density", d.sample.measure().describe());
    return 0;
}

// --- interval ----------------------------------------------------------------

struct IntervalArgs {
    std::string input;
    std::string mode = "pi";
    std::string method = "nn";
    double beta = 1.0;
    std::string beta_auto;
    int B = 1000;
    std::optional<Index> mstar;
    double level = 0.95;
    std::string sigma_col;
    std::string ci_mode = "conditional";
    std::optional<std::uint64_t> seed;
    DesignOptions design;
};

int run_interval(const IntervalArgs& a, bool beta_given)
{
    if (a.mode == "pi" && !a.sigma_col.empty())
        throw Error("--sigma-col is only valid with --mode ci");
    if (a.mode == "ci" && a.sigma_col.empty())
        throw Error("--mode ci requires --sigma-col");
    if (a.mode == "ci" && (beta_given || !a.beta_auto.empty() || a.mstar))
        throw Error("--beta, --beta-auto and --mstar apply to --mode pi only");
    if (beta_given && !a.beta_auto.empty())
        throw Error("--beta and --beta-auto are mutually exclusive");
    if (a.mode == "ci" && (a.method == "mean" || a.method == "trapezoid"))
        throw Error("--mode ci supports --method nn or nn-fast");

    const LoadedData d = load_data(a.input, a.design, a.sigma_col);
    check_method(a.method, d.sample);
    const double delta = 1.0 - a.level;
    IntervalEstimate iv;
    if (a.mode == "ci") {
        const IntegrandEvaluations<double> ev(d.sample, d.values, *d.sigma);
        iv = clt_ci(ev, pick_weights(a.method, d.sample), delta,
                    a.ci_mode == "limit" ? CltMode::Limit1d : CltMode::Conditional);
    } else {
        SubsampleConfig cfg;
        cfg.B = a.B;
        cfg.mstar = a.mstar;
        cfg.beta = a.beta;
        if (a.mstar && *a.mstar >= d.sample.size())
            throw Error("--mstar " + std::to_string(*a.mstar) + " must be < M = " + std::to_string(d.sample.size()));
        if (!a.beta_auto.empty()) {
            const CurveSet curves = load_curves(a.beta_auto);
            const auto reg = estimate_local_regularity(curves, regularity_grid(0.05, 0.95, 19), std::nullopt,
                                                       static_cast<double>(d.sample.size()));
            cfg.beta = std::min(1.0, reg.beta);
            print("H_min", reg.H_min);
        }
        cfg.seed = resolve_seed(a.seed);
        Estimator est;
        if (a.method == "mean") {
            est = mean_estimator();
            cfg.rate_exponent = 0.5;
        } else if (a.method == "trapezoid") {
            est = trapezoid_estimator();
            cfg.rate_exponent = cfg.beta;
        } else {
            est = a.method == "nn-fast" ? control_nn_estimator() : control_estimator();
        }
        const IntegrandEvaluations<double> ev(d.sample, d.values);
        iv = subsample_pi(ev, est, cfg, delta);
    }
    print("point", iv.point);
    print("lower", iv.lower);
    print("upper", iv.upper);
    print("level", iv.level);
    print("interval", to_string(iv.method));
    for (const auto& [k, v] : iv.meta)
        print(k.c_str(), v);
    return 0;
}

// --- regularity --------------------------------------------------------------

struct RegularityArgs {
    std::string input;
    std::optional<double> delta;
    std::optional<double> target_M;
    int grid = 19;
    double lo = 0.05;
    double hi = 0.95;
};

int run_regularity(const RegularityArgs& a)
{
    const CurveSet curves = load_curves(a.input);
    const auto r = estimate_local_regularity(curves, regularity_grid(a.lo, a.hi, a.grid), a.delta, a.target_M);
    print("delta", r.delta);
    print("H_min", r.H_min);
    print("beta", r.beta);
    std::printf("t,H,L\n");
    for (std::size_t i = 0; i < r.t_grid.size(); ++i)
        std::printf("%.17g,%.17g,%.17g\n", r.t_grid[i], r.H[i], r.L[i]);
    return 0;
}

// --- density -----------------------------------------------------------------

struct DensityArgs {
    std::string input;
    DensityConstants c;
    int grid = 0;
};

int run_density(const DensityArgs& a)
{
    const CurveSet curves = load_curves(a.input, false);
    std::vector<VectorX<double>> designs;
    for (const auto& c : curves)
        designs.push_back(c.t);
    const DensityFit fit = fit_density_threshold(designs, a.c);
    print("K_hat", std::to_string(fit.K_hat));
    print("scale", fit.scale);
    std::printf("k,theta,variance,kept\n");
    for (std::size_t k = 0; k < fit.theta.size(); ++k)
        std::printf("%zu,%.17g,%.17g,%d\n", k, fit.theta[k], fit.variance[k], fit.kept[k] ? 1 : 0);
    if (a.grid > 1) {
        std::printf("t,density\n");
        for (int i = 0; i < a.grid; ++i) {
            const double t = static_cast<double>(i) / (a.grid - 1);
            std::printf("%.17g,%.17g\n", t, fit(t));
        }
    }
    return 0;
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
    std::string config;
    std::optional<int> reps;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    bool full_scale = false;
    bool timing = false;
};

std::string fmt_opt(const std::optional<double>& v, int digits)
{
    if (!v)
        return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
    return buf;
}

int run_bench(const BenchArgs& a)
{
    cli::BenchConfig cfg = cli::load_bench_config(a.config, cli::cneigh_environment());
    if (a.reps)
        cfg.reps = *a.reps;
    if (a.out)
        cfg.out = *a.out;
    if (a.jobs)
        cfg.jobs = *a.jobs;
    if (a.seed)
        cfg.seed = a.seed;
    cfg.full_scale = cfg.full_scale || a.full_scale;
    cfg.timing = cfg.timing || a.timing;
    if (cfg.out.empty())
        throw Error("bench needs an output path (--out or [run] out)");
    if (cfg.reps < 0)
        throw Error("--reps must be >= 0");
    if (cfg.jobs <= 0)
        cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (cfg.full_scale && !a.reps)
        cfg.reps = 2000;

    std::ofstream os(cfg.out, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot write '" + cfg.out + "'");
    const std::uint64_t seed = resolve_seed(cfg.seed);

    write_csv_header(os);
    std::printf("%-14s %-8s %6s %9s %11s %12s %11s\n", "scenario", "method", "n", "coverage", "mean_len",
                "med_logratio", "rmse");
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
        Scenario sc = cfg.scenarios[i];
        sc.reps = cfg.reps;
        sc.seed = stream_seed(seed, {static_cast<std::uint64_t>(i)});
        sc.jobs = cfg.jobs;
        sc.record_timing = cfg.timing;
        if (cfg.full_scale)
            sc.B = 1000;
        sc.validate();
        const ExperimentResult r = run_experiment(sc);
        write_csv(os, r.records, false);
        for (const auto& s : r.skipped)
            std::fprintf(stderr, "note: %s: %s\n", sc.id.c_str(), s.c_str());
        for (const auto& m : summarize_records(r.records))
            std::printf("%-14s %-8s %6zu %9s %11s %12s %11.4g\n", sc.id.c_str(), m.method.c_str(), m.n,
                        fmt_opt(m.coverage, 3).c_str(), fmt_opt(m.mean_length, 4).c_str(),
                        fmt_opt(m.median_log_ratio, 3).c_str(), m.rmse);
    }
    os.flush();
    if (!os)
        throw IoError("error writing '" + cfg.out + "'");
    print("out", cfg.out);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    set_warning_handler([](std::string_view msg) { std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(msg.size()), msg.data()); });

    CLI::App app{"Control-neighbour Monte Carlo integration on random designs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cneigh 0.1.0");

    IntegrateArgs ia;
    auto* integ = app.add_subcommand("integrate", "Integrate values observed at random design points");
    integ->add_option("input", ia.input, "CSV with columns t1..td,value (header optional)")->required();
    integ->add_option("--method", ia.method,
                      "nn: unbiased leave-one-out weights on the line, single-diagram weights otherwise; "
                      "nn-fast: single-diagram weights; mean; trapezoid (d = 1)")
        ->check(CLI::IsMember({"nn", "nn-fast", "mean", "trapezoid"}))
        ->capture_default_str();
    add_design_options(integ, ia.design);

    IntervalArgs va;
    auto* inter = app.add_subcommand("interval", "Prediction (noiseless) or confidence (noisy) interval for the integral");
    inter->add_option("input", va.input, "CSV with columns t1..td,value and optionally a noise-scale column")->required();
    inter->add_option("--mode", va.mode, "pi: subsampling prediction interval; ci: Gaussian confidence interval")
        ->check(CLI::IsMember({"pi", "ci"}))
        ->capture_default_str();
    inter->add_option("--method", va.method, "Point estimator: nn, nn-fast, mean or trapezoid (pi mode)")
        ->check(CLI::IsMember({"nn", "nn-fast", "mean", "trapezoid"}))
        ->capture_default_str();
    auto* beta_opt = inter->add_option("--beta", va.beta, "Regularity exponent of the integrand (pi)")
                         ->check(CLI::PositiveNumber)
                         ->capture_default_str();
    auto* auto_opt = inter->add_option("--beta-auto", va.beta_auto,
                                       "Estimate beta from a curves CSV (curve,t,value); excludes --beta");
    beta_opt->excludes(auto_opt);
    inter->add_option("--B", va.B, "Number of subsamples (pi)")->check(CLI::Range(2, 100000000))->capture_default_str();
    inter->add_option("--mstar", va.mstar, "Subsample size, < M (pi; default floor(M/2))")->check(CLI::PositiveNumber);
    inter->add_option("--level", va.level, "Nominal level 1 - delta")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    inter->add_option("--sigma-col", va.sigma_col, "Noise-scale column, by header name or 1-based position (ci)");
    inter->add_option("--ci-mode", va.ci_mode, "conditional: sum w^2 sigma^2; limit: (5/2) mean(sigma^2) / M (d = 1)")
        ->check(CLI::IsMember({"conditional", "limit"}))
        ->capture_default_str();
    inter->add_option("--seed", va.seed, "Random seed; drawn from system entropy and printed when absent");
    add_design_options(inter, va.design);

    RegularityArgs ra;
    auto* reg = app.add_subcommand("regularity", "Local Hoelder exponents of a curve sample and the implied beta");
    reg->add_option("input", ra.input, "Curves CSV with header curve,t,value (rows grouped by curve id)")->required();
    reg->add_option("--delta", ra.delta, "Lag delta (default 8 x median within-curve spacing)")->check(CLI::PositiveNumber);
    reg->add_option("--target-M", ra.target_M, "Design size the beta is chosen for (default mean curve size)")
        ->check(CLI::PositiveNumber);
    reg->add_option("--grid", ra.grid, "Number of evaluation points")->check(CLI::PositiveNumber)->capture_default_str();
    reg->add_option("--lo", ra.lo, "First evaluation point")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    reg->add_option("--hi", ra.hi, "Last evaluation point")->check(CLI::Range(0.0, 1.0))->capture_default_str();

    DensityArgs da;
    auto* den = app.add_subcommand("density", "Thresholded cosine-series estimate of the design density");
    den->add_option("input", da.input, "Curves CSV with header curve,t (a value column is ignored)")->required();
    den->add_option("--c-th", da.c.c_th, "Keep coefficient k when theta_k^2 > c_th var_k")->capture_default_str();
    den->add_option("--c-k0", da.c.c_k0, "Cutoff intercept: K_max = c_k0 + c_k1 log(mean M)")->capture_default_str();
    den->add_option("--c-k1", da.c.c_k1, "Cutoff slope")->capture_default_str();
    den->add_option("--floor", da.c.floor, "Density floor after clipping")->check(CLI::PositiveNumber)->capture_default_str();
    den->add_option("--grid", da.grid, "Also print the fitted density at this many equispaced points");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run simulation scenarios and write per-replication records as CSV");
    bench->add_option("--config", ba.config, "INI scenario file (schema in docs/config.md)")->required();
    bench->add_option("--reps", ba.reps, "Replications per scenario (overrides [run] reps)")->check(CLI::NonNegativeNumber);
    bench->add_option("--out", ba.out, "Output CSV path (overrides [run] out)");
    bench->add_option("--jobs", ba.jobs, "Worker threads (default: available cores); output order does not depend on it")
        ->check(CLI::PositiveNumber);
    bench->add_option("--seed", ba.seed, "Master seed; drawn from system entropy and printed when absent");
    bench->add_flag("--full-scale", ba.full_scale, "2000 replications (unless --reps) and B = 1000");
    bench->add_flag("--timing", ba.timing, "Record wall-clock seconds per estimate (otherwise 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*integ)
            return run_integrate(ia);
        if (*inter)
            return run_interval(va, beta_opt->count() > 0);
        if (*reg)
            return run_regularity(ra);
        if (*den)
            return run_density(da);
        if (*bench)
            return run_bench(ba);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}

#include "doctest.h"
#include "support.hpp"

#include "cneigh/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace cneigh;

TEST_CASE("gen_design: uniform case passes a KS bound")
{
    const auto s = gen_design(10000, 0.0, std::uint64_t{1});
    CHECK(s.measure().is_uniform());
    std::vector<double> t(s.points().data(), s.points().data() + s.size());
    std::sort(t.begin(), t.end());
    double D = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double n = static_cast<double>(t.size());
        D = std::max({D, std::abs((i + 1) / n - t[i]), std::abs(i / n - t[i])});
    }
    CHECK(D < 1.36 / 100.0);
}

TEST_CASE("gen_design: linear density mean and determinism")
{
    const auto s = gen_design(100000, 0.5, std::uint64_t{2});
    CHECK(s.points().mean() == doctest::Approx(0.5 + 0.5 / 12).epsilon(0.003 / 0.5417));
    CHECK(s.density(0) == doctest::Approx(0.75 + 0.5 * s.points()(0, 0)));
    const auto a = gen_design(50, 0.3, std::uint64_t{3});
    const auto b = gen_design(50, 0.3, std::uint64_t{3});
    CHECK(a.points() == b.points());
    CHECK_THROWS(gen_design(10, 2.0, std::uint64_t{1}));
    CHECK_THROWS(gen_design(0, 0.0, std::uint64_t{1}));
}

TEST_CASE("KL paths: start at zero, Brownian variance at one")
{
    Rng rng(4);
    double acc = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto x = gen_path_1d({2.0, 200}, rng);
        CHECK(x(0.0) == 0.0);
        acc += x(1.0) * x(1.0);
    }
    CHECK(acc / n == doctest::Approx(1.0).epsilon(0.05));
    CHECK_THROWS(gen_path_1d({0.0, 50}, rng));
}

TEST_CASE("slope function and the true prediction")
{
    const auto alpha = slope_alpha(2.0, 50);
    SimulatedProcess1D e1;
    e1.scores.assign(50, 0.0);
    e1.scores[0] = 1.0;
    CHECK(alpha.inner(e1) == doctest::Approx(4.0));
    SimulatedProcess1D zero;
    zero.scores.assign(50, 0.0);
    CHECK(alpha.inner(zero) == 0.0);
    CHECK_THROWS(slope_alpha(0.5, 10));

    // Dense midpoint quadrature of alpha * X on 1e5 cells.
    Rng rng(5);
    const auto x = gen_path_1d({2.0, 50}, rng);
    const int N = 100000;
    double q = 0;
    for (int i = 0; i < N; ++i) {
        const double t = (i + 0.5) / N;
        q += alpha(t) * x(t);
    }
    CHECK(std::abs(q / N - alpha.inner(x)) < 1e-4);
}

TEST_CASE("2D surfaces: centred, reproducible, diagonal scores")
{
    Rng rng(6);
    double acc = 0, acc2 = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto x = gen_surface_2d({1.5, 1.5, 12, 12}, rng);
        const double v = x(0.5, 0.5);
        acc += v;
        acc2 += v * v;
    }
    const double mean = acc / n, se = std::sqrt((acc2 / n - mean * mean) / n);
    CHECK(std::abs(mean) < 3 * se);

    Rng r1(7), r2(7);
    const auto a = gen_surface_2d({2, 2, 12, 12}, r1);
    const auto b = gen_surface_2d({2, 2, 12, 12}, r2);
    CHECK(a.scores == b.scores);
    CHECK(a.diagonal_score(1) == a.scores(0, 0));
    CHECK_THROWS(a.diagonal_score(13));
    CHECK_THROWS(gen_surface_2d({0.5, 1, 12, 12}, r1));

    // The score is the projection on the tensor basis function.
    const int N = 400;
    double q = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double t1 = (i + 0.5) / N, t2 = (j + 0.5) / N;
            q += a(t1, t2) * cosine_basis_2d(2, 2, t1, t2);
        }
    CHECK(q / (N * N) == doctest::Approx(a.diagonal_score(2)).epsilon(1e-6).scale(1e-6));
}

TEST_CASE("explained variance, gamma = 1, K = 3")
{
    const double s = 1 + 0.25 + 1.0 / 9;
    CHECK(explained_variance_2d(1.0, 3) == doctest::Approx(std::pow(s / (std::numbers::pi * std::numbers::pi / 6), 2)));
    CHECK(explained_variance_2d(1.0, 3) == doctest::Approx(0.685).epsilon(0.002));
    CHECK(explained_variance_2d(2.0, 50) > explained_variance_2d(2.0, 5));
}

TEST_CASE("fBM covariance")
{
    Rng rng(8);
    VectorX<double> t(2);
    t << 0.5, 1.0;
    double v1 = 0, c = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto x = gen_fbm(t, 0.3, rng);
        v1 += x(1) * x(1);
        c += x(0) * x(1);
    }
    CHECK(v1 / n == doctest::Approx(1.0).epsilon(0.04));
    CHECK(c / n == doctest::Approx(0.5 * (std::pow(0.5, 0.6) + 1 - std::pow(0.5, 0.6))).epsilon(0.06));
}

TEST_CASE("add_noise")
{
    Rng rng(9);
    const VectorX<double> v = VectorX<double>::LinSpaced(10000, 0, 1);
    const auto same = add_noise(v, VectorX<double>::Zero(10000), rng);
    CHECK(same.values == v);
    const auto noisy = add_noise(v, VectorX<double>::Constant(10000, 0.1), rng);
    const VectorX<double> d = noisy.values - v;
    const double sd = std::sqrt((d.array() - d.mean()).square().sum() / 9999.0);
    CHECK(sd >= 0.098);
    CHECK(sd <= 0.102);
    Rng a(10), b(10);
    CHECK(add_noise(v, noisy.scale, a).values == add_noise(v, noisy.scale, b).values);
    CHECK_THROWS(add_noise(v, VectorX<double>::Constant(10000, -1.0), a));
}

TEST_CASE("log-ratio risk")
{
    CHECK(*log_ratio_risk(0.3, 0.3) == doctest::Approx(0.0));
    CHECK(*log_ratio_risk(std::exp(-1.0), std::exp(-3.0)) == doctest::Approx(-2.0));
    CHECK(!log_ratio_risk(0.0, 0.1));
    CHECK(!log_ratio_risk(0.1, 0.0));
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const double a = uniform01(rng) + 1e-9, b = -uniform01(rng) - 1e-9;
        CHECK(*log_ratio_risk(b, a) == doctest::Approx(std::log(std::abs(a) / std::abs(b))));
    }
}

TEST_CASE("harness: zero replications give a header-only CSV")
{
    Scenario sc;
    sc.reps = 0;
    const auto res = run_experiment(sc);
    CHECK(res.records.empty());
    std::ostringstream os;
    write_csv(os, res.records);
    CHECK(os.str() == std::string(kExperimentCsvHeader) + "\n");
}

TEST_CASE("harness: records, determinism, paired methods")
{
    Scenario sc;
    sc.M = 50;
    sc.reps = 6;
    sc.B = 40;
    sc.seed = 12;
    const auto a = run_experiment(sc);
    REQUIRE(a.records.size() == 24);
    CHECK(a.records[0].method == "NN");
    CHECK(a.records[0].rep == 0);
    CHECK(*a.records[0].log_ratio_vs_nn == 0.0);
    for (const auto& r : a.records) {
        CHECK(r.covered.has_value());
        CHECK(*r.length >= 0);
        CHECK(std::isfinite(r.estimate));
    }
    // same truth across the methods of one replication
    CHECK(a.records[0].truth == a.records[3].truth);

    sc.jobs = 3;
    const auto b = run_experiment(sc);
    std::ostringstream oa, ob;
    write_csv(oa, a.records);
    write_csv(ob, b.records);
    CHECK(oa.str() == ob.str());

    const auto summary = summarize_records(a.records);
    REQUIRE(summary.size() == 4);
    CHECK(summary[0].method == "NN");
    CHECK(summary[0].n == 6);
}

TEST_CASE("harness: noisy regression emits conditional and limit NN rows")
{
    WarningCapture cap;
    Scenario sc;
    sc.M = 60;
    sc.reps = 3;
    sc.sigma = 0.1;
    const auto res = run_experiment(sc);
    CHECK(cap.contains("ms"));
    std::vector<std::string> methods;
    for (std::size_t i = 0; i < 4; ++i)
        methods.push_back(res.records[i].method);
    CHECK(methods == std::vector<std::string>{"NN", "NN-lim", "mean", "trapez"});
    CHECK(!res.records[3].covered.has_value());
}

TEST_CASE("harness: 2D scores skip the trapezoid")
{
    WarningCapture cap;
    Scenario sc;
    sc.kind = ScenarioKind::Scores2d;
    sc.M = 40;
    sc.reps = 2;
    sc.B = 20;
    const auto res = run_experiment(sc);
    CHECK(res.skipped.size() == 1);
    CHECK(cap.contains("trapez"));
    CHECK(cap.contains("beta = 1.5"));
    CHECK(res.records.size() == 6);
    CHECK(sc.effective_beta() == 1.5);
}

TEST_CASE("harness: control neighbours beat the sample mean in median")
{
    Scenario sc;
    sc.M = 50;
    sc.reps = 200;
    sc.methods = {"NN", "mean"};
    sc.B = 2;
    const auto res = run_experiment(sc);
    const auto s = summarize_records(res.records);
    CHECK(*s[1].median_log_ratio < 0);
}

TEST_CASE("scenario validation")
{
    Scenario sc;
    sc.methods = {"NN", "simpson"};
    CHECK_THROWS(run_experiment(sc));
    sc = Scenario{};
    sc.nu = 1.0;
    CHECK_THROWS(run_experiment(sc));
    sc = Scenario{};
    sc.mstar = 200;
    CHECK_THROWS(run_experiment(sc));
    CHECK(Scenario{}.effective_beta() == 0.5);
}

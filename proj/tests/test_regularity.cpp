#include "doctest.h"
#include "support.hpp"

#include "cneigh/regularity.hpp"
#include "cneigh/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cneigh;

namespace {

VectorX<double> sorted_uniform(Index M, Rng& rng)
{
    VectorX<double> t(M);
    for (Index m = 0; m < M; ++m)
        t(m) = uniform01(rng);
    std::sort(t.data(), t.data() + M);
    return t;
}

CurveSet fbm_curves(double H, int n, Index M, std::uint64_t seed)
{
    Rng rng(seed);
    CurveSet cs;
    for (int i = 0; i < n; ++i) {
        Curve c;
        c.t = sorted_uniform(M, rng);
        c.x = gen_fbm(c.t, H, rng);
        cs.push_back(std::move(c));
    }
    return cs;
}

CurveSet kl_curves(double nu, int n, Index M, std::uint64_t seed, int K = 50)
{
    Rng rng(seed);
    CurveSet cs;
    for (int i = 0; i < n; ++i) {
        Curve c;
        c.t = sorted_uniform(M, rng);
        const auto path = gen_path_1d({nu, K}, rng);
        c.x.resize(M);
        for (Index m = 0; m < M; ++m)
            c.x(m) = path(c.t(m));
        cs.push_back(std::move(c));
    }
    return cs;
}

double mean_H(const RegularityEstimate& r)
{
    return std::accumulate(r.H.begin(), r.H.end(), 0.0) / static_cast<double>(r.H.size());
}

} // namespace

TEST_CASE("select_beta examples")
{
    CHECK(select_beta(0.5, 100) == doctest::Approx(0.5 - 1.0 / std::pow(std::log(100.0), 2)));
    CHECK(select_beta(0.5, 100) == doctest::Approx(0.4529).epsilon(1e-3));
    CHECK(select_beta(0.05, 10) == 0.01);
    CHECK(select_beta(0.6, 1000) > select_beta(0.6, 100));
    CHECK(select_beta(0.6, 1e12) < 0.6);
    CHECK(select_beta(0.6, 1e300) == doctest::Approx(0.6).epsilon(1e-3));
    CHECK_THROWS(select_beta(0.5, 2));
}

TEST_CASE("linear curves saturate at the upper clamp")
{
    Rng rng(1);
    CurveSet cs;
    for (int i = 0; i < 20; ++i) {
        Curve c;
        c.t = sorted_uniform(100, rng);
        c.x = (1.0 + i) * c.t;
        cs.push_back(std::move(c));
    }
    const auto r = estimate_local_regularity(cs, regularity_grid(0.2, 0.8, 5), 0.05);
    for (double h : r.H)
        CHECK(h == doctest::Approx(0.99));
    CHECK(r.H_min == doctest::Approx(0.99));
    CHECK(r.beta <= 1.0);
}

TEST_CASE("Brownian paths from the KL expansion give H near 1/2")
{
    const auto r = estimate_local_regularity(kl_curves(2.0, 400, 100, 2), regularity_grid(0.2, 0.8, 7));
    CHECK(mean_H(r) >= 0.45);
    CHECK(mean_H(r) <= 0.55);
    for (double L : r.L)
        CHECK(L > 0);
}

TEST_CASE("smooth KL paths saturate near one")
{
    // Increments of nu = 3 paths scale like a^2 log(1/a): the exponent is one
    // only in the limit, and the finite-lag estimate sits just below 0.9.
    const auto r = estimate_local_regularity(kl_curves(3.0, 400, 100, 3), regularity_grid(0.2, 0.8, 7));
    CHECK(mean_H(r) >= 0.85);
}

TEST_CASE("fBM with H = 0.9 is recovered")
{
    const auto r = estimate_local_regularity(fbm_curves(0.9, 400, 100, 4), regularity_grid(0.2, 0.8, 7));
    CHECK(mean_H(r) == doctest::Approx(0.9).epsilon(0.05 / 0.9));
}

TEST_CASE("nu = 1 + 2H consistency")
{
    // K = 50 paths are smooth below the scale 1/50, so rough cases need a
    // longer expansion to show their exponent at the estimator's lags.
    for (double nu : {1.6, 2.4}) {
        const auto r = estimate_local_regularity(kl_curves(nu, 400, 200, 5, 400), regularity_grid(0.2, 0.8, 7));
        CHECK(std::abs(mean_H(r) - (nu - 1) / 2) < 0.07);
    }
}

TEST_CASE("empty windows are reported with their locations")
{
    CurveSet cs;
    Curve c;
    c.t = VectorX<double>::LinSpaced(5, 0.0, 0.2);
    c.x = c.t;
    cs.push_back(c);
    cs.push_back(c);
    try {
        estimate_local_regularity(cs, {0.1, 0.6, 0.9}, 0.01);
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("0.6") != std::string::npos);
        CHECK(msg.find("0.9") != std::string::npos);
    }
}

TEST_CASE("input validation")
{
    CHECK_THROWS(estimate_local_regularity({}, {0.5}));
    Curve c;
    c.t = VectorX<double>::Constant(1, 0.5);
    c.x = VectorX<double>::Constant(1, 0.0);
    CHECK_THROWS(estimate_local_regularity({c}, {0.5}));
    CHECK(default_regularity_spacing(kl_curves(2.0, 3, 100, 6)) > 0);
}

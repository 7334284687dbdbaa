#include "cneigh/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace cneigh {

namespace {

constexpr double kHFloor = 0.01;
constexpr double kHCeil = 0.99;

struct SortedCurve {
    std::vector<double> t;
    std::vector<double> x;
};

std::vector<SortedCurve> sort_curves(const CurveSet& curves)
{
    std::vector<SortedCurve> out;
    out.reserve(curves.size());
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        if (c.t.size() != c.x.size())
            throw Error("curve " + std::to_string(i) + " has mismatched design and values");
        if (c.t.size() < 2)
            throw Error("curve " + std::to_string(i) + " needs at least two observations");
        std::vector<Index> order(static_cast<std::size_t>(c.t.size()));
        for (std::size_t k = 0; k < order.size(); ++k)
            order[k] = static_cast<Index>(k);
        std::sort(order.begin(), order.end(), [&](Index a, Index b) { return c.t(a) < c.t(b); });
        SortedCurve s;
        for (Index k : order) {
            if (!std::isfinite(c.t(k)) || !std::isfinite(c.x(k)))
                throw Error("curve " + std::to_string(i) + " has non-finite entries");
            s.t.push_back(c.t(k));
            s.x.push_back(c.x(k));
        }
        out.push_back(std::move(s));
    }
    return out;
}

// Linear interpolation of a sorted curve at `target`; empty when the target
// lies outside the observed range or inside a gap wider than `max_gap`.
std::optional<double> interpolate(const SortedCurve& c, double target, double max_gap)
{
    const auto& t = c.t;
    if (target < t.front() || target > t.back())
        return std::nullopt;
    auto it = std::lower_bound(t.begin(), t.end(), target);
    auto i = static_cast<std::size_t>(it - t.begin());
    if (t[i] == target)
        return c.x[i];
    const double gap = t[i] - t[i - 1];
    if (gap > max_gap)
        return std::nullopt;
    const double u = (target - t[i - 1]) / gap;
    return c.x[i - 1] + u * (c.x[i] - c.x[i - 1]);
}

// Window [t - a/2, t + a/2], shifted to stay inside [first, last].
std::pair<double, double> window(double t, double a, double first, double last)
{
    double lo = t - a / 2.0, hi = t + a / 2.0;
    if (lo < first) {
        lo = first;
        hi = std::min(last, first + a);
    }
    if (hi > last) {
        hi = last;
        lo = std::max(first, last - a);
    }
    return {lo, hi};
}

std::optional<double> squared_increment(const SortedCurve& c, double t, double a)
{
    const auto [lo, hi] = window(t, a, c.t.front(), c.t.back());
    if (hi - lo < a * (1.0 - 1e-12))
        return std::nullopt;
    const auto xl = interpolate(c, lo, a / 2.0), xh = interpolate(c, hi, a / 2.0);
    if (!xl || !xh)
        return std::nullopt;
    return (*xh - *xl) * (*xh - *xl);
}

struct ThetaPair {
    double small = 0.0;
    double large = 0.0;
    std::size_t n = 0;
};

// Mean squared increments at lags a and 2a over the curves usable at both
// lags, so the ratio compares the same curves.
ThetaPair theta(const std::vector<SortedCurve>& curves, double t, double a)
{
    ThetaPair th;
    for (const auto& c : curves) {
        const auto s = squared_increment(c, t, a), l = squared_increment(c, t, 2.0 * a);
        if (!s || !l)
            continue;
        th.small += *s;
        th.large += *l;
        ++th.n;
    }
    if (th.n > 0) {
        th.small /= static_cast<double>(th.n);
        th.large /= static_cast<double>(th.n);
    }
    return th;
}

} // namespace

double default_regularity_spacing(const CurveSet& curves)
{
    std::vector<double> gaps;
    for (const auto& c : sort_curves(curves))
        for (std::size_t k = 1; k < c.t.size(); ++k)
            gaps.push_back(c.t[k] - c.t[k - 1]);
    if (gaps.empty())
        throw Error("regularity estimation needs at least one curve");
    auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    return std::min(8.0 * *mid, 0.25);
}

std::vector<double> regularity_grid(double lo, double hi, int n)
{
    if (n < 1 || !(lo <= hi))
        throw Error("regularity grid needs n >= 1 and lo <= hi");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        g[static_cast<std::size_t>(k)] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (n - 1);
    return g;
}

RegularityEstimate estimate_local_regularity(const CurveSet& curves, const std::vector<double>& t_grid,
                                             std::optional<double> delta, std::optional<double> target_M)
{
    if (curves.empty())
        throw Error("regularity estimation needs at least one curve");
    if (t_grid.empty())
        throw Error("regularity estimation needs a nonempty grid");
    const auto sorted = sort_curves(curves);

    RegularityEstimate est;
    est.delta = delta.value_or(default_regularity_spacing(curves));
    if (!(est.delta > 0.0 && 2.0 * est.delta <= 1.0))
        throw Error("regularity spacing must lie in (0, 1/2]");
    est.t_grid = t_grid;

    std::vector<double> empty;
    for (double t : t_grid) {
        if (!(t >= 0.0 && t <= 1.0))
            throw Error("regularity grid point " + std::to_string(t) + " outside [0, 1]");
        const auto th = theta(sorted, t, est.delta);
        if (th.n == 0 || !(th.small > 0.0) || !(th.large > 0.0)) {
            empty.push_back(t);
            continue;
        }
        double H = std::log(th.large / th.small) / (2.0 * std::log(2.0));
        H = std::clamp(H, kHFloor, kHCeil);
        est.H.push_back(H);
        est.L.push_back(std::sqrt(th.small / std::pow(est.delta, 2.0 * H)));
    }
    if (!empty.empty()) {
        std::ostringstream msg;
        msg << "no usable increments (empty windows) at t =";
        for (double t : empty)
            msg << ' ' << t;
        throw Error(msg.str());
    }
    est.H_min = *std::min_element(est.H.begin(), est.H.end());

    double meanM = 0.0;
    for (const auto& c : curves)
        meanM += static_cast<double>(c.t.size());
    meanM /= static_cast<double>(curves.size());
    est.beta = std::min(1.0, select_beta(est.H_min, std::max(3.0, target_M.value_or(meanM))));
    return est;
}

double select_beta(double H_min, double M)
{
    if (!(M >= 3.0))
        throw Error("select_beta needs M >= 3");
    const double l = std::log(M);
    return std::max(kHFloor, H_min - 1.0 / (l * l));
}

} // namespace cneigh

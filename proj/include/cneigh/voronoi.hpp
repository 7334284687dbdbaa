#pragma once

#include "cneigh/domain.hpp"
#include "cneigh/nn_index.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

namespace cneigh {

enum class VolumeMethod { Exact1d, ExactPoly2d, MonteCarlo };

const char* to_string(VolumeMethod m) noexcept;

struct VolumeOptions {
    /// Monte Carlo draws; 0 selects max(1e5, 100 M).
    std::size_t mc_samples = 0;
    std::uint64_t seed = 0x243f6a8885a308d3ULL;
    bool force_monte_carlo = false;
};

template <typename Scalar = double>
struct VolumeEstimate {
    VectorX<Scalar> volumes;
    VolumeMethod method = VolumeMethod::Exact1d;
    std::size_t mc_samples = 0;
};

/// Geometric summary behind the control-neighbour weights: LOO-NN degrees,
/// standard Voronoi cell probabilities and (optionally) cumulative
/// leave-one-out Voronoi volumes.
template <typename Scalar = double>
struct VoronoiSummary {
    std::vector<int> degrees;
    VectorX<Scalar> std_volumes;
    std::optional<VectorX<Scalar>> loo_cum_volumes;
    VolumeMethod volume_method = VolumeMethod::Exact1d;
    std::size_t mc_samples = 0;

    /// Tolerance on the partition identities for this backend.
    double tolerance() const
    {
        if (volume_method == VolumeMethod::MonteCarlo)
            return 3.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(mc_samples, 1)));
        return 1e-12;
    }
};

inline VolumeMethod select_volume_method(const Domain& domain, const SamplingMeasure& measure, const VolumeOptions& opts)
{
    if (opts.force_monte_carlo || domain.is_sphere())
        return VolumeMethod::MonteCarlo;
    if (domain.dim == 1)
        return VolumeMethod::Exact1d;
    if (domain.dim == 2 && measure.is_uniform())
        return VolumeMethod::ExactPoly2d;
    return VolumeMethod::MonteCarlo;
}

namespace detail {

inline std::size_t default_mc_samples(Index M, const VolumeOptions& opts)
{
    if (opts.mc_samples > 0)
        return opts.mc_samples;
    return std::max<std::size_t>(100000, 100 * static_cast<std::size_t>(M));
}

/// Univariate cells. Points are visited in (coordinate, index) order;
/// coincident points form a group whose first member owns the whole cell.
template <typename Scalar>
struct Line1d {
    std::vector<Index> order;       // all points, sorted
    std::vector<Index> reps;        // group owners, sorted
    std::vector<std::vector<Index>> followers; // remaining group members per rep
    std::vector<double> bounds;     // reps.size() + 1 cell boundaries

    Line1d(const DesignSample<Scalar>& s)
    {
        const auto& p = s.points();
        order.resize(static_cast<std::size_t>(s.size()));
        std::iota(order.begin(), order.end(), Index{0});
        std::sort(order.begin(), order.end(), [&](Index a, Index b) {
            return p(0, a) < p(0, b) || (p(0, a) == p(0, b) && a < b);
        });
        for (Index id : order) {
            if (!reps.empty() && p(0, reps.back()) == p(0, id))
                followers.back().push_back(id);
            else {
                reps.push_back(id);
                followers.emplace_back();
            }
        }
        bounds.resize(reps.size() + 1);
        bounds.front() = 0.0;
        bounds.back() = 1.0;
        for (std::size_t j = 1; j < reps.size(); ++j)
            bounds[j] = coord(p, j - 1) + 0.5 * (coord(p, j) - coord(p, j - 1));
    }

    double coord(const MatrixX<Scalar>& p, std::size_t j) const { return static_cast<double>(p(0, reps[j])); }
};

/// Voronoi cell of one site clipped to [0,1]^2. Each edge remembers the site
/// whose bisector produced it (-1 for the square's sides).
template <typename Scalar>
struct Cell2d {
    std::vector<std::array<double, 2>> v;
    std::vector<Index> label;

    // Shoelace fan around the first vertex: small cells keep full relative precision.
    double area() const
    {
        double a = 0.0;
        const std::size_t n = v.size();
        const auto& o = v[0];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double px = v[i][0] - o[0], py = v[i][1] - o[1];
            const double qx = v[i + 1][0] - o[0], qy = v[i + 1][1] - o[1];
            a += px * qy - qx * py;
        }
        return 0.5 * a;
    }

    // keep { x : n . (x - mid) <= 0 }
    void clip(double nx, double ny, double mx, double my, Index site)
    {
        const std::size_t n = v.size();
        if (n == 0)
            return;
        std::vector<std::array<double, 2>> ov;
        std::vector<Index> ol;
        ov.reserve(n + 2);
        ol.reserve(n + 2);
        auto side = [&](const std::array<double, 2>& x) { return nx * (x[0] - mx) + ny * (x[1] - my); };
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cur = v[i];
            const auto& nxt = v[(i + 1) % n];
            const double sc = side(cur), sn = side(nxt);
            const bool in_c = sc <= 0.0, in_n = sn <= 0.0;
            if (in_c) {
                ov.push_back(cur);
                ol.push_back(label[i]);
                if (!in_n) {
                    const double t = sc / (sc - sn);
                    ov.push_back({cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])});
                    ol.push_back(site);
                }
            } else if (in_n) {
                const double t = sc / (sc - sn);
                ov.push_back({cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])});
                ol.push_back(label[i]);
            }
        }
        v = std::move(ov);
        label = std::move(ol);
        if (v.size() < 3) {
            v.clear();
            label.clear();
        }
    }
};

template <typename Scalar>
struct CellResult {
    double area = 0.0;
    std::vector<Index> neighbours; // sites sharing an edge
    std::vector<Index> shadowed;   // coincident sites with a larger index
};

/// Exact clipped cell of site i, optionally pretending site `excluded` was
/// deleted. Candidates are taken in increasing distance until the next one
/// is farther than twice the cell's circumradius around the site.
template <typename Scalar>
CellResult<Scalar> clip_cell(const NNIndex<Scalar>& index, Index i, Index excluded = NNIndex<Scalar>::npos)
{
    const auto& P = index.points();
    const double px = static_cast<double>(P(0, i)), py = static_cast<double>(P(1, i));
    Cell2d<Scalar> cell;
    cell.v = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    cell.label = {-1, -1, -1, -1};

    CellResult<Scalar> res;
    const Index avail = index.size() - 1 - (excluded != NNIndex<Scalar>::npos && excluded != i ? 1 : 0);
    Index k = std::min<Index>(16, avail);
    std::size_t done = 0;
    const VectorX<Scalar> q = P.col(i);
    while (avail > 0) {
        std::vector<Index> ids;
        {
            const Index extra = (excluded != NNIndex<Scalar>::npos && excluded != i) ? 1 : 0;
            auto raw = index.k_nearest(q, k + extra, i);
            ids.reserve(raw.size());
            for (Index id : raw)
                if (id != excluded)
                    ids.push_back(id);
            if (static_cast<Index>(ids.size()) > k)
                ids.resize(static_cast<std::size_t>(k));
        }
        for (std::size_t c = done; c < ids.size(); ++c) {
            const Index j = ids[c];
            const double nx = static_cast<double>(P(0, j)) - px, ny = static_cast<double>(P(1, j)) - py;
            if (nx == 0.0 && ny == 0.0) {
                if (j < i) {
                    res.area = 0.0;
                    res.neighbours.clear();
                    return res;
                }
                res.shadowed.push_back(j);
                continue;
            }
            cell.clip(nx, ny, px + 0.5 * nx, py + 0.5 * ny, j);
        }
        double last_d2 = 0.0;
        if (!ids.empty()) {
            const Index j = ids.back();
            const double nx = static_cast<double>(P(0, j)) - px, ny = static_cast<double>(P(1, j)) - py;
            last_d2 = nx * nx + ny * ny;
        }
        done = ids.size();
        if (static_cast<Index>(done) >= avail || cell.v.empty())
            break;
        double r2 = 0.0;
        for (const auto& x : cell.v)
            r2 = std::max(r2, (x[0] - px) * (x[0] - px) + (x[1] - py) * (x[1] - py));
        if (last_d2 >= 4.0 * r2)
            break;
        k = std::min<Index>(2 * k, avail);
    }
    res.area = cell.v.empty() ? 0.0 : cell.area();
    for (Index l : cell.label)
        if (l >= 0 && std::find(res.neighbours.begin(), res.neighbours.end(), l) == res.neighbours.end())
            res.neighbours.push_back(l);
    return res;
}

/// Monte Carlo owner counts: nearest and (optionally) second-nearest site of
/// each draw from the sampling measure.
template <typename Scalar>
void monte_carlo_counts(const DesignSample<Scalar>& s, const NNIndex<Scalar>& index, std::size_t n, std::uint64_t seed,
                        std::vector<std::size_t>& first, std::vector<std::size_t>* second)
{
    first.assign(static_cast<std::size_t>(s.size()), 0);
    if (second)
        second->assign(static_cast<std::size_t>(s.size()), 0);
    Rng rng = make_stream(seed, StreamRole::Volume, static_cast<std::uint64_t>(s.size()));
    VectorX<Scalar> q(s.domain().ambient_dim());
    for (std::size_t draw = 0; draw < n; ++draw) {
        const VectorX<double> x = s.measure().draw(s.domain(), rng);
        for (Index r = 0; r < q.size(); ++r)
            q(r) = static_cast<Scalar>(x(r));
        if (!std::isfinite(s.measure().density_at(x)))
            throw Error("non-finite density evaluation in Monte Carlo volumes");
        if (second) {
            const auto [a, b] = index.nearest_two(q);
            ++first[static_cast<std::size_t>(a)];
            ++(*second)[static_cast<std::size_t>(b)];
        } else {
            ++first[static_cast<std::size_t>(index.nearest(q))];
        }
    }
}

} // namespace detail

/// d_l = #{ m != l : the leave-one-out nearest neighbour of T_m is T_l }.
template <typename Scalar>
std::vector<int> degrees(const DesignSample<Scalar>& sample, const NNIndex<Scalar>& index)
{
    if (sample.size() < 2)
        throw Error("insufficient points for LOO query");
    std::vector<int> deg(static_cast<std::size_t>(sample.size()), 0);
    for (Index m = 0; m < sample.size(); ++m)
        ++deg[static_cast<std::size_t>(index.nearest_excluding(sample.points().col(m), m))];
    return deg;
}

template <typename Scalar>
std::vector<int> degrees(const DesignSample<Scalar>& sample)
{
    if (sample.size() < 2)
        throw Error("insufficient points for LOO query");
    return degrees(sample, NNIndex<Scalar>(sample.points()));
}

/// Probability, under the sampling measure, of each standard Voronoi cell.
template <typename Scalar>
VolumeEstimate<Scalar> voronoi_volumes(const DesignSample<Scalar>& sample, const NNIndex<Scalar>& index,
                                       const VolumeOptions& opts = {})
{
    const Index M = sample.size();
    VolumeEstimate<Scalar> out;
    out.method = select_volume_method(sample.domain(), sample.measure(), opts);
    out.volumes = VectorX<Scalar>::Zero(M);
    if (M == 1 && out.method != VolumeMethod::MonteCarlo) {
        out.volumes(0) = Scalar(1);
        return out;
    }
    switch (out.method) {
    case VolumeMethod::Exact1d: {
        const detail::Line1d<Scalar> line(sample);
        const auto& F = sample.measure();
        for (std::size_t j = 0; j < line.reps.size(); ++j) {
            const double v = F.cdf(line.bounds[j + 1]) - F.cdf(line.bounds[j]);
            if (!std::isfinite(v))
                throw Error("non-finite density evaluation in Voronoi volumes");
            out.volumes(line.reps[j]) = static_cast<Scalar>(v);
        }
        break;
    }
    case VolumeMethod::ExactPoly2d:
        for (Index i = 0; i < M; ++i)
            out.volumes(i) = static_cast<Scalar>(detail::clip_cell(index, i).area);
        break;
    case VolumeMethod::MonteCarlo: {
        const std::size_t n = detail::default_mc_samples(M, opts);
        std::vector<std::size_t> counts;
        detail::monte_carlo_counts(sample, index, n, opts.seed, counts, nullptr);
        for (Index i = 0; i < M; ++i)
            out.volumes(i) = static_cast<Scalar>(static_cast<double>(counts[static_cast<std::size_t>(i)]) / static_cast<double>(n));
        out.mc_samples = n;
        break;
    }
    }
    return out;
}

template <typename Scalar>
VolumeEstimate<Scalar> voronoi_volumes(const DesignSample<Scalar>& sample, const VolumeOptions& opts = {})
{
    return voronoi_volumes(sample, NNIndex<Scalar>(sample.points()), opts);
}

/// Cumulative leave-one-out Voronoi volumes c_l = sum_{m != l} V^{(m)}_l.
///
/// Deleting site m only changes the cells adjacent to m, so c_l starts from
/// (M-1) V_l and collects the gain of l over the deletions of its
/// neighbours: sorted neighbours in 1D (O(M log M)), edge-sharing cells for
/// the exact 2D diagram. The Monte Carlo path reuses one set of draws for all
/// M deleted diagrams: a draw owned by m moves to its second-nearest site.
template <typename Scalar>
VolumeEstimate<Scalar> loo_cumulative_volumes(const DesignSample<Scalar>& sample, const NNIndex<Scalar>& index,
                                              const VolumeEstimate<Scalar>& base, const VolumeOptions& opts = {})
{
    const Index M = sample.size();
    if (M < 2)
        throw Error("insufficient points for LOO query");
    VolumeEstimate<Scalar> out;
    out.method = base.method;
    out.mc_samples = base.mc_samples;
    const auto& V = base.volumes;
    VectorX<double> c = (static_cast<double>(M - 1) * V.template cast<double>()).eval();

    switch (out.method) {
    case VolumeMethod::Exact1d: {
        const detail::Line1d<Scalar> line(sample);
        const auto& F = sample.measure();
        const std::size_t R = line.reps.size();
        for (std::size_t j = 0; j < R; ++j) {
            const Index r = line.reps[j];
            const double vr = static_cast<double>(V(r));
            if (!line.followers[j].empty()) {
                // next coincident point inherits the cell unchanged
                c(line.followers[j].front()) += vr;
                continue;
            }
            const double lo = j > 0 ? line.coord(sample.points(), j - 1) : 0.0;
            const double hi = j + 1 < R ? line.coord(sample.points(), j + 1) : 1.0;
            const double mid = (j > 0 && j + 1 < R) ? lo + 0.5 * (hi - lo) : (j > 0 ? 1.0 : 0.0);
            if (j > 0)
                c(line.reps[j - 1]) += F.cdf(mid) - F.cdf(line.bounds[j]);
            if (j + 1 < R)
                c(line.reps[j + 1]) += F.cdf(line.bounds[j + 1]) - F.cdf(mid);
        }
        break;
    }
    case VolumeMethod::ExactPoly2d:
        for (Index m = 0; m < M; ++m) {
            const auto cell = detail::clip_cell(index, m);
            auto affected = cell.neighbours;
            affected.insert(affected.end(), cell.shadowed.begin(), cell.shadowed.end());
            for (Index l : affected)
                c(l) += detail::clip_cell(index, l, m).area - static_cast<double>(V(l));
        }
        break;
    case VolumeMethod::MonteCarlo: {
        const std::size_t n = base.mc_samples;
        std::vector<std::size_t> first, second;
        detail::monte_carlo_counts(sample, index, n, opts.seed, first, &second);
        for (Index l = 0; l < M; ++l) {
            const double v1 = static_cast<double>(first[static_cast<std::size_t>(l)]) / static_cast<double>(n);
            const double v2 = static_cast<double>(second[static_cast<std::size_t>(l)]) / static_cast<double>(n);
            c(l) = static_cast<double>(M - 1) * v1 + v2;
        }
        break;
    }
    }
    out.volumes = c.cast<Scalar>();
    return out;
}

template <typename Scalar>
VolumeEstimate<Scalar> loo_cumulative_volumes(const DesignSample<Scalar>& sample, const VolumeOptions& opts = {})
{
    if (sample.size() < 2)
        throw Error("insufficient points for LOO query");
    const NNIndex<Scalar> index(sample.points());
    return loo_cumulative_volumes(sample, index, voronoi_volumes(sample, index, opts), opts);
}

/// Degrees, standard volumes and, if requested, cumulative LOO volumes from
/// one shared index.
template <typename Scalar>
VoronoiSummary<Scalar> summarize(const DesignSample<Scalar>& sample, const VolumeOptions& opts, bool with_loo)
{
    const NNIndex<Scalar> index(sample.points());
    VoronoiSummary<Scalar> s;
    s.degrees = degrees(sample, index);
    auto vol = voronoi_volumes(sample, index, opts);
    if (with_loo)
        s.loo_cum_volumes = loo_cumulative_volumes(sample, index, vol, opts).volumes;
    s.std_volumes = std::move(vol.volumes);
    s.volume_method = vol.method;
    s.mc_samples = vol.mc_samples;
    return s;
}

} // namespace cneigh

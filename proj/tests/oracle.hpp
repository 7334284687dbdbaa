// Brute-force reference computations, written independently of the library
// internals: plain loops over all points, no spatial index, no shortcuts.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;

inline bool lex_before(const Mat& p, long a, long b)
{
    for (long k = 0; k < p.rows(); ++k) {
        if (p(k, a) < p(k, b))
            return true;
        if (p(k, a) > p(k, b))
            return false;
    }
    return a < b;
}

// Nearest column of p to q among ids != excluded; ties go lexicographically.
inline long nearest(const Mat& p, const Eigen::VectorXd& q, long excluded)
{
    long best = -1;
    double bd = 0;
    for (long i = 0; i < p.cols(); ++i) {
        if (i == excluded)
            continue;
        const double d = (p.col(i) - q).squaredNorm();
        if (best < 0 || d < bd || (d == bd && lex_before(p, i, best))) {
            best = i;
            bd = d;
        }
    }
    return best;
}

inline std::vector<int> degrees(const Mat& p)
{
    std::vector<int> d(static_cast<std::size_t>(p.cols()), 0);
    for (long m = 0; m < p.cols(); ++m)
        ++d[static_cast<std::size_t>(nearest(p, p.col(m), m))];
    return d;
}

// Uniform Voronoi lengths on [0,1] of the listed points (distinct values).
inline std::vector<double> volumes_1d(const std::vector<double>& t)
{
    const std::size_t n = t.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lo = 0, hi = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            const double mid = 0.5 * (t[i] + t[j]);
            if (t[j] < t[i])
                lo = std::max(lo, mid);
            else
                hi = std::min(hi, mid);
        }
        v[i] = std::max(0.0, hi - lo);
    }
    return v;
}

// Area of the Voronoi cell of point i in [0,1]^2, clipping the unit square by
// the bisector half-plane of every other point.
inline double cell_area_2d(const std::vector<std::array<double, 2>>& pts, std::size_t i)
{
    using P = std::array<double, 2>;
    std::vector<P> poly = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const P a = pts[i];
    for (std::size_t j = 0; j < pts.size() && !poly.empty(); ++j) {
        if (j == i)
            continue;
        const P b = pts[j];
        // keep x with |x-a|^2 <= |x-b|^2  <=>  n.x <= c
        const double nx = b[0] - a[0], ny = b[1] - a[1];
        const double c = 0.5 * (b[0] * b[0] + b[1] * b[1] - a[0] * a[0] - a[1] * a[1]);
        std::vector<P> out;
        for (std::size_t k = 0; k < poly.size(); ++k) {
            const P u = poly[k], w = poly[(k + 1) % poly.size()];
            const double fu = nx * u[0] + ny * u[1] - c, fw = nx * w[0] + ny * w[1] - c;
            if (fu <= 0)
                out.push_back(u);
            if ((fu < 0 && fw > 0) || (fu > 0 && fw < 0)) {
                const double s = fu / (fu - fw);
                out.push_back({u[0] + s * (w[0] - u[0]), u[1] + s * (w[1] - u[1])});
            }
        }
        poly = std::move(out);
    }
    double area = 0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const P u = poly[k], w = poly[(k + 1) % poly.size()];
        area += u[0] * w[1] - w[0] * u[1];
    }
    return std::abs(area) / 2;
}

inline std::vector<double> volumes(const Mat& p)
{
    std::vector<double> v(static_cast<std::size_t>(p.cols()));
    if (p.rows() == 1) {
        std::vector<double> t(p.row(0).data(), p.row(0).data() + p.cols());
        return volumes_1d(t);
    }
    std::vector<std::array<double, 2>> pts;
    for (long m = 0; m < p.cols(); ++m)
        pts.push_back({p(0, m), p(1, m)});
    for (std::size_t i = 0; i < pts.size(); ++i)
        v[i] = cell_area_2d(pts, i);
    return v;
}

// c_l = sum over deleted m != l of the volume of l in the diagram without m.
inline std::vector<double> loo_cumulative(const Mat& p)
{
    const long M = p.cols();
    std::vector<double> c(static_cast<std::size_t>(M), 0.0);
    for (long m = 0; m < M; ++m) {
        Mat q(p.rows(), M - 1);
        std::vector<long> ids;
        for (long l = 0; l < M; ++l)
            if (l != m) {
                q.col(static_cast<long>(ids.size())) = p.col(l);
                ids.push_back(l);
            }
        const auto v = volumes(q);
        for (std::size_t k = 0; k < ids.size(); ++k)
            c[static_cast<std::size_t>(ids[k])] += v[k];
    }
    return c;
}

inline Eigen::VectorXd unbiased_weights(const Mat& p)
{
    const long M = p.cols();
    const auto d = degrees(p);
    const auto c = loo_cumulative(p);
    Eigen::VectorXd w(M);
    for (long m = 0; m < M; ++m)
        w(m) = (1.0 + c[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(m)]) / static_cast<double>(M);
    return w;
}

inline Eigen::VectorXd nn_weights(const Mat& p)
{
    const long M = p.cols();
    const auto d = degrees(p);
    const auto v = volumes(p);
    Eigen::VectorXd w(M);
    for (long m = 0; m < M; ++m)
        w(m) = (1.0 + static_cast<double>(M) * v[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(m)])
               / static_cast<double>(M);
    return w;
}

} // namespace oracle

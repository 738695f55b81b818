#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "renyi/eatrate.hpp"

namespace renyi::oracle {

// Minimises f over the probability simplex where violation(x) <= 0: a full grid with
// `resolution` steps per coordinate, then local grids of radius 4 with halving steps. Each
// level accepts points violating the constraints by at most slack * step, so thin feasible
// wedges still contain lattice points; the slack vanishes with the step.
inline double simplex_grid_min(std::size_t n, const std::function<double(const std::vector<double>&)>& f,
                               const std::function<double(const std::vector<double>&)>& violation, int resolution,
                               double slack = 2.0, std::vector<double>* argmin = nullptr) {
    std::vector<double> best_x;
    double best = std::numeric_limits<double>::infinity();
    double h = 1.0 / resolution;
    std::vector<int> k(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == n) {
            k[i] = left;
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = static_cast<double>(k[j]) / resolution;
            if (violation(x) > slack * h) return;
            const double v = f(x);
            if (v < best) {
                best = v;
                best_x = x;
            }
            return;
        }
        for (int a = 0; a <= left; ++a) {
            k[i] = a;
            rec(i + 1, left - a);
        }
    };
    rec(0, resolution);
    if (best_x.empty()) return best;
    const int radius = 4;
    for (; h > 1e-14; h *= 0.5) {
        for (int moves = 0; moves < 1000; ++moves) {
            const auto centre = best_x;
            const bool centre_ok = violation(centre) <= slack * h;
            double local = std::numeric_limits<double>::infinity();
            std::vector<double> local_x;
            std::vector<int> off(n - 1, -radius);
            while (true) {
                std::vector<double> x = centre;
                double last = centre[n - 1];
                for (std::size_t j = 0; j + 1 < n; ++j) {
                    x[j] += off[j] * h;
                    last -= off[j] * h;
                }
                x[n - 1] = last;
                if (std::all_of(x.begin(), x.end(), [](double v) { return v >= -1e-15; })) {
                    for (auto& v : x) v = std::max(0.0, v);
                    if (violation(x) <= slack * h) {
                        const double v = f(x);
                        if (v < local) {
                            local = v;
                            local_x = x;
                        }
                    }
                }
                std::size_t j = 0;
                while (j + 1 < n && off[j] == radius) off[j++] = -radius;
                if (j + 1 >= n) break;
                ++off[j];
            }
            if (local_x.empty()) break;
            if (centre_ok && local >= best - 1e-16 * std::abs(best)) break;
            best = local;
            best_x = local_x;
        }
    }
    if (argmin) *argmin = best_x;
    return best;
}

inline double inner_grid(const Distribution& p, double h, const ConstraintSet& cs, double alpha, std::size_t bottom,
                         int resolution = 200) {
    auto f = [&](const std::vector<double>& v) { return inner_objective(v, p, h, alpha, bottom); };
    auto violation = [&](const std::vector<double>& v) { return cs.violation(v); };
    return simplex_grid_min(p.size(), f, violation, resolution);
}

// Vertices of {v >= 0, sum v = 1, g_k . v >= t_k}, by solving every choice of n - 1 active
// inequalities together with the normalisation.
inline std::vector<std::vector<double>> polytope_vertices(const ConstraintSet& cs) {
    const std::size_t n = cs.alphabet;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> e(n, 0.0);
        e[i] = 1.0;
        rows.push_back(e);
        rhs.push_back(0.0);
    }
    for (std::size_t k = 0; k < cs.size(); ++k) {
        rows.push_back(cs.g[k]);
        rhs.push_back(cs.t[k]);
    }
    std::vector<std::vector<double>> out;
    const std::size_t m = rows.size();
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n - 1), true);
    std::sort(pick.begin(), pick.end());
    do {
        std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
        for (std::size_t j = 0; j < n; ++j) a[0][j] = 1.0;
        a[0][n] = 1.0;
        std::size_t r = 1;
        for (std::size_t i = 0; i < m; ++i)
            if (pick[i]) {
                for (std::size_t j = 0; j < n; ++j) a[r][j] = rows[i][j];
                a[r][n] = rhs[i];
                ++r;
            }
        bool singular = false;
        for (std::size_t c = 0; c < n && !singular; ++c) {
            std::size_t piv = c;
            for (std::size_t i = c + 1; i < n; ++i)
                if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
            if (std::abs(a[piv][c]) < 1e-12) {
                singular = true;
                break;
            }
            std::swap(a[c], a[piv]);
            for (std::size_t i = 0; i < n; ++i) {
                if (i == c) continue;
                const double f = a[i][c] / a[c][c];
                for (std::size_t j = c; j <= n; ++j) a[i][j] -= f * a[c][j];
            }
        }
        if (singular) continue;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i][n] / a[i][i];
        if (std::any_of(v.begin(), v.end(), [](double x) { return x < -1e-12; })) continue;
        for (auto& x : v) x = std::max(0.0, x);
        if (cs.violation(v) > 1e-12) continue;
        out.push_back(v);
    } while (std::next_permutation(pick.begin(), pick.end()));
    return out;
}

// Pairwise Frank-Wolfe over the vertex hull for min KL(v||p)/(alpha-1) + v(bottom) h (base-2
// logs). Returns {upper, lower}: the objective at the final iterate and that value minus the
// Frank-Wolfe gap, which brackets the true minimum by convexity.
inline std::pair<double, double> inner_frank_wolfe(const Distribution& p, double h, const ConstraintSet& cs,
                                                   double alpha, std::size_t bottom, int iterations = 20000) {
    const auto verts = polytope_vertices(cs);
    const std::size_t n = p.size();
    if (verts.empty()) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    std::vector<double> w(verts.size(), 1.0 / static_cast<double>(verts.size()));
    auto point = [&] {
        std::vector<double> v(n, 0.0);
        for (std::size_t i = 0; i < verts.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) v[j] += w[i] * verts[i][j];
        return v;
    };
    auto value = [&](const std::vector<double>& v) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (v[j] > 0.0) d += v[j] * std::log2(v[j] / p[j]);
        return d / (alpha - 1.0) + v[bottom] * h;
    };
    auto gradient = [&](const std::vector<double>& v) {
        std::vector<double> g(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = std::max(v[j], 1e-300);
            g[j] = (std::log2(x / p[j]) + 1.0 / std::log(2.0)) / (alpha - 1.0) + (j == bottom ? h : 0.0);
        }
        return g;
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    double lower = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < iterations; ++it) {
        const auto v = point();
        const auto g = gradient(v);
        std::size_t to = 0, from = verts.size();
        for (std::size_t i = 0; i < verts.size(); ++i) {
            if (dot(g, verts[i]) < dot(g, verts[to])) to = i;
            if (w[i] > 0.0 && (from == verts.size() || dot(g, verts[i]) > dot(g, verts[from]))) from = i;
        }
        const double gap = dot(g, v) - dot(g, verts[to]);
        lower = std::max(lower, value(v) - gap);
        if (gap < 1e-13 || from == to) break;
        std::vector<double> dir(n);
        for (std::size_t j = 0; j < n; ++j) dir[j] = verts[to][j] - verts[from][j];
        // bisection on the directional derivative along the pairwise direction
        double lo = 0.0, hi = w[from];
        for (int b = 0; b < 100; ++b) {
            const double mid = 0.5 * (lo + hi);
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = v[j] + mid * dir[j];
            if (dot(gradient(x), dir) < 0.0) lo = mid;
            else hi = mid;
        }
        double step = lo;
        {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = v[j] + hi * dir[j];
            std::vector<double> y(n);
            for (std::size_t j = 0; j < n; ++j) y[j] = v[j] + lo * dir[j];
            if (value(x) <= value(y)) step = hi;
        }
        w[from] -= step;
        w[to] += step;
        if (w[from] < 1e-17) w[from] = 0.0;
    }
    return {value(point()), lower};
}

}  // namespace renyi::oracle

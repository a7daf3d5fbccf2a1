#pragma once

// Adaptive Gauss-Kronrod (G7/K15) quadrature, worst-panel-first. The panel
// error is taken as |K15 - G7|, which overestimates the Kronrod error, so
// the reported error bound is conservative.

#include <cmath>
#include <algorithm>
#include <queue>
#include <vector>

#include "latcurrent/errors.hpp"

namespace latcurrent {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    bool converged = false;
};

namespace detail {

// Positive K15 abscissae; every second one is also a G7 node.
inline constexpr double kGk15Nodes[8] = {
    0.0,
    0.2077849550078985,
    0.4058451513773972,
    0.5860872354676911,
    0.7415311855993944,
    0.8648644233597691,
    0.9491079123427585,
    0.9914553711208126,
};
inline constexpr double kK15Weights[8] = {
    0.2094821410847278, 0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299785, 0.0229353220105292,
};
inline constexpr double kG7Weights[8] = {
    0.4179591836734694, 0.0, 0.3818300505051189, 0.0,
    0.2797053914892767, 0.0, 0.1294849661688697, 0.0,
};

template <class F>
inline void gk15_panel(F&& f, double a, double b, double& value, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double k15 = 0.0, g7 = 0.0;
    const double f0 = f(mid);
    k15 += kK15Weights[0] * f0;
    g7 += kG7Weights[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGk15Nodes[i];
        const double fi = f(mid + dx) + f(mid - dx);
        k15 += kK15Weights[i] * fi;
        g7 += kG7Weights[i] * fi;
    }
    value = k15 * half;
    err = std::abs((k15 - g7) * half);
}

}  // namespace detail

// Integrate f over [a, b]; refines until total error <= max(abs_tol,
// rel_tol * |value|). Initial panels are no wider than max_initial_width and
// additionally split at the supplied breakpoints, so localized structure
// (resolvent resonances) is not stepped over.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                    double rel_tol = 0.0, int max_panels = 200000,
                                    double max_initial_width = 0.25,
                                    const std::vector<double>& breakpoints = {}) {
    if (!(b > a)) throw ValidationError("integrate_adaptive: need b > a");

    struct Panel {
        double err, a, b, value;
        bool operator<(const Panel& o) const {
            if (err != o.err) return err < o.err;
            return a < o.a;  // deterministic tie-break
        }
    };

    std::vector<double> edges{a, b};
    for (double x : breakpoints)
        if (x > a && x < b) edges.push_back(x);
    std::sort(edges.begin(), edges.end());

    QuadratureResult res;
    std::priority_queue<Panel> queue;
    double total_value = 0.0, total_err = 0.0;
    int initial = 0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        if (!(edges[k + 1] > edges[k])) continue;
        const int pieces = std::max(
            1, static_cast<int>(std::ceil((edges[k + 1] - edges[k]) / max_initial_width)));
        for (int i = 0; i < pieces; ++i) {
            const double pa = edges[k] + (edges[k + 1] - edges[k]) * i / pieces;
            const double pb = edges[k] + (edges[k + 1] - edges[k]) * (i + 1) / pieces;
            double value, err;
            detail::gk15_panel(f, pa, pb, value, err);
            res.evaluations += 15;
            total_value += value;
            total_err += err;
            queue.push({err, pa, pb, value});
            ++initial;
        }
    }

    int panels = initial;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total_value)) &&
           panels < max_panels && !queue.empty()) {
        const Panel worst = queue.top();
        queue.pop();
        total_value -= worst.value;
        total_err -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        for (const auto& [pa, pb] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
            double value, err;
            detail::gk15_panel(f, pa, pb, value, err);
            res.evaluations += 15;
            total_value += value;
            total_err += err;
            queue.push({err, pa, pb, value});
        }
        ++panels;
    }

    res.value = total_value;
    res.error = total_err;
    res.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total_value));
    return res;
}

}  // namespace latcurrent

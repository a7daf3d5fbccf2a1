#pragma once

// Least-squares decay fits in log and log-log coordinates.

#include <cmath>
#include <vector>

#include "latcurrent/errors.hpp"

namespace latcurrent {

struct FitResult {
    double rate = 0.0;       // decay rate (exponential) or exponent (power law)
    double prefactor = 0.0;  // fitted amplitude
    double r_squared = 0.0;
    double rate_std_error = 0.0;
    bool valid = false;  // false when the data cannot be log-transformed
};

namespace detail {

struct LineFit {
    double slope, intercept, r_squared, slope_std_error;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ValidationError("fit: abscissae are all equal");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ss_res += r * r;
    }
    const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    const double se =
        n > 2 ? std::sqrt(std::max(0.0, ss_res / (static_cast<double>(n) - 2.0)) / sxx) : 0.0;
    return {slope, intercept, r2, se};
}

inline FitResult log_fit(const std::vector<double>& x, const std::vector<double>& values,
                         bool log_x) {
    FitResult out;
    if (x.size() != values.size()) throw ValidationError("fit: size mismatch");
    if (x.size() < 4) throw ValidationError("fit: need at least 4 points");
    std::vector<double> tx, ty;
    tx.reserve(x.size());
    ty.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) return out;  // not applicable marker
        tx.push_back(log_x ? std::log(x[i]) : x[i]);
        ty.push_back(std::log(values[i]));
    }
    const LineFit lf = least_squares_line(tx, ty);
    out.rate = -lf.slope;
    out.prefactor = std::exp(lf.intercept);
    out.r_squared = lf.r_squared;
    out.rate_std_error = lf.slope_std_error;
    out.valid = true;
    return out;
}

}  // namespace detail

// Fit values ~ prefactor * exp(-rate * N).
inline FitResult fit_exponential_rate(const std::vector<double>& ns,
                                      const std::vector<double>& values) {
    return detail::log_fit(ns, values, /*log_x=*/false);
}

// Fit values ~ prefactor * N^{-exponent}; `rate` holds the exponent.
inline FitResult fit_power_law(const std::vector<double>& ns, const std::vector<double>& values) {
    return detail::log_fit(ns, values, /*log_x=*/true);
}

}  // namespace latcurrent

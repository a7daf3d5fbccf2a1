#pragma once

// Exact stationary currents for zero potential and the strong-noise
// asymptotics. These serve as oracles for every numerical route.
// Evaluated in long double so the rational expressions stay clean out to
// very large N.

#include "latcurrent/coupling.hpp"
#include "latcurrent/errors.hpp"
#include "latcurrent/lattice.hpp"

namespace latcurrent {

// J_beta(N) = 2 Delta / (zl + zr + zl zr (zl + zr + beta (N-1))), v = 0.
inline double closed_form_1d(const CouplingSpec& c, long n) {
    c.require_two_sided();
    if (n < 2) throw ValidationError("closed_form_1d: need N >= 2");
    const long double zl = c.zeta_l();
    const long double zr = c.zeta_r();
    const long double num = 2.0L * static_cast<long double>(c.delta());
    const long double den =
        zl + zr + zl * zr * (zl + zr + static_cast<long double>(c.beta) * (n - 1));
    return static_cast<double>(num / den);
}

// d-dimensional box with v = 0: the 1D law times the cross section.
inline double closed_form_dd(const CouplingSpec& c, const LatticeSpec& lattice) {
    lattice.validate();
    c.require_two_sided();
    if (lattice.length() < 2) throw ValidationError("closed_form_dd: need N1 >= 2");
    const long double zl = c.zeta_l();
    const long double zr = c.zeta_r();
    const long double num = 2.0L * static_cast<long double>(c.delta()) *
                            static_cast<long double>(lattice.cross_section());
    const long double den =
        (static_cast<long double>(c.beta) * (lattice.length() - 1) + zl + zr) * zl * zr + zl + zr;
    return static_cast<double>(num / den);
}

// Current in the (Gamma, mu, gamma) parametrization; algebraically equal to
// closed_form_1d under znidaric_couplings.
inline double znidaric_current(double Gamma, double mu, double gamma, long n) {
    if (!(Gamma > 0.0)) throw ValidationError("znidaric_current: Gamma must be > 0");
    if (gamma < 0.0) throw ValidationError("znidaric_current: gamma must be >= 0");
    if (n < 2) throw ValidationError("znidaric_current: need N >= 2");
    const long double g = Gamma;
    return static_cast<double>(-static_cast<long double>(mu) /
                               (g + 1.0L / g + static_cast<long double>(gamma) * (n - 1)));
}

// lim_{beta->inf} beta * J_beta(N) = 2 Delta / (zl zr (N-1)).
inline double strong_noise_leading(const CouplingSpec& c, long n) {
    c.require_two_sided();
    if (n < 2) throw ValidationError("strong_noise_leading: need N >= 2");
    const long double num = 2.0L * static_cast<long double>(c.delta());
    const long double den = static_cast<long double>(c.zeta_l()) *
                            static_cast<long double>(c.zeta_r()) * (n - 1);
    return static_cast<double>(num / den);
}

// Threshold constant in the strong-noise bound.
inline double strong_noise_c_const(const CouplingSpec& c) {
    return 3.0 + std::max({c.zeta_l(), c.zeta_r(), 1.0});
}

// Lower bound on J at beta = epsilon*N for any potential with sup|v| <= v_sup.
// Requires epsilon > 4 * v_sup * (3 + max{zl, zr, 1}) and Delta > 0.
inline double strong_noise_lower_bound(const CouplingSpec& c, double epsilon, long n,
                                       double v_sup) {
    c.require_two_sided();
    if (n < 2) throw ValidationError("strong_noise_lower_bound: need N >= 2");
    if (v_sup < 0.0) throw ValidationError("strong_noise_lower_bound: v_sup must be >= 0");
    if (!(c.delta() > 0.0))
        throw ValidationError("strong_noise_lower_bound: requires Delta > 0");
    const double c_const = strong_noise_c_const(c);
    if (!(epsilon > 4.0 * v_sup * c_const))
        throw ValidationError("strong_noise_lower_bound: need epsilon > " +
                              std::to_string(4.0 * v_sup * c_const) + " (got " +
                              std::to_string(epsilon) + ")");
    const long double zl = c.zeta_l();
    const long double zr = c.zeta_r();
    const long double beta = static_cast<long double>(epsilon) * n;
    const long double den = zl + zr + zl * zr * (zl + zr + beta * (n - 1));
    const long double factor =
        0.5L - 2.0L * static_cast<long double>(v_sup) * static_cast<long double>(c_const) /
                   static_cast<long double>(epsilon);
    return static_cast<double>(4.0L * static_cast<long double>(c.delta()) / den * factor);
}

}  // namespace latcurrent

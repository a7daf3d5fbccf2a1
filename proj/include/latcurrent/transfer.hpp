#pragma once

// Transfer matrices T_N(E) and the boundary-modified T~_N(E), corner
// resolvent entries of h_D, the energy-integral representation of the
// noiseless current, the transfer integral I(N) = int dE / ||T_N(E)||^2
// with its certified truncation tail, and Lyapunov-exponent estimation.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "latcurrent/coupling.hpp"
#include "latcurrent/errors.hpp"
#include "latcurrent/generator.hpp"
#include "latcurrent/potential.hpp"
#include "latcurrent/quadrature.hpp"

namespace latcurrent {

using TransferMatrix = Eigen::Matrix2cd;

// Largest singular value of a 2x2 complex matrix in closed form.
inline double matrix2_norm(const TransferMatrix& m) {
    const double f = m.squaredNorm();
    const double g = std::norm(m.determinant());
    double disc = f * f - 4.0 * g;
    if (disc < 0.0) disc = 0.0;
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

inline TransferMatrix transfer_one_step(Complex energy, Complex v) {
    TransferMatrix m;
    m << v - energy, Complex(-1.0, 0.0), Complex(1.0, 0.0), Complex(0.0, 0.0);
    return m;
}

namespace detail {

inline Complex site_value(const PotentialValues& v, int n, bool boundary_modified,
                          const CouplingSpec& c) {
    Complex val(v.values[static_cast<std::size_t>(n - 1)], 0.0);
    if (boundary_modified) {
        if (n == 1) val -= Complex(0.0, c.zeta_l());
        if (n == v.size()) val -= Complex(0.0, c.zeta_r());
    }
    return val;
}

}  // namespace detail

// T_N(E) (or T~_N(E)) as a plain product; fine while the norm stays within
// double range. Use scaled_transfer_product for long chains.
inline TransferMatrix transfer_matrix(Complex energy, const PotentialValues& v,
                                      bool boundary_modified = false,
                                      const CouplingSpec& c = {}) {
    if (v.size() < 1) throw ValidationError("transfer_matrix: need N >= 1");
    TransferMatrix t = TransferMatrix::Identity();
    for (int n = 1; n <= v.size(); ++n)
        t = transfer_one_step(energy, detail::site_value(v, n, boundary_modified, c)) * t;
    return t;
}

// Product in scaled form T = exp(log_scale) * m, renormalized every 8 steps.
struct ScaledTransfer {
    TransferMatrix m = TransferMatrix::Identity();
    double log_scale = 0.0;

    double log_norm() const { return log_scale + std::log(matrix2_norm(m)); }
};

inline ScaledTransfer scaled_transfer_product(Complex energy, const PotentialValues& v,
                                              bool boundary_modified = false,
                                              const CouplingSpec& c = {}) {
    if (v.size() < 1) throw ValidationError("scaled_transfer_product: need N >= 1");
    ScaledTransfer t;
    for (int n = 1; n <= v.size(); ++n) {
        t.m = transfer_one_step(energy, detail::site_value(v, n, boundary_modified, c)) * t.m;
        if (n % 8 == 0) {
            const double s = t.m.norm();
            if (s > 0.0) {
                t.m /= s;
                t.log_scale += std::log(s);
            }
        }
    }
    return t;
}

// (1/N) log ||T_N(E)|| for one realization.
inline double log_transfer_norm_rate(double energy, const PotentialValues& v) {
    return scaled_transfer_product(Complex(energy, 0.0), v).log_norm() / v.size();
}

// Corner entries g_ij(E) = <e_i, (h_D - E)^{-1} e_j> of a chain resolvent.
struct ResolventCorners {
    Complex g11, g1n, gn1, gnn;
};

inline ResolventCorners resolvent_entries(double energy, const GeneratorHandle& g) {
    if (g.lattice.dimension() != 1)
        throw ValidationError("resolvent_entries: chain lattices only");
    g.couplings.require_two_sided();
    const long n = g.dim();
    Eigen::MatrixXcd shifted = g.h_d;
    shifted.diagonal().array() -= Complex(energy, 0.0);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    Eigen::VectorXcd e(n);
    e.setZero();
    e(0) = 1.0;
    const Eigen::VectorXcd col1 = lu.solve(e);
    e(0) = 0.0;
    e(n - 1) = 1.0;
    const Eigen::VectorXcd coln = lu.solve(e);
    ResolventCorners out;
    out.g11 = col1(0);
    out.gn1 = col1(n - 1);
    out.g1n = coln(0);
    out.gnn = coln(n - 1);
    const double rnorm = (shifted * col1 - Eigen::VectorXcd::Unit(n, 0)).norm() +
                         (shifted * coln - Eigen::VectorXcd::Unit(n, n - 1)).norm();
    if (!(rnorm < 1e-8))
        throw NumericalError("resolvent_entries: solve residual " + std::to_string(rnorm));
    return out;
}

// |g_1N(E)| = 1 / |det(h_D - E)| through the three-term continuant
// recurrence, with log-magnitude tracking so long chains cannot overflow.
// `value` underflows to 0 when the magnitude leaves double range; `log_abs`
// is always meaningful.
struct CornerResolvent {
    double log_abs;
    double value;
};

inline CornerResolvent corner_resolvent_fast(double energy, const PotentialValues& v,
                                             const CouplingSpec& c) {
    if (v.size() < 1) throw ValidationError("corner_resolvent_fast: need N >= 1");
    const int n = v.size();
    Complex dm1(1.0, 0.0);  // D_{n-1}
    Complex dm2(0.0, 0.0);  // D_{n-2}
    double log_scale = 0.0;
    for (int k = 1; k <= n; ++k) {
        const Complex a = detail::site_value(v, k, /*boundary_modified=*/true, c) - energy;
        const Complex d = a * dm1 - dm2;
        dm2 = dm1;
        dm1 = d;
        const double mag = std::abs(dm1);
        if (mag > 1e100) {
            dm1 /= mag;
            dm2 /= mag;
            log_scale += std::log(mag);
        }
    }
    const double log_det = log_scale + std::log(std::abs(dm1));
    return {-log_det, std::exp(-log_det)};
}

// One-sided tail int_R^inf dE/||T_n(E)||^2 <= 2 int_R^inf (E+C)^2/(E-C)^{2n} dE
// evaluated exactly; requires n >= 2 and R > C.
inline double transfer_tail_bound_one_side(double spectrum_bound, double truncation, long n) {
    if (n < 2) throw ValidationError("transfer tail bound: need N >= 2");
    const double C = spectrum_bound;
    if (!(truncation > C)) throw ValidationError("transfer tail bound: need R > C");
    const double lu = std::log(truncation - C);
    const double t1 = std::exp(std::log(2.0) + (3.0 - 2.0 * n) * lu) / (2.0 * n - 3.0);
    const double t2 = std::exp(std::log(8.0 * std::max(C, 1e-300)) + (2.0 - 2.0 * n) * lu) /
                      (2.0 * n - 2.0);
    const double t3 = std::exp(std::log(8.0 * std::max(C * C, 1e-300)) + (1.0 - 2.0 * n) * lu) /
                      (2.0 * n - 1.0);
    return t1 + (C > 0.0 ? t2 + t3 : 0.0);
}

struct TransferIntegralResult {
    double value = 0.0;        // quadrature + tail bound
    double quadrature = 0.0;   // integral over [-R, R]
    double tail_bound = 0.0;   // certified remainder for both tails
};

// I(N) = int dE / ||T_N(E)||^2, truncated to [-R, R] plus the analytic tail.
inline TransferIntegralResult transfer_integral(const PotentialValues& v, double truncation) {
    const long n = v.size();
    if (n < 2) throw ValidationError("transfer_integral: need N >= 2");
    const double C = 2.0 + v.norm_sup;
    if (!(truncation > C))
        throw ValidationError("transfer_integral: truncation R must exceed C = " +
                              std::to_string(C));
    auto integrand = [&](double e) {
        return std::exp(-2.0 * scaled_transfer_product(Complex(e, 0.0), v).log_norm());
    };
    const QuadratureResult q =
        integrate_adaptive(integrand, -truncation, truncation, /*abs_tol=*/0.0,
                           /*rel_tol=*/1e-7);
    TransferIntegralResult out;
    out.quadrature = q.value;
    out.tail_bound = 2.0 * transfer_tail_bound_one_side(C, truncation, n);
    out.value = out.quadrature + out.tail_bound;
    return out;
}

// Noiseless current through the energy integral of Proposition-style form
// J = 4 Delta (1/2pi) int |g_1N(E)|^2 dE. The truncation tail is certified
// from |det(h_D - E)| >= (|E| - C_D)^N with C_D a Gershgorin bound on h_D.
inline double current_via_energy_integral(const GeneratorHandle& g, double tol) {
    if (g.lattice.dimension() != 1)
        throw ValidationError("current_via_energy_integral: chain lattices only");
    if (g.couplings.beta != 0.0)
        throw ValidationError(
            "current_via_energy_integral: the resolvent identity holds only for beta = 0; "
            "use the l^{-1} or ODE route for noisy generators");
    g.couplings.require_two_sided();
    const long n = g.dim();
    if (n < 2) throw ValidationError("current_via_energy_integral: need N >= 2");
    if (!(tol > 0.0)) throw ValidationError("current_via_energy_integral: need tol > 0");
    const double delta = g.couplings.delta();
    if (delta == 0.0) return 0.0;

    const Eigen::VectorXd diag = g.h.diagonal();
    PotentialValues v =
        make_potential_values(std::vector<double>(diag.data(), diag.data() + n));
    const double c_d =
        2.0 + v.norm_sup + std::max(g.couplings.zeta_l(), g.couplings.zeta_r());
    const double scale = 4.0 * std::abs(delta) / (2.0 * M_PI);
    const double budget = 0.5 * tol / scale;  // split between quadrature and tail

    auto tail = [&](double r) {
        // int_{|E|>R} |g1N|^2 dE <= 2 (R - C_D)^{1-2N} / (2N - 1)
        return 2.0 * std::exp((1.0 - 2.0 * n) * std::log(r - c_d)) / (2.0 * n - 1.0);
    };
    double truncation = c_d + 3.0;
    while (tail(truncation) > budget) {
        truncation = c_d + 2.0 * (truncation - c_d);
        if (truncation - c_d > 1e6)
            throw NumericalError("current_via_energy_integral: tail bound cannot reach tol " +
                                 std::to_string(tol));
    }

    auto integrand = [&](double e) {
        const CornerResolvent cr = corner_resolvent_fast(e, v, g.couplings);
        return std::exp(2.0 * cr.log_abs);
    };
    // resonances of |g1N|^2 sit at the eigenvalues of h_D; panel edges there
    // keep the adaptive refinement honest
    std::vector<double> breakpoints;
    if (g.has_eig)
        for (long i = 0; i < n; ++i) breakpoints.push_back(g.hd_evals(i).real());
    const QuadratureResult q = integrate_adaptive(integrand, -truncation, truncation, budget,
                                                  0.0, 200000, 0.25, breakpoints);
    if (!q.converged)
        throw NumericalError("current_via_energy_integral: quadrature stalled at error " +
                             std::to_string(q.error));
    return 4.0 * delta / (2.0 * M_PI) * (q.value + tail(truncation));
}

// Energy grid on [-R, R] with R beyond the spectrum bound C = 2 + sup|v|.
struct EnergyGrid {
    double truncation = 0.0;
    double spectrum_bound = 0.0;
    double spacing = 0.0;
    std::vector<double> nodes;

    static EnergyGrid uniform_scan(double spectrum_bound, double truncation, double spacing) {
        if (!(truncation > spectrum_bound))
            throw ValidationError("energy grid: need R > C");
        if (!(spacing > 0.0)) throw ValidationError("energy grid: need spacing > 0");
        EnergyGrid grid;
        grid.truncation = truncation;
        grid.spectrum_bound = spectrum_bound;
        grid.spacing = spacing;
        const long count = static_cast<long>(std::floor(2.0 * truncation / spacing)) + 1;
        grid.nodes.reserve(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i) grid.nodes.push_back(-truncation + i * spacing);
        return grid;
    }

    // Default scan for a potential ensemble: spacing 0.01 on [-(C+1), C+1].
    static EnergyGrid default_scan(const PotentialSpec& spec, double spacing = 0.01) {
        const double c = 2.0 + spec.sup_bound();
        return uniform_scan(c, c + 1.0, spacing);
    }
};

struct LyapunovEstimate {
    double energy = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    long chain_length = 0;
    int samples = 0;
};

// Monte Carlo estimate of L(E) = lim (1/N) log ||T_{N,omega}(E)||.
// Realization 0 uses the spec exactly as given; further realizations
// re-seed the disorder or redraw the quasi-periodic phase, so deterministic
// specs simply repeat the same chain.
inline LyapunovEstimate lyapunov(double energy, const PotentialSpec& spec, long chain_length,
                                 int samples, std::uint64_t seed = 0) {
    spec.validate();
    if (chain_length < 1) throw ValidationError("lyapunov: need chain_length >= 1");
    if (samples < 1) throw ValidationError("lyapunov: need samples >= 1");
    const int effective = spec.is_ensemble() ? samples : 1;

    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < effective; ++r) {
        const PotentialValues v = sample_potential(
            realize(spec, seed, static_cast<std::uint64_t>(r)), static_cast<int>(chain_length));
        const double rate = log_transfer_norm_rate(energy, v);
        sum += rate;
        sumsq += rate * rate;
    }
    LyapunovEstimate est;
    est.energy = energy;
    est.chain_length = chain_length;
    est.samples = samples;
    est.mean = sum / effective;
    if (effective > 1) {
        const double var = std::max(0.0, (sumsq - sum * sum / effective) / (effective - 1));
        est.std_error = std::sqrt(var / effective);
    }
    return est;
}

struct MinLyapunovResult {
    double energy = 0.0;
    LyapunovEstimate estimate;
};

// Grid minimum of L(E), refined once around the coarse minimum by a factor
// of ten in spacing.
inline MinLyapunovResult min_lyapunov(const PotentialSpec& spec, const EnergyGrid& grid,
                                      long chain_length, int samples, std::uint64_t seed = 0) {
    if (grid.nodes.empty()) throw ValidationError("min_lyapunov: empty energy grid");
    LyapunovEstimate best;
    best.mean = std::numeric_limits<double>::infinity();
    for (double e : grid.nodes) {
        const LyapunovEstimate est = lyapunov(e, spec, chain_length, samples, seed);
        if (est.mean < best.mean) best = est;
    }
    const double fine = grid.spacing > 0.0 ? grid.spacing / 10.0 : 0.0;
    if (fine > 0.0) {
        for (int k = -10; k <= 10; ++k) {
            if (k == 0) continue;
            const double e = best.energy + fine * k;
            const LyapunovEstimate est = lyapunov(e, spec, chain_length, samples, seed);
            if (est.mean < best.mean) best = est;
        }
    }
    return {best.energy, best};
}

// Empirical P(|(1/N) log||T_N|| - L_hat(E)| >= epsilon). L_hat comes from a
// single deterministic chain of length 10^6 and is an estimate, not ground
// truth; the probability is a diagnostic for the large-deviation property.
inline double ld_deviation_probability(const PotentialSpec& spec, double energy, long chain_length,
                                       double epsilon, int samples, std::uint64_t seed = 0) {
    spec.validate();
    if (samples < 1) throw ValidationError("ld_deviation_probability: need samples >= 1");
    const double l_hat = lyapunov(energy, spec, 1000000, 1, seed).mean;
    long hits = 0;
    for (int r = 0; r < samples; ++r) {
        const PotentialValues v = sample_potential(
            realize(spec, seed, static_cast<std::uint64_t>(r)), static_cast<int>(chain_length));
        const double rate = log_transfer_norm_rate(energy, v);
        if (std::abs(rate - l_hat) >= epsilon) ++hits;
    }
    return static_cast<double>(hits) / samples;
}

}  // namespace latcurrent

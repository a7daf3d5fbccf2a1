#pragma once

// One-particle reduction of the boundary-driven Lindblad dynamics.
//
// The generator acting on N x N matrices is
//     l(X) = -i[h, X] - {zeta_l P_1 + zeta_r P_N1, X}
//            + beta (sum_nu p_nu X p_nu - X),
// the two-point function obeys dR/dt = l(R) + 2 a_in_l P_1 + 2 a_in_r P_N1,
// and the stationary current is J = -4 Delta Tr(P_1 l^{-1}(P_N1)).
//
// l^{-1} is computed two ways: for beta = 0 through the eigendecomposition
// of the effective Hamiltonian h_D (Sylvester structure), and in general by
// factoring the vectorized |L|^2 x |L|^2 sparse operator. The fast path is
// residual-checked and falls back to the vectorized one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "latcurrent/coupling.hpp"
#include "latcurrent/errors.hpp"
#include "latcurrent/lattice.hpp"

namespace latcurrent {

using TwoPointState = Eigen::MatrixXcd;

namespace detail {

struct VectorizedGenerator {
    Eigen::SparseMatrix<Complex> op;
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    bool ok = false;
};

// Sparse matrix of l acting on column-major vec(X). The dephasing -beta X
// is folded into h' = h_D - i (beta/2) I; the remaining +beta term keeps
// only the diagonal entries of X.
inline std::shared_ptr<const VectorizedGenerator> vectorize_generator(
    const Eigen::MatrixXcd& h_d, double beta) {
    const long n = h_d.rows();
    Eigen::MatrixXcd hp = h_d;
    for (long i = 0; i < n; ++i) hp(i, i) -= Complex(0.0, 0.5 * beta);

    struct Entry {
        long r, c;
        Complex v;
    };
    std::vector<Entry> nz;
    for (long c = 0; c < n; ++c)
        for (long r = 0; r < n; ++r)
            if (hp(r, c) != Complex(0.0, 0.0)) nz.push_back({r, c, hp(r, c)});

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(nz.size() * 2 * static_cast<std::size_t>(n) + static_cast<std::size_t>(n));
    const Complex mi(0.0, -1.0);
    const Complex pi_(0.0, 1.0);
    for (long c = 0; c < n; ++c)
        for (const Entry& e : nz)  // -i (h' X): block-diagonal in the column index
            trip.emplace_back(c * n + e.r, c * n + e.c, mi * e.v);
    for (const Entry& e : nz)      // +i (X h'^dag): couples columns e.c <- e.r... rows fixed
        for (long r = 0; r < n; ++r)
            trip.emplace_back(e.r * n + r, e.c * n + r, pi_ * std::conj(e.v));
    for (long i = 0; i < n; ++i)
        trip.emplace_back(i * n + i, i * n + i, Complex(beta, 0.0));

    auto vg = std::make_shared<VectorizedGenerator>();
    vg->op.resize(n * n, n * n);
    vg->op.setFromTriplets(trip.begin(), trip.end());
    vg->op.makeCompressed();
    vg->lu.compute(vg->op);
    vg->ok = (vg->lu.info() == Eigen::Success);
    return vg;
}

}  // namespace detail

struct GeneratorHandle {
    LatticeSpec lattice;
    CouplingSpec couplings;
    Eigen::MatrixXd h;
    Eigen::MatrixXcd h_complex;
    Eigen::MatrixXcd h_d;
    Eigen::VectorXd boundary_w;   // zeta_l on the first plane, zeta_r on the last
    Eigen::VectorXd source_diag;  // 2 a_in_l on the first plane, 2 a_in_r on the last
    double h_norm_bound = 0.0;    // Gershgorin bound on ||h||

    // beta == 0: eigendecomposition of h_D, cached eagerly
    bool has_eig = false;
    Eigen::VectorXcd hd_evals;
    Eigen::MatrixXcd hd_evecs;
    Eigen::MatrixXcd hd_evecs_inv;

    // beta > 0: cached factorization of the vectorized generator
    std::shared_ptr<const detail::VectorizedGenerator> vec;

    long dim() const { return h.rows(); }
};

inline GeneratorHandle make_generator(const Eigen::MatrixXd& h, const CouplingSpec& c,
                                      const LatticeSpec& lattice) {
    lattice.validate();
    c.require_any_boundary();
    const long n = lattice.site_count();
    if (h.rows() != n || h.cols() != n)
        throw ValidationError("generator: hamiltonian is " + std::to_string(h.rows()) + "x" +
                              std::to_string(h.cols()) + ", lattice has " + std::to_string(n) +
                              " sites");
    if ((h - h.transpose()).cwiseAbs().maxCoeff() != 0.0)
        throw ValidationError("generator: hamiltonian must be exactly symmetric");

    GeneratorHandle g;
    g.lattice = lattice;
    g.couplings = c;
    g.h = h;
    g.h_complex = h.cast<Complex>();
    g.h_d = build_effective_hd(h, c, lattice);
    g.boundary_w = boundary_weights(lattice, c);
    g.source_diag = Eigen::VectorXd::Zero(n);
    const long cross = lattice.cross_section();
    for (long i = 0; i < cross; ++i) g.source_diag(i) += 2.0 * c.alpha_in_l;
    for (long i = n - cross; i < n; ++i) g.source_diag(i) += 2.0 * c.alpha_in_r;
    g.h_norm_bound = h.cwiseAbs().rowwise().sum().maxCoeff();

    if (c.beta == 0.0) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(g.h_d, /*computeEigenvectors=*/true);
        if (es.info() == Eigen::Success) {
            g.hd_evals = es.eigenvalues();
            g.hd_evecs = es.eigenvectors();
            g.hd_evecs_inv = g.hd_evecs.inverse();
            g.has_eig = true;
        }
    } else {
        g.vec = detail::vectorize_generator(g.h_d, c.beta);
        if (!g.vec->ok) throw NumericalError("generator: sparse factorization failed");
    }
    return g;
}

inline GeneratorHandle make_chain_generator(const PotentialValues& v, const CouplingSpec& c) {
    return make_generator(build_hamiltonian_1d(v), c, LatticeSpec::chain(v.size()));
}

inline Eigen::MatrixXcd apply_generator(const GeneratorHandle& g, const Eigen::MatrixXcd& x) {
    if (x.rows() != g.dim() || x.cols() != g.dim())
        throw ValidationError("apply_generator: dimension mismatch");
    Eigen::MatrixXcd out = Complex(0.0, -1.0) * (g.h_complex * x - x * g.h_complex);
    out -= g.boundary_w.asDiagonal() * x;
    out -= x * g.boundary_w.asDiagonal();
    if (g.couplings.beta != 0.0) {
        out -= g.couplings.beta * x;
        out.diagonal() += g.couplings.beta * x.diagonal();
    }
    return out;
}

namespace detail {

// Solve l(X) = S for beta = 0 using h_D = V Lambda V^{-1}:
// Y_ab = i (V^{-1} S V^{-dag})_ab / (lambda_a - conj(lambda_b)), X = V Y V^dag.
// The divisor has strictly negative imaginary part.
inline Eigen::MatrixXcd sylvester_solve(const GeneratorHandle& g, const Eigen::MatrixXcd& s) {
    const long n = g.dim();
    Eigen::MatrixXcd st = g.hd_evecs_inv * s * g.hd_evecs_inv.adjoint();
    for (long a = 0; a < n; ++a)
        for (long b = 0; b < n; ++b)
            st(a, b) = Complex(0.0, 1.0) * st(a, b) /
                       (g.hd_evals(a) - std::conj(g.hd_evals(b)));
    return g.hd_evecs * st * g.hd_evecs.adjoint();
}

inline Eigen::MatrixXcd vectorized_solve(const VectorizedGenerator& vg,
                                         const Eigen::MatrixXcd& s) {
    const long n = s.rows();
    Eigen::Map<const Eigen::VectorXcd> rhs(s.data(), n * n);
    Eigen::VectorXcd x = vg.lu.solve(rhs);
    Eigen::VectorXcd r = rhs - vg.op * x;
    if (r.norm() > 1e-14 * rhs.norm()) x += vg.lu.solve(r);
    return Eigen::Map<const Eigen::MatrixXcd>(x.data(), n, n);
}

}  // namespace detail

// X = l^{-1}(S), residual-certified to 1e-10 ||S||_F.
inline Eigen::MatrixXcd stationary_solve(const GeneratorHandle& g, const Eigen::MatrixXcd& s) {
    if (s.rows() != g.dim() || s.cols() != g.dim())
        throw ValidationError("stationary_solve: dimension mismatch");
    const double snorm = s.norm();
    if (snorm == 0.0) return Eigen::MatrixXcd::Zero(g.dim(), g.dim());

    Eigen::MatrixXcd x;
    double resid = std::numeric_limits<double>::infinity();
    if (g.couplings.beta == 0.0 && g.has_eig) {
        x = detail::sylvester_solve(g, s);
        resid = (apply_generator(g, x) - s).norm();
        for (int it = 0; it < 2 && resid > 1e-12 * snorm; ++it) {
            x += detail::sylvester_solve(g, s - apply_generator(g, x));
            resid = (apply_generator(g, x) - s).norm();
        }
    }
    if (resid > 1e-10 * snorm) {
        auto vg = g.vec ? g.vec : detail::vectorize_generator(g.h_d, g.couplings.beta);
        if (!vg->ok) throw NumericalError("stationary_solve: factorization failed");
        x = detail::vectorized_solve(*vg, s);
        resid = (apply_generator(g, x) - s).norm();
    }
    if (!(resid <= 1e-10 * snorm))
        throw NumericalError("stationary_solve: residual " + std::to_string(resid) +
                             " exceeds 1e-10 * ||S|| = " + std::to_string(1e-10 * snorm));
    if ((s - s.adjoint()).norm() <= 1e-12 * snorm) x = 0.5 * (x + x.adjoint().eval());
    return x;
}

// Exposed for the dual-route cross-check; independent of the fast path.
inline Eigen::MatrixXcd stationary_solve_vectorized(const GeneratorHandle& g,
                                                    const Eigen::MatrixXcd& s) {
    auto vg = g.vec ? g.vec : detail::vectorize_generator(g.h_d, g.couplings.beta);
    if (!vg->ok) throw NumericalError("stationary_solve_vectorized: factorization failed");
    return detail::vectorized_solve(*vg, s);
}

inline Eigen::MatrixXcd plane_projector(const GeneratorHandle& g, bool last) {
    const long n = g.dim();
    const long cross = g.lattice.cross_section();
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
    const long off = last ? n - cross : 0;
    for (long i = 0; i < cross; ++i) p(off + i, off + i) = 1.0;
    return p;
}

// R_inf = -l^{-1}(2 a_in_l P_1 + 2 a_in_r P_N1); satisfies 0 <= R <= I.
inline TwoPointState stationary_two_point(const GeneratorHandle& g) {
    g.couplings.require_any_boundary();
    Eigen::MatrixXcd src = g.source_diag.cast<Complex>().asDiagonal();
    return -stationary_solve(g, src);
}

// Particle flow through the bond (n, n+1), summed over the plane in d > 1:
// sum_{nu in M_n} 2 Im <e_{nu+}, R e_nu>.
inline double site_current(const TwoPointState& r, int n, const LatticeSpec& lattice) {
    lattice.validate();
    if (n < 1 || n > lattice.length() - 1)
        throw ValidationError("site_current: bond index out of range");
    const long cross = lattice.cross_section();
    const long base = static_cast<long>(n - 1) * cross;
    double sum = 0.0;
    for (long j = 0; j < cross; ++j) sum += 2.0 * std::imag(r(base + j + cross, base + j));
    return sum;
}

inline double site_current(const TwoPointState& r, int n) {
    return site_current(r, n, LatticeSpec::chain(static_cast<int>(r.rows())));
}

// J = -4 Delta Tr(P_1 l^{-1}(P_N1)); site-independent and with the sign of Delta.
inline double stationary_current(const GeneratorHandle& g) {
    g.couplings.require_two_sided();
    if (g.lattice.length() < 2)
        throw ValidationError("stationary_current: need N1 >= 2");
    const double delta = g.couplings.delta();
    if (delta == 0.0) return 0.0;
    const Eigen::MatrixXcd x = stationary_solve(g, plane_projector(g, /*last=*/true));
    const long cross = g.lattice.cross_section();
    double tr = 0.0;
    for (long i = 0; i < cross; ++i) tr += std::real(x(i, i));
    return -4.0 * delta * tr;
}

// Eigenvalues of the vectorized generator; all real parts are < 0.
inline Eigen::VectorXcd generator_spectrum(const GeneratorHandle& g) {
    if (g.dim() > 40)
        throw ValidationError("generator_spectrum: guarded to |L| <= 40 (got " +
                              std::to_string(g.dim()) + ")");
    auto vg = g.vec ? g.vec : detail::vectorize_generator(g.h_d, g.couplings.beta);
    Eigen::MatrixXcd dense(vg->op);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericalError("generator_spectrum: eigensolver failed");
    return es.eigenvalues();
}

// Integrate dR/dt = l(R) + source from R0 over [0, t]. Classic fixed-step
// RK4 with the step bounded by the generator scale; Richardson step-halving
// supplies the error estimate that drives refinement.
inline TwoPointState evolve(const GeneratorHandle& g, const TwoPointState& r0, double t) {
    if (r0.rows() != g.dim() || r0.cols() != g.dim())
        throw ValidationError("evolve: dimension mismatch");
    if (t < 0.0) throw ValidationError("evolve: need t >= 0");
    if (t == 0.0) return r0;

    const Eigen::MatrixXcd source = g.source_diag.cast<Complex>().asDiagonal();
    auto rhs = [&](const Eigen::MatrixXcd& r) -> Eigen::MatrixXcd {
        return apply_generator(g, r) + source;
    };
    auto run = [&](long steps) {
        const double hstep = t / static_cast<double>(steps);
        Eigen::MatrixXcd r = r0;
        for (long k = 0; k < steps; ++k) {
            const Eigen::MatrixXcd k1 = rhs(r);
            const Eigen::MatrixXcd k2 = rhs(r + (0.5 * hstep) * k1);
            const Eigen::MatrixXcd k3 = rhs(r + (0.5 * hstep) * k2);
            const Eigen::MatrixXcd k4 = rhs(r + hstep * k3);
            r += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return r;
    };

    const CouplingSpec& c = g.couplings;
    const double rate = g.h_norm_bound + c.zeta_l() + c.zeta_r() + c.beta;
    long steps = std::max<long>(1, static_cast<long>(std::ceil(t * rate / 0.1)));
    const double scale =
        std::max({source.norm(), r0.norm() / std::max(t, 1.0), 1e-300});
    const double tol = 1e-8 * t * scale;

    Eigen::MatrixXcd coarse = run(steps);
    for (int halving = 0;; ++halving) {
        Eigen::MatrixXcd fine = run(2 * steps);
        const double err = (coarse - fine).norm() / 15.0;
        if (err <= tol) {
            fine = 0.5 * (fine + fine.adjoint().eval());
            return fine;
        }
        if (halving >= 10)
            throw NumericalError("evolve: step-size underflow, error estimate " +
                                 std::to_string(err) + " > tolerance " + std::to_string(tol) +
                                 " at " + std::to_string(2 * steps) + " steps");
        coarse = std::move(fine);
        steps *= 2;
    }
}

// Diagnostic: whether R is stationary for the driven dynamics.
inline bool is_stationary(const GeneratorHandle& g, const TwoPointState& r) {
    const Eigen::MatrixXcd source = g.source_diag.cast<Complex>().asDiagonal();
    const double srcnorm = source.norm();
    return (apply_generator(g, r) + source).norm() <= 1e-8 * (srcnorm > 0 ? srcnorm : 1.0);
}

// Validity of a two-point matrix: Hermitian and 0 <= R <= I within slack.
inline bool is_valid_two_point(const TwoPointState& r, double herm_tol = 1e-12,
                               double eig_tol = 1e-10) {
    if ((r - r.adjoint()).norm() > herm_tol * std::max(1.0, r.norm())) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (r + r.adjoint()));
    return es.eigenvalues().minCoeff() >= -eig_tol && es.eigenvalues().maxCoeff() <= 1.0 + eig_tol;
}

}  // namespace latcurrent

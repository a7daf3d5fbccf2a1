#pragma once

// Finite d-dimensional boxes, nearest-neighbor Hamiltonians with Dirichlet
// boundaries, and the non-Hermitian effective Hamiltonian h_D carrying the
// boundary dissipation.
//
// Site ordering is row-major with the transport axis slowest, so the planes
// where particles enter and leave occupy contiguous index blocks.

#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latcurrent/coupling.hpp"
#include "latcurrent/errors.hpp"
#include "latcurrent/potential.hpp"

namespace latcurrent {

using Complex = std::complex<double>;

struct LatticeSpec {
    std::vector<int> dims;  // (N1, ..., Nd), N1 along the transport axis

    static LatticeSpec chain(int n) { return LatticeSpec{{n}}; }
    static LatticeSpec box(std::vector<int> dims) { return LatticeSpec{std::move(dims)}; }

    int dimension() const { return static_cast<int>(dims.size()); }

    long site_count() const {
        long n = 1;
        for (int d : dims) n *= d;
        return n;
    }

    // Number of sites in each plane transverse to the transport axis.
    long cross_section() const { return dims.empty() ? 1 : site_count() / dims[0]; }

    int length() const { return dims.empty() ? 0 : dims[0]; }

    void validate() const {
        if (dims.empty()) throw ValidationError("lattice: need at least one dimension");
        for (int d : dims)
            if (d < 1) throw ValidationError("lattice: every extent must be >= 1");
    }

    std::string label() const {
        std::string s;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(dims[i]);
        }
        return s;
    }
};

// Tridiagonal chain Hamiltonian: -1 hopping, v(n) on the diagonal,
// Dirichlet boundaries.
inline Eigen::MatrixXd build_hamiltonian_1d(const PotentialValues& v) {
    const int n = v.size();
    if (n < 1) throw ValidationError("hamiltonian: need at least one site");
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        h(i, i) = v.values[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            h(i, i + 1) = -1.0;
            h(i + 1, i) = -1.0;
        }
    }
    return h;
}

// d-dimensional box Hamiltonian. v is indexed in the row-major site order.
inline Eigen::MatrixXd build_hamiltonian_dd(const LatticeSpec& lattice, const PotentialValues& v) {
    lattice.validate();
    const long n = lattice.site_count();
    if (v.size() != n)
        throw ValidationError("hamiltonian: potential has " + std::to_string(v.size()) +
                              " entries, lattice has " + std::to_string(n) + " sites");

    const int d = lattice.dimension();
    // stride[a] = index step when coordinate a increases by one.
    std::vector<long> stride(static_cast<std::size_t>(d), 1);
    for (int a = d - 2; a >= 0; --a)
        stride[static_cast<std::size_t>(a)] =
            stride[static_cast<std::size_t>(a + 1)] * lattice.dims[static_cast<std::size_t>(a + 1)];

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> coord(static_cast<std::size_t>(d), 0);
    for (long idx = 0; idx < n; ++idx) {
        h(idx, idx) = v.values[static_cast<std::size_t>(idx)];
        for (int a = 0; a < d; ++a) {
            if (coord[static_cast<std::size_t>(a)] + 1 < lattice.dims[static_cast<std::size_t>(a)]) {
                const long nb = idx + stride[static_cast<std::size_t>(a)];
                h(idx, nb) = -1.0;
                h(nb, idx) = -1.0;
            }
        }
        // advance the multi-index, last coordinate fastest
        for (int a = d - 1; a >= 0; --a) {
            if (++coord[static_cast<std::size_t>(a)] < lattice.dims[static_cast<std::size_t>(a)]) break;
            coord[static_cast<std::size_t>(a)] = 0;
        }
    }
    return h;
}

// Diagonal of the boundary dissipator: zeta_l on the first plane, zeta_r on
// the last. For a single-plane lattice both contributions land on it.
inline Eigen::VectorXd boundary_weights(const LatticeSpec& lattice, const CouplingSpec& c) {
    const long n = lattice.site_count();
    const long cross = lattice.cross_section();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (long i = 0; i < cross; ++i) w(i) += c.zeta_l();
    for (long i = n - cross; i < n; ++i) w(i) += c.zeta_r();
    return w;
}

// h_D = h - i zeta_l P_1 - i zeta_r P_{N1}; every eigenvalue has
// strictly negative imaginary part once some boundary rate is on.
inline Eigen::MatrixXcd build_effective_hd(const Eigen::MatrixXd& h, const CouplingSpec& c,
                                           const LatticeSpec& lattice) {
    lattice.validate();
    c.require_any_boundary();
    if (h.rows() != h.cols() || h.rows() != lattice.site_count())
        throw ValidationError("effective hamiltonian: dimension mismatch");
    Eigen::MatrixXcd hd = h.cast<Complex>();
    const Eigen::VectorXd w = boundary_weights(lattice, c);
    for (long i = 0; i < h.rows(); ++i) hd(i, i) -= Complex(0.0, w(i));
    return hd;
}

}  // namespace latcurrent

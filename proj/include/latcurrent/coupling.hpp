#pragma once

// Boundary injection/extraction rates and the dephasing rate.

#include "latcurrent/errors.hpp"

namespace latcurrent {

struct CouplingSpec {
    double alpha_in_l = 0.0;
    double alpha_out_l = 0.0;
    double alpha_in_r = 0.0;
    double alpha_out_r = 0.0;
    double beta = 0.0;

    double zeta_l() const { return alpha_in_l + alpha_out_l; }
    double zeta_r() const { return alpha_in_r + alpha_out_r; }

    // Sign coefficient of the stationary current.
    double delta() const { return alpha_in_l * alpha_out_r - alpha_out_l * alpha_in_r; }

    void validate() const {
        if (alpha_in_l < 0 || alpha_out_l < 0 || alpha_in_r < 0 || alpha_out_r < 0 || beta < 0)
            throw ValidationError("couplings: all rates must be >= 0");
    }

    // At least one boundary rate nonzero; the dissipative part is then strict.
    void require_any_boundary() const {
        validate();
        if (zeta_l() + zeta_r() <= 0.0)
            throw ValidationError("couplings: at least one boundary rate must be > 0");
    }

    // Both edges coupled; required by every current computation.
    void require_two_sided() const {
        validate();
        if (!(zeta_l() > 0.0) || !(zeta_r() > 0.0))
            throw ValidationError("couplings: current computations need zeta_l > 0 and zeta_r > 0");
    }
};

// Two-reservoir parametrization: coupling strength Gamma, driving mu,
// dephasing gamma. Maps onto the five rates of CouplingSpec.
inline CouplingSpec znidaric_couplings(double Gamma, double mu, double gamma) {
    if (!(Gamma > 0.0)) throw ValidationError("znidaric couplings: Gamma must be > 0");
    if (mu < -1.0 || mu > 1.0) throw ValidationError("znidaric couplings: mu must lie in [-1,1]");
    if (gamma < 0.0) throw ValidationError("znidaric couplings: gamma must be >= 0");
    CouplingSpec c;
    c.alpha_in_l = Gamma * (1.0 - mu) / 2.0;
    c.alpha_out_l = Gamma * (1.0 + mu) / 2.0;
    c.alpha_in_r = Gamma * (1.0 + mu) / 2.0;
    c.alpha_out_r = Gamma * (1.0 - mu) / 2.0;
    c.beta = 2.0 * gamma;
    return c;
}

}  // namespace latcurrent

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "latcurrent/fits.hpp"
#include "latcurrent/rng.hpp"
#include "latcurrent/transfer.hpp"

using namespace latcurrent;

namespace {

CouplingSpec pump_couplings(double beta = 0.0) {
    CouplingSpec c;
    c.alpha_in_l = 1.0;
    c.alpha_out_r = 1.0;
    c.beta = beta;
    return c;
}

CouplingSpec random_couplings(Xoshiro256ss& rng) {
    CouplingSpec c;
    do {
        c.alpha_in_l = rng.uniform01();
        c.alpha_out_l = rng.uniform01();
        c.alpha_in_r = rng.uniform01();
        c.alpha_out_r = rng.uniform01();
    } while (!(c.zeta_l() > 0.15 && c.zeta_r() > 0.15));
    return c;
}

PotentialValues random_potential(Xoshiro256ss& rng, int n, double amp = 2.0) {
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (auto& x : vals) x = amp * (2.0 * rng.uniform01() - 1.0);
    return make_potential_values(std::move(vals));
}

}  // namespace

TEST_CASE("transfer matrix: quarter turn at E = 0 and unimodularity") {
    const PotentialValues v0 = sample_potential(PotentialSpec::zero(), 4);
    const TransferMatrix t = transfer_matrix(Complex(0.0, 0.0), v0);
    REQUIRE((t - TransferMatrix::Identity()).norm() < 1e-14);

    // unimodularity asserted where the product norm stays moderate, so the
    // determinant cancellation is meaningful in double precision
    Xoshiro256ss rng(246);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 12);
        const PotentialValues v = random_potential(rng, n, 1.0);
        const Complex e(4.0 * rng.uniform01() - 2.0, 0.0);
        const bool tilde = trial % 2;
        const TransferMatrix tm = transfer_matrix(e, v, tilde, random_couplings(rng));
        REQUIRE(std::abs(tm.determinant() - Complex(1.0, 0.0)) < 1e-10);
        REQUIRE(matrix2_norm(tm) >= 1.0 - 1e-10);
    }
}

TEST_CASE("transfer norm obeys the off-spectrum growth bound") {
    // ||T_n(E)|| >= (1/sqrt(2)) (|E| - C)^n / (|E| + C) outside [-C, C]
    const PotentialValues v0 = sample_potential(PotentialSpec::zero(), 10);
    const double norm = matrix2_norm(transfer_matrix(Complex(3.0, 0.0), v0));
    REQUIRE(norm >= (1.0 / std::sqrt(2.0)) * 1.0 / 5.0);

    Xoshiro256ss rng(135);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 10);
        const PotentialValues v = random_potential(rng, n, 1.0);
        const double c = 2.0 + v.norm_sup;
        const double e = c + 0.5 + 2.0 * rng.uniform01();
        const double lhs = matrix2_norm(transfer_matrix(Complex(e, 0.0), v));
        const double rhs = (1.0 / std::sqrt(2.0)) * std::pow(e - c, n) / (e + c);
        REQUIRE(lhs >= rhs * (1.0 - 1e-12));
    }
}

TEST_CASE("closed-form 2x2 norm equals the SVD oracle") {
    Xoshiro256ss rng(864);
    for (int trial = 0; trial < 200; ++trial) {
        TransferMatrix m;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                m(i, j) = Complex(4.0 * rng.uniform01() - 2.0, 4.0 * rng.uniform01() - 2.0);
        Eigen::JacobiSVD<TransferMatrix> svd(m);
        REQUIRE(matrix2_norm(m) ==
                Catch::Approx(svd.singularValues()(0)).margin(1e-12).epsilon(1e-12));
    }
}

TEST_CASE("scaled product agrees with the plain product and scales long chains") {
    Xoshiro256ss rng(975);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 40);
        const PotentialValues v = random_potential(rng, n);
        const Complex e(4.0 * rng.uniform01() - 2.0, 0.0);
        const double plain = std::log(matrix2_norm(transfer_matrix(e, v)));
        const double scaled = scaled_transfer_product(e, v).log_norm();
        REQUIRE(scaled == Catch::Approx(plain).margin(1e-10));
    }

    // long disordered chain: log norm grows linearly, no overflow
    const PotentialValues v = sample_potential(PotentialSpec::anderson_pm1(3), 20000);
    const double logn = scaled_transfer_product(Complex(0.0, 0.0), v).log_norm();
    REQUIRE(std::isfinite(logn));
    REQUIRE(logn > 100.0);
}

TEST_CASE("boundary-modified product factors through constant corner matrices") {
    // T~_N(E) = U_r T_N(E) U_l with U_r = [[1, -i zr], [0, 1]],
    // U_l = [[1, 0], [i zl, 1]]; gives the E,N-independent norm equivalence.
    Xoshiro256ss rng(1122);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 30);
        const PotentialValues v = random_potential(rng, n);
        const CouplingSpec c = random_couplings(rng);
        const Complex e(5.0 * rng.uniform01() - 2.5, 0.0);

        TransferMatrix ur, ul;
        ur << 1.0, Complex(0.0, -c.zeta_r()), 0.0, 1.0;
        ul << 1.0, 0.0, Complex(0.0, c.zeta_l()), 1.0;
        const TransferMatrix lhs = transfer_matrix(e, v, /*boundary_modified=*/true, c);
        const TransferMatrix rhs = ur * transfer_matrix(e, v) * ul;
        REQUIRE((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));

        const double a = 1.0 / (matrix2_norm(ur.inverse()) * matrix2_norm(ul.inverse()));
        const double b = matrix2_norm(ur) * matrix2_norm(ul);
        const double ratio = matrix2_norm(lhs) / matrix2_norm(transfer_matrix(e, v));
        REQUIRE(ratio >= a * (1.0 - 1e-9));
        REQUIRE(ratio <= b * (1.0 + 1e-9));
    }
}

TEST_CASE("transfer products are subadditive in the chain length") {
    Xoshiro256ss rng(3344);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 40);
        const int m = 2 + static_cast<int>(rng() % 40);
        const PotentialValues full = random_potential(rng, n + m);
        const double e = 5.0 * rng.uniform01() - 2.5;

        PotentialValues first, shifted;
        first.values.assign(full.values.begin(), full.values.begin() + m);
        shifted.values.assign(full.values.begin() + m, full.values.end());
        first = make_potential_values(first.values);
        shifted = make_potential_values(shifted.values);

        const double log_full = scaled_transfer_product(Complex(e, 0.0), full).log_norm();
        const double log_first = scaled_transfer_product(Complex(e, 0.0), first).log_norm();
        const double log_shift = scaled_transfer_product(Complex(e, 0.0), shifted).log_norm();
        REQUIRE(log_full <= log_first + log_shift + 1e-10);
    }
}

TEST_CASE("lemma identity: boundary transfer maps resolvent corners onto each other") {
    Xoshiro256ss rng(556);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 30);
        const PotentialValues v = random_potential(rng, n, 1.0);
        const CouplingSpec c = random_couplings(rng);
        const double e = 4.0 * rng.uniform01() - 2.0;

        const GeneratorHandle g = make_chain_generator(v, c);
        const ResolventCorners rc = resolvent_entries(e, g);
        const TransferMatrix tt = transfer_matrix(Complex(e, 0.0), v, true, c);

        TransferMatrix left, right;
        left << rc.g11, rc.g1n, 1.0, 0.0;
        right << 0.0, 1.0, rc.gn1, rc.gnn;
        REQUIRE((tt * left - right).norm() <= 1e-9);
    }
}

TEST_CASE("resolvent corners obey the coupling bounds") {
    Xoshiro256ss rng(667);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 30);
        const PotentialValues v = random_potential(rng, n);
        const CouplingSpec c = random_couplings(rng);
        const double e = 2.0 * (2.0 + v.norm_sup + 2.0) * (rng.uniform01() - 0.5);
        const ResolventCorners rc = resolvent_entries(e, make_chain_generator(v, c));

        const double zl = c.zeta_l(), zr = c.zeta_r();
        REQUIRE(std::abs(rc.g11) <= 1.0 / zl + 1e-12);
        REQUIRE(std::abs(rc.gnn) <= 1.0 / zr + 1e-12);
        REQUIRE(std::norm(rc.g1n) <= 1.0 / (4.0 * zl * zr) + 1e-12);
        REQUIRE(std::norm(rc.gn1) <= 1.0 / (4.0 * zl * zr) + 1e-12);
    }
}

TEST_CASE("corner resolvent: scalar case and continuant vs dense solves") {
    CouplingSpec left_only;
    left_only.alpha_in_l = 1.0;
    const PotentialValues v1 = sample_potential(PotentialSpec::zero(), 1);
    for (double e : {-2.0, -0.3, 0.0, 1.7}) {
        const CornerResolvent cr = corner_resolvent_fast(e, v1, left_only);
        REQUIRE(cr.value == Catch::Approx(1.0 / std::abs(Complex(-e, -1.0))).epsilon(1e-12));
    }

    Xoshiro256ss rng(778);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 39);
        const PotentialValues v = random_potential(rng, n, 1.0);
        const CouplingSpec c = random_couplings(rng);
        const double e = 6.0 * rng.uniform01() - 3.0;
        const ResolventCorners rc = resolvent_entries(e, make_chain_generator(v, c));
        const CornerResolvent cr = corner_resolvent_fast(e, v, c);
        REQUIRE(cr.value == Catch::Approx(std::abs(rc.g1n)).epsilon(1e-10));
    }

    // ballistic chain stays above the dense-solve noise floor out to N = 200
    const PotentialValues v200 = sample_potential(PotentialSpec::zero(), 200);
    const CouplingSpec c = pump_couplings();
    for (double e : {-1.5, -0.25, 0.4, 1.9}) {
        const ResolventCorners rc = resolvent_entries(e, make_chain_generator(v200, c));
        const CornerResolvent cr = corner_resolvent_fast(e, v200, c);
        REQUIRE(cr.value == Catch::Approx(std::abs(rc.g1n)).epsilon(1e-10));
    }
}

TEST_CASE("corner resolvent matches the leading continuant power at large energy") {
    const PotentialValues v = sample_potential(PotentialSpec::zero(), 5);
    const CornerResolvent cr = corner_resolvent_fast(1e3, v, pump_couplings());
    REQUIRE(cr.value * std::pow(1e3, 5) == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("corner resolvent sandwich versus the boundary-modified norm") {
    // 1/||T~|| <= |g1N| always, and |g1N| ||T~|| stays below the explicit
    // constant assembled from the corner-entry bounds.
    Xoshiro256ss rng(889);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 5 + static_cast<int>(rng() % 76);
        const PotentialValues v = random_potential(rng, n, 1.0);
        const CouplingSpec c = random_couplings(rng);
        const double cconst = 2.0 + v.norm_sup;
        const double e = 2.0 * (cconst + 2.0) * (rng.uniform01() - 0.5);

        const double log_tnorm =
            scaled_transfer_product(Complex(e, 0.0), v, true, c).log_norm();
        const CornerResolvent cr = corner_resolvent_fast(e, v, c);
        REQUIRE(cr.log_abs + log_tnorm >= -1e-9);

        const double zl = c.zeta_l(), zr = c.zeta_r();
        const double kbound = std::sqrt(1.0 + 1.0 / (zl * zl) + 1.0 / (zr * zr) +
                                        25.0 / (16.0 * zl * zl * zr * zr));
        REQUIRE(cr.log_abs + log_tnorm <= std::log(kbound) + 1e-9);
    }
}

TEST_CASE("energy-integral current agrees with the exact and solver routes") {
    REQUIRE(current_via_energy_integral(
                make_chain_generator(sample_potential(PotentialSpec::zero(), 6),
                                     pump_couplings()),
                1e-7) == Catch::Approx(0.5).margin(1e-6));

    CouplingSpec balanced;
    balanced.alpha_in_l = balanced.alpha_out_l = balanced.alpha_in_r = balanced.alpha_out_r = 0.5;
    REQUIRE(current_via_energy_integral(
                make_chain_generator(sample_potential(PotentialSpec::zero(), 6), balanced),
                1e-7) == 0.0);

    const PotentialValues v = sample_potential(PotentialSpec::anderson_pm1(7), 10);
    const GeneratorHandle g = make_chain_generator(v, pump_couplings());
    const double direct = stationary_current(g);
    REQUIRE(current_via_energy_integral(g, 1e-7) == Catch::Approx(direct).margin(1e-6));

    Xoshiro256ss rng(990);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 19);
        const PotentialValues vr = random_potential(rng, n, 1.5);
        const CouplingSpec cr = random_couplings(rng);
        const GeneratorHandle gr = make_chain_generator(vr, cr);
        const double ji = current_via_energy_integral(gr, 1e-8);
        const double jd = stationary_current(gr);
        REQUIRE(ji == Catch::Approx(jd).margin(2e-8 + 1e-6 * std::abs(jd)));
    }

    const GeneratorHandle noisy =
        make_chain_generator(sample_potential(PotentialSpec::zero(), 6), pump_couplings(0.5));
    REQUIRE_THROWS_AS(current_via_energy_integral(noisy, 1e-7), ValidationError);
}

TEST_CASE("transfer tail bound matches the symbolic integral and shrinks with R") {
    // frozen from exact integration of 2 (E+C)^2 / (E-C)^{2n} over [R, inf):
    // C = 3, R = 6, n = 10 gives 2858/375410453841.
    REQUIRE(transfer_tail_bound_one_side(3.0, 6.0, 10) ==
            Catch::Approx(2858.0 / 375410453841.0).epsilon(1e-12));
    REQUIRE(transfer_tail_bound_one_side(3.0, 7.0, 10) <
            transfer_tail_bound_one_side(3.0, 6.0, 10));
    REQUIRE(transfer_tail_bound_one_side(3.0, 6.0, 12) <
            transfer_tail_bound_one_side(3.0, 6.0, 10));
    REQUIRE_THROWS_AS(transfer_tail_bound_one_side(3.0, 2.0, 10), ValidationError);
    REQUIRE_THROWS_AS(transfer_tail_bound_one_side(3.0, 6.0, 1), ValidationError);

    // numeric quadrature of the bound integrand stays below the closed form
    const double c = 3.0, r = 6.0;
    const int n = 10;
    const QuadratureResult q = integrate_adaptive(
        [&](double e) { return 2.0 * std::pow(e + c, 2) / std::pow(e - c, 2 * n); }, r, r + 40.0,
        1e-16);
    REQUIRE(q.value <= transfer_tail_bound_one_side(c, r, n) * (1.0 + 1e-9));
    REQUIRE(q.value == Catch::Approx(transfer_tail_bound_one_side(c, r, n)).epsilon(1e-6));
}

TEST_CASE("transfer integral: ballistic chains show no decay trend") {
    std::vector<double> ns, values;
    for (int n = 10; n <= 100; n += 10) {
        const PotentialValues v = sample_potential(PotentialSpec::zero(), n);
        const TransferIntegralResult res = transfer_integral(v, 5.0);
        REQUIRE(res.value > 0.0);
        REQUIRE(res.tail_bound < 1e-6 * res.value);
        ns.push_back(n);
        values.push_back(res.value);
    }
    const FitResult fit = fit_exponential_rate(ns, values);
    REQUIRE(fit.valid);
    REQUIRE(std::abs(fit.rate) < 5e-3);

    REQUIRE_THROWS_AS(
        transfer_integral(sample_potential(PotentialSpec::zero(), 10), 1.5),
        ValidationError);
}

TEST_CASE("transfer integral decays exponentially for the anderson ensemble") {
    // -(1/N) log I(N) approaches a positive constant
    std::vector<double> ns, mean_log;
    for (int n = 12; n <= 48; n += 12) {
        double acc = 0.0;
        const int reps = 12;
        for (int r = 0; r < reps; ++r) {
            const PotentialValues v = sample_potential(
                realize(PotentialSpec::anderson_pm1(2024), 11, static_cast<std::uint64_t>(r)), n);
            acc += std::log(transfer_integral(v, 5.0).value);
        }
        ns.push_back(n);
        mean_log.push_back(acc / reps);
    }
    for (std::size_t i = 1; i < ns.size(); ++i) REQUIRE(mean_log[i] < mean_log[i - 1]);
    const double rate = -(mean_log.back() - mean_log.front()) / (ns.back() - ns.front());
    REQUIRE(rate > 0.05);
}

TEST_CASE("lyapunov exponents: free chain benchmarks") {
    const LyapunovEstimate inside = lyapunov(0.5, PotentialSpec::zero(), 2000, 1);
    REQUIRE(inside.mean >= -1e-12);
    REQUIRE(inside.mean <= 0.05);

    // |mu_max| of [[-3,-1],[1,0]] is (3+sqrt(5))/2
    const LyapunovEstimate outside = lyapunov(3.0, PotentialSpec::zero(), 5000, 1);
    REQUIRE(outside.mean == Catch::Approx(0.9624236501192069).margin(0.01));
    REQUIRE(outside.std_error == 0.0);
}

TEST_CASE("lyapunov exponents: anderson disorder is strictly localizing") {
    const LyapunovEstimate est = lyapunov(0.0, PotentialSpec::anderson_pm1(99), 10000, 50, 4);
    REQUIRE(est.mean > 0.0);
    REQUIRE(est.std_error < est.mean / 5.0);
    REQUIRE(est.samples == 50);
}

TEST_CASE("min lyapunov hits the almost mathieu plateau") {
    // L(E) = log(lambda) on the spectrum for lambda >= 1
    const PotentialSpec critical = PotentialSpec::almost_mathieu(1.0, kGoldenAlpha, 0.0);
    const MinLyapunovResult lmin1 =
        min_lyapunov(critical, EnergyGrid::uniform_scan(4.0, 5.0, 0.05), 1500, 4, 21);
    REQUIRE(lmin1.estimate.mean >= -1e-12);
    REQUIRE(lmin1.estimate.mean <= 0.05);

    const PotentialSpec super = PotentialSpec::almost_mathieu(2.0, kGoldenAlpha, 0.0);
    const MinLyapunovResult lmin2 =
        min_lyapunov(super, EnergyGrid::uniform_scan(6.0, 7.0, 0.05), 1500, 4, 22);
    REQUIRE(lmin2.estimate.mean == Catch::Approx(std::log(2.0)).margin(0.05));

    // free chain: minimum attained inside the band, near zero
    const MinLyapunovResult lmin0 =
        min_lyapunov(PotentialSpec::zero(), EnergyGrid::uniform_scan(2.0, 3.0, 0.1), 2000, 1);
    REQUIRE(lmin0.estimate.mean <= 0.02);
    REQUIRE(std::abs(lmin0.energy) < 2.0);

    REQUIRE_THROWS_AS(min_lyapunov(critical, EnergyGrid{}, 100, 1), ValidationError);
}

TEST_CASE("large deviation diagnostics behave like probabilities") {
    // impossible deviations: the one-step norm bounds the rate outright
    const PotentialSpec anderson = PotentialSpec::anderson_pm1(31);
    REQUIRE(ld_deviation_probability(anderson, 0.0, 100, 50.0, 200, 5) == 0.0);

    // deterministic ensemble: exactly zero or one
    const double p0 = ld_deviation_probability(PotentialSpec::zero(), 0.5, 400, 0.1, 100);
    REQUIRE((p0 == 0.0 || p0 == 1.0));

    // deviation probability decreases with chain length
    const double p50 = ld_deviation_probability(anderson, 0.0, 50, 0.1, 1000, 6);
    const double p400 = ld_deviation_probability(anderson, 0.0, 400, 0.1, 1000, 6);
    REQUIRE(p400 <= p50);
    REQUIRE(p400 <= 0.05);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "latcurrent/closed_forms.hpp"
#include "latcurrent/fits.hpp"

using namespace latcurrent;

TEST_CASE("exponential fit recovers exact log-linear data") {
    std::vector<double> ns, values;
    for (int n = 5; n <= 40; n += 5) {
        ns.push_back(n);
        values.push_back(2.5 * std::exp(-0.3 * n));
    }
    const FitResult fit = fit_exponential_rate(ns, values);
    REQUIRE(fit.valid);
    REQUIRE(fit.rate == Catch::Approx(0.3).margin(1e-12));
    REQUIRE(fit.prefactor == Catch::Approx(2.5).margin(1e-10));
    REQUIRE(fit.r_squared == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("power law fit recovers exact log-log data") {
    std::vector<double> ns, values;
    for (int n = 4; n <= 128; n *= 2) {
        ns.push_back(n);
        values.push_back(7.0 / n);
    }
    const FitResult fit = fit_power_law(ns, values);
    REQUIRE(fit.valid);
    REQUIRE(fit.rate == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(fit.prefactor == Catch::Approx(7.0).margin(1e-10));
    REQUIRE(fit.r_squared == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("fits mark non-positive data as not applicable") {
    const std::vector<double> ns = {1, 2, 3, 4};
    REQUIRE_FALSE(fit_exponential_rate(ns, {1.0, 0.5, 0.0, 0.25}).valid);
    REQUIRE_FALSE(fit_power_law(ns, {1.0, -0.5, 0.3, 0.25}).valid);
    REQUIRE_THROWS_AS(fit_power_law({1, 2, 3}, {1, 2, 3}), ValidationError);
}

TEST_CASE("exact noisy-chain currents fit a power law with exponent one") {
    CouplingSpec c;
    c.alpha_in_l = 1.0;
    c.alpha_out_r = 1.0;
    c.beta = 2.0;
    std::vector<double> ns, values;
    for (int n = 50; n <= 500; n += 50) {
        ns.push_back(n);
        values.push_back(closed_form_1d(c, n));
    }
    const FitResult fit = fit_power_law(ns, values);
    REQUIRE(fit.valid);
    REQUIRE(fit.rate == Catch::Approx(1.0).margin(0.02));
}

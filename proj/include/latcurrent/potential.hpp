#pragma once

// On-site potentials: fixed values and dynamically defined ensembles
// (i.i.d. Anderson, Fibonacci quasi-crystal, Almost Mathieu quasi-periodic).
// Sampling is a pure function of (spec, n_sites); randomness enters only
// through seeds stored in the spec itself.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "latcurrent/errors.hpp"
#include "latcurrent/rng.hpp"

namespace latcurrent {

// Golden-mean rotation number used by the Fibonacci potential.
inline constexpr double kGoldenAlpha = 0.61803398874989484820458683436563811772;

enum class PotentialKind { Zero, Explicit, Anderson, Fibonacci, AlmostMathieu };

struct PotentialSpec {
    PotentialKind kind = PotentialKind::Zero;

    std::vector<double> values;   // Explicit
    std::vector<double> support;  // Anderson
    std::vector<double> weights;  // Anderson
    std::uint64_t seed = 0;       // Anderson
    double lambda = 1.0;          // Fibonacci, AlmostMathieu
    double alpha = kGoldenAlpha;  // AlmostMathieu (Fibonacci always uses the golden mean)
    double omega = 0.0;           // Fibonacci, AlmostMathieu

    static PotentialSpec zero() { return {}; }

    static PotentialSpec explicit_values(std::vector<double> v) {
        PotentialSpec s;
        s.kind = PotentialKind::Explicit;
        s.values = std::move(v);
        return s;
    }

    static PotentialSpec anderson(std::vector<double> support, std::vector<double> weights,
                                  std::uint64_t seed) {
        PotentialSpec s;
        s.kind = PotentialKind::Anderson;
        s.support = std::move(support);
        s.weights = std::move(weights);
        s.seed = seed;
        return s;
    }

    // Symmetric Bernoulli +/-1 disorder.
    static PotentialSpec anderson_pm1(std::uint64_t seed) {
        return anderson({-1.0, 1.0}, {0.5, 0.5}, seed);
    }

    static PotentialSpec fibonacci(double lambda, double omega = 0.0) {
        PotentialSpec s;
        s.kind = PotentialKind::Fibonacci;
        s.lambda = lambda;
        s.omega = omega;
        return s;
    }

    static PotentialSpec almost_mathieu(double lambda, double alpha, double omega) {
        PotentialSpec s;
        s.kind = PotentialKind::AlmostMathieu;
        s.lambda = lambda;
        s.alpha = alpha;
        s.omega = omega;
        return s;
    }

    void validate() const {
        switch (kind) {
            case PotentialKind::Zero:
                return;
            case PotentialKind::Explicit:
                if (values.empty()) throw ValidationError("explicit potential: empty value list");
                for (double v : values)
                    if (!std::isfinite(v)) throw ValidationError("explicit potential: non-finite value");
                return;
            case PotentialKind::Anderson: {
                if (support.size() != weights.size() || support.empty())
                    throw ValidationError("anderson potential: support/weights size mismatch");
                double total = 0.0;
                for (double w : weights) {
                    if (w < 0.0) throw ValidationError("anderson potential: negative weight");
                    total += w;
                }
                if (std::abs(total - 1.0) > 1e-12)
                    throw ValidationError("anderson potential: weights must sum to 1 (got " +
                                          std::to_string(total) + ")");
                int distinct = 0;
                for (std::size_t i = 0; i < support.size(); ++i) {
                    if (weights[i] == 0.0) continue;
                    bool repeated = false;
                    for (std::size_t j = 0; j < i; ++j)
                        if (weights[j] > 0.0 && support[j] == support[i]) repeated = true;
                    if (!repeated) ++distinct;
                }
                if (distinct < 2)
                    throw ValidationError("anderson potential: support needs >= 2 distinct values");
                return;
            }
            case PotentialKind::Fibonacci:
                if (!(lambda > 0.0)) throw ValidationError("fibonacci potential: lambda must be > 0");
                if (!(omega >= 0.0 && omega < 1.0))
                    throw ValidationError("fibonacci potential: omega must lie in [0,1)");
                return;
            case PotentialKind::AlmostMathieu:
                if (!(lambda > 0.0)) throw ValidationError("almost mathieu potential: lambda must be > 0");
                if (!(alpha >= 0.0 && alpha < 1.0))
                    throw ValidationError("almost mathieu potential: alpha must lie in [0,1)");
                if (!(omega >= 0.0 && omega < 1.0))
                    throw ValidationError("almost mathieu potential: omega must lie in [0,1)");
                return;
        }
        throw ValidationError("potential: unknown kind");
    }

    bool is_random() const { return kind == PotentialKind::Anderson; }

    bool is_quasiperiodic() const {
        return kind == PotentialKind::Fibonacci || kind == PotentialKind::AlmostMathieu;
    }

    // A deterministic spec yields the same values on every realization.
    bool is_ensemble() const { return is_random() || is_quasiperiodic(); }

    // A-priori bound on sup|v(n)| from the spec parameters alone.
    double sup_bound() const {
        switch (kind) {
            case PotentialKind::Zero:
                return 0.0;
            case PotentialKind::Explicit: {
                double m = 0.0;
                for (double v : values) m = std::max(m, std::abs(v));
                return m;
            }
            case PotentialKind::Anderson: {
                double m = 0.0;
                for (std::size_t i = 0; i < support.size(); ++i)
                    if (weights[i] > 0.0) m = std::max(m, std::abs(support[i]));
                return m;
            }
            case PotentialKind::Fibonacci:
                return lambda;
            case PotentialKind::AlmostMathieu:
                return 2.0 * lambda;
        }
        return 0.0;
    }

    const char* kind_name() const {
        switch (kind) {
            case PotentialKind::Zero: return "zero";
            case PotentialKind::Explicit: return "explicit";
            case PotentialKind::Anderson: return "anderson";
            case PotentialKind::Fibonacci: return "fibonacci";
            case PotentialKind::AlmostMathieu: return "almost_mathieu";
        }
        return "unknown";
    }
};

struct PotentialValues {
    std::vector<double> values;
    double norm_sup = 0.0;

    int size() const { return static_cast<int>(values.size()); }
};

inline PotentialValues make_potential_values(std::vector<double> v) {
    PotentialValues out;
    out.values = std::move(v);
    for (double x : out.values) {
        if (!std::isfinite(x)) throw ValidationError("potential values must be finite");
        out.norm_sup = std::max(out.norm_sup, std::abs(x));
    }
    return out;
}

// Realization r of an ensemble spec for a sweep seeded with sweep_seed.
// r == 0 returns the spec unchanged so single runs reproduce exactly;
// r >= 1 re-seeds Anderson disorder and redraws the quasi-periodic phase
// from the derived stream. Deterministic specs pass through.
inline PotentialSpec realize(const PotentialSpec& spec, std::uint64_t sweep_seed,
                             std::uint64_t realization) {
    if (realization == 0) return spec;
    PotentialSpec out = spec;
    switch (spec.kind) {
        case PotentialKind::Anderson:
            out.seed = derive_stream_seed(spec.seed ^ sweep_seed, realization);
            break;
        case PotentialKind::Fibonacci:
        case PotentialKind::AlmostMathieu: {
            Xoshiro256ss rng(derive_stream_seed(sweep_seed, realization));
            out.omega = rng.uniform01();
            break;
        }
        default:
            break;
    }
    return out;
}

// Evaluate the potential on sites 1..n_sites. Fibonacci membership
// frac(omega + n*alpha) in [1-alpha, 1) is decided in long double; the
// nearest approach of the golden-mean orbit to the boundary is ~1/(sqrt(5) n),
// far above extended-precision rounding for n <= 1e6.
inline PotentialValues sample_potential(const PotentialSpec& spec, int n_sites) {
    spec.validate();
    if (n_sites < 1) throw ValidationError("sample_potential: need n_sites >= 1");

    std::vector<double> v(static_cast<std::size_t>(n_sites), 0.0);
    switch (spec.kind) {
        case PotentialKind::Zero:
            break;
        case PotentialKind::Explicit:
            if (static_cast<int>(spec.values.size()) != n_sites)
                throw ValidationError("explicit potential: length " +
                                      std::to_string(spec.values.size()) + " != n_sites " +
                                      std::to_string(n_sites));
            v = spec.values;
            break;
        case PotentialKind::Anderson: {
            std::vector<double> cdf(spec.weights.size());
            double acc = 0.0;
            for (std::size_t i = 0; i < spec.weights.size(); ++i) {
                acc += spec.weights[i];
                cdf[i] = acc;
            }
            cdf.back() = 1.0;
            Xoshiro256ss rng(spec.seed);
            for (int n = 0; n < n_sites; ++n) {
                const double u = rng.uniform01();
                std::size_t k = 0;
                while (k + 1 < cdf.size() && u >= cdf[k]) ++k;
                v[static_cast<std::size_t>(n)] = spec.support[k];
            }
            break;
        }
        case PotentialKind::Fibonacci: {
            const long double a = 0.61803398874989484820458683436563811772L;
            const long double om = static_cast<long double>(spec.omega);
            for (int n = 1; n <= n_sites; ++n) {
                long double x = std::fmod(om + static_cast<long double>(n) * a, 1.0L);
                if (x < 0.0L) x += 1.0L;
                v[static_cast<std::size_t>(n - 1)] = (x >= 1.0L - a) ? -spec.lambda : 0.0;
            }
            break;
        }
        case PotentialKind::AlmostMathieu: {
            const long double a = static_cast<long double>(spec.alpha);
            const long double om = static_cast<long double>(spec.omega);
            const long double two_pi = 6.283185307179586476925286766559005768L;
            for (int n = 1; n <= n_sites; ++n) {
                long double x = std::fmod(om + static_cast<long double>(n) * a, 1.0L);
                if (x < 0.0L) x += 1.0L;
                v[static_cast<std::size_t>(n - 1)] =
                    static_cast<double>(-2.0L * static_cast<long double>(spec.lambda) *
                                        std::cos(two_pi * x));
            }
            break;
        }
    }
    return make_potential_values(std::move(v));
}

// JSON wire format: tagged object {"kind": ..., ...}; see
// docs/potential_spec.schema.json.
inline nlohmann::json to_json(const PotentialSpec& spec) {
    nlohmann::json j;
    j["kind"] = spec.kind_name();
    switch (spec.kind) {
        case PotentialKind::Zero:
            break;
        case PotentialKind::Explicit:
            j["values"] = spec.values;
            break;
        case PotentialKind::Anderson:
            j["support"] = spec.support;
            j["weights"] = spec.weights;
            j["seed"] = spec.seed;
            break;
        case PotentialKind::Fibonacci:
            j["lambda"] = spec.lambda;
            j["omega"] = spec.omega;
            break;
        case PotentialKind::AlmostMathieu:
            j["lambda"] = spec.lambda;
            j["alpha"] = spec.alpha;
            j["omega"] = spec.omega;
            break;
    }
    return j;
}

inline PotentialSpec potential_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ValidationError("potential json: expected object with \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    PotentialSpec spec;
    if (kind == "zero") {
        spec.kind = PotentialKind::Zero;
    } else if (kind == "explicit") {
        spec = PotentialSpec::explicit_values(j.at("values").get<std::vector<double>>());
    } else if (kind == "anderson") {
        spec = PotentialSpec::anderson(j.at("support").get<std::vector<double>>(),
                                       j.at("weights").get<std::vector<double>>(),
                                       j.value("seed", std::uint64_t{0}));
    } else if (kind == "fibonacci") {
        spec = PotentialSpec::fibonacci(j.at("lambda").get<double>(), j.value("omega", 0.0));
    } else if (kind == "almost_mathieu") {
        spec = PotentialSpec::almost_mathieu(j.at("lambda").get<double>(),
                                             j.value("alpha", kGoldenAlpha),
                                             j.value("omega", 0.0));
    } else {
        throw ValidationError("potential json: unknown kind \"" + kind + "\"");
    }
    spec.validate();
    return spec;
}

}  // namespace latcurrent

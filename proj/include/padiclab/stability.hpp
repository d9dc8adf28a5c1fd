#pragma once

#include <optional>
#include <vector>

#include "padiclab/perturb.hpp"

namespace padiclab {

/// Verdict of the stability inequality at one node:
///   v(g'(s) - g(s)) >= N - r_s(g') + min{0, v(g(s))}   whenever r_s < N.
struct StabilityVerdict {
    enum Class { Ok, Violation, Borderline, NoClaim };

    NodeId node;
    unsigned N = 0;
    long r = 0;                      // projected precision loss r_s
    Valuation v_g = Valuation(0);    // v(g(s)) (or the pairwise proxy)
    long correction = 0;             // min{0, v(g(s))}
    long predicted = 0;              // N - r + correction
    Valuation actual = Valuation(0); // v of the observed error
    Valuation margin = Valuation(0); // actual - predicted
    Class cls = Ok;
    bool proxy_correction = false;       // correction used the pairwise proxy
    bool representation_limited = false; // actual capped by representable precision

    static const char* class_name(Class c) {
        switch (c) {
            case Ok: return "ok";
            case Violation: return "violation";
            case Borderline: return "borderline";
            default: return "no-claim";
        }
    }
};

namespace detail {

inline void classify(StabilityVerdict& v) {
    v.predicted = static_cast<long>(v.N) - v.r + v.correction;
    v.margin = v.actual.is_infinity() ? Valuation::infinity()
                                      : v.actual - Valuation(v.predicted);
    if (v.r > static_cast<long>(v.N)) {
        v.cls = StabilityVerdict::NoClaim;
    } else if (v.r == static_cast<long>(v.N)) {
        // The borderline the source conjecture declines to commit to.
        v.cls = StabilityVerdict::Borderline;
    } else {
        v.cls = v.margin < Valuation(0) ? StabilityVerdict::Violation : StabilityVerdict::Ok;
    }
}

/// Observed error valuation of one node against a reference exact value,
/// honoring each mode's representation limits.
inline std::optional<Valuation> observed_error(const PerturbationResult& res, std::size_t i,
                                               const Rational& reference,
                                               const GremlinConfig& cfg, bool& limited) {
    limited = false;
    switch (res.mode) {
        case Mode::Exact: return cfg.ctx.valuation(res.values[i] - reference);
        case Mode::Float: {
            if (!res.value_known[i]) return std::nullopt;  // Unknown float value
            const PFloat& f = res.floats[i];
            Valuation v = cfg.ctx.valuation(res.values[i] - reference);
            if (f.kind() == PKind::Number) {
                Valuation bound(f.exponent() + static_cast<long>(cfg.N));
                if (v >= bound) {
                    // True error only guaranteed down to the last digit.
                    limited = true;
                    return bound;
                }
            }
            return v;
        }
        default: {  // Fixed
            Integer ref;
            try {
                ref = fixed_from_exact(reference, cfg.ctx, cfg.N);
            } catch (const FixedPointError&) {
                return std::nullopt;
            }
            Integer diff = res.residues[i] - ref;
            Integer mod = cfg.ctx.pow(cfg.N);
            mpz_mod(diff.get_mpz_t(), diff.get_mpz_t(), mod.get_mpz_t());
            if (diff == 0) {
                limited = true;
                return Valuation(static_cast<long>(cfg.N));
            }
            return Valuation(fixed_valuation(diff, cfg.ctx));
        }
    }
}

}  // namespace detail

/// One verdict per completed node, comparing a perturbed run against the
/// exact solution g.
inline std::vector<StabilityVerdict> check_stability(const RecurrenceSpec& spec,
                                                     const std::map<NodeId, Rational>& g,
                                                     const PerturbationResult& res,
                                                     const GremlinConfig& cfg) {
    std::vector<StabilityVerdict> out;
    for (std::size_t i = 0; i < res.completed; ++i) {
        StabilityVerdict v;
        v.node = spec[i].id;
        v.N = cfg.N;
        v.r = res.loss[i];
        v.v_g = cfg.ctx.valuation(g.at(spec[i].id));
        v.correction = (!v.v_g.is_infinity() && v.v_g < Valuation(0)) ? v.v_g.finite() : 0;
        bool limited = false;
        auto actual = detail::observed_error(res, i, g.at(spec[i].id), cfg, limited);
        if (!actual) {
            // No measurable digits at this node; nothing to claim.
            v.predicted = static_cast<long>(v.N) - v.r + v.correction;
            v.actual = Valuation(0);
            v.margin = Valuation(0);
            v.cls = StabilityVerdict::NoClaim;
            v.representation_limited = true;
        } else {
            v.actual = *actual;
            v.representation_limited = limited;
            detail::classify(v);
        }
        out.push_back(std::move(v));
    }
    return out;
}

/// One verdict per node common to two perturbed runs, comparing the runs
/// against each other:
///   v(g'1(s) - g'2(s)) >= N - max(r1, r2) + correction.
/// The correction uses v(g(s)) when g is supplied; otherwise the
/// apparent valuation of g'1(s) stands in and the verdict is flagged.
inline std::vector<StabilityVerdict> check_pairwise(const RecurrenceSpec& spec,
                                                    const std::map<NodeId, Rational>* g,
                                                    const PerturbationResult& r1,
                                                    const PerturbationResult& r2,
                                                    const GremlinConfig& cfg) {
    std::vector<StabilityVerdict> out;
    std::size_t n = std::min(r1.completed, r2.completed);
    for (std::size_t i = 0; i < n; ++i) {
        StabilityVerdict v;
        v.node = spec[i].id;
        v.N = cfg.N;
        v.r = std::max(r1.loss[i], r2.loss[i]);
        if (g) {
            v.v_g = cfg.ctx.valuation(g->at(spec[i].id));
        } else {
            v.proxy_correction = true;
            switch (r1.mode) {
                case Mode::Exact: v.v_g = cfg.ctx.valuation(r1.values[i]); break;
                case Mode::Float:
                    if (!r1.value_known[i]) {
                        v.v_g = Valuation(r1.floats[i].exponent());
                    } else {
                        v.v_g = r1.floats[i].kind() == PKind::ExactZero
                                    ? Valuation::infinity()
                                    : Valuation(r1.floats[i].exponent());
                    }
                    break;
                default:
                    v.v_g = r1.residues[i] == 0
                                ? Valuation(static_cast<long>(cfg.N))
                                : Valuation(fixed_valuation(r1.residues[i], cfg.ctx));
            }
        }
        v.correction = (!v.v_g.is_infinity() && v.v_g < Valuation(0)) ? v.v_g.finite() : 0;

        bool limited = false;
        std::optional<Valuation> actual;
        switch (r1.mode) {
            case Mode::Exact:
                actual = cfg.ctx.valuation(r1.values[i] - r2.values[i]);
                break;
            case Mode::Float: {
                if (!r1.value_known[i] || !r2.value_known[i]) break;
                Valuation diff = cfg.ctx.valuation(r1.values[i] - r2.values[i]);
                long b1 = r1.floats[i].kind() == PKind::Number
                              ? r1.floats[i].exponent() + static_cast<long>(cfg.N)
                              : std::numeric_limits<long>::max();
                long b2 = r2.floats[i].kind() == PKind::Number
                              ? r2.floats[i].exponent() + static_cast<long>(cfg.N)
                              : std::numeric_limits<long>::max();
                long bound = std::min(b1, b2);
                if (bound != std::numeric_limits<long>::max() && diff >= Valuation(bound)) {
                    limited = true;
                    actual = Valuation(bound);
                } else {
                    actual = diff;
                }
                break;
            }
            default: {
                Integer diff = r1.residues[i] - r2.residues[i];
                Integer mod = cfg.ctx.pow(cfg.N);
                mpz_mod(diff.get_mpz_t(), diff.get_mpz_t(), mod.get_mpz_t());
                if (diff == 0) {
                    limited = true;
                    actual = Valuation(static_cast<long>(cfg.N));
                } else {
                    actual = Valuation(fixed_valuation(diff, cfg.ctx));
                }
            }
        }
        if (!actual) {
            v.predicted = static_cast<long>(v.N) - v.r + v.correction;
            v.actual = Valuation(0);
            v.margin = Valuation(0);
            v.cls = StabilityVerdict::NoClaim;
            v.representation_limited = true;
        } else {
            v.actual = *actual;
            v.representation_limited = limited;
            detail::classify(v);
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace padiclab

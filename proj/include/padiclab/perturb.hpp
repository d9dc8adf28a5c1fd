#pragma once

#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "padiclab/pfloat.hpp"
#include "padiclab/recurrence.hpp"

namespace padiclab {

enum class Mode { Exact, Float, Fixed };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Exact: return "exact";
        case Mode::Float: return "float";
        default: return "fixed";
    }
}

struct GremlinConfig {
    PrimeContext ctx;
    unsigned N;              // mantissa digits / star valuation floor
    unsigned depth = 8;      // base-p digits of each random star's unit part
    std::uint64_t seed = 0;
    Mode mode = Mode::Exact;
};

/// Identifies one gremlin site: (topological node index, 0 for P / 1 for Q,
/// monomial ordinal in map order).
using StarKey = std::tuple<std::uint32_t, std::uint8_t, std::uint32_t>;

/// Explicit star values; sites not listed get star = 0.
using StarAssignment = std::map<StarKey, Rational>;

struct TrialEvent {
    std::size_t node;
    FloatEvent event;
};

struct TrialAbort {
    std::size_t node;
    std::string reason;
};

/// Everything recorded about one perturbed evaluation of a recurrence.
struct PerturbationResult {
    Mode mode = Mode::Exact;
    /// Exact value per node (exact mode), residue lift (fixed mode), or
    /// float representative where one exists.
    std::vector<Rational> values;
    std::vector<bool> value_known;     // false where a float value is Unknown
    std::vector<PFloat> floats;        // float mode only
    std::vector<Integer> residues;     // fixed mode only
    std::vector<Valuation> denom_val;  // v(Q_s(g')) per completed node
    std::vector<long> loss;            // projected precision loss r_s
    std::vector<TrialEvent> events;
    std::optional<TrialAbort> abort;
    StarAssignment stars;              // exact mode, full assignment for replay
    std::size_t completed = 0;         // nodes evaluated before any abort
};

namespace detail {

/// The random star at one site: p^N times a unit part with `depth`
/// base-p digits, derived only from (seed, node, side, ordinal) so the
/// draw is schedule independent.
inline Rational draw_star(const GremlinConfig& cfg, std::uint64_t node_hash,
                          std::uint8_t side, std::uint32_t ordinal) {
    Integer u = 0;
    Integer pw = 1;
    for (unsigned j = 0; j < cfg.depth; ++j) {
        std::uint64_t r = splitmix64(mix_keys({cfg.seed, node_hash, side, ordinal, j}));
        u += Integer(static_cast<unsigned long>(r % cfg.ctx.prime())) * pw;
        pw *= cfg.ctx.prime_z();
    }
    return Rational(u) * Rational(cfg.ctx.pow(cfg.N));
}

inline long running_loss(const RecurrenceSpec& spec, std::size_t i,
                         const std::vector<long>& loss, long own_denom_val) {
    long r = own_denom_val;
    for (const NodeId& p : spec[i].predecessors)
        r = std::max(r, loss[spec.index_of(p)]);
    return r;
}

}  // namespace detail

/// r_s = max over t <= s (reflexive) of v(Q_t(g')), recomputed from the
/// recorded denominator valuations via the derived order.
inline std::vector<long> projected_loss(const RecurrenceSpec& spec,
                                        const PerturbationResult& result) {
    std::vector<long> r(result.completed, 0);
    for (std::size_t i = 0; i < result.completed; ++i) {
        long m = result.denom_val[i].finite();
        for (std::uint32_t t : spec.ancestors(i))
            if (t < result.completed) m = std::max(m, result.denom_val[t].finite());
        r[i] = m;
    }
    return r;
}

/// Exact gremlin mode: one fresh star per monomial coefficient of P and
/// Q, g' computed with exact rational arithmetic. `override_stars`, when
/// given, replaces the random draw (absent sites mean star = 0); this is
/// the replay path.
inline PerturbationResult perturb_exact(const RecurrenceSpec& spec,
                                        const GremlinConfig& cfg,
                                        const StarAssignment* override_stars = nullptr) {
    PerturbationResult res;
    res.mode = Mode::Exact;
    std::map<NodeId, Rational> values;

    for (std::size_t i = 0; i < spec.size(); ++i) {
        const NodeDef& d = spec[i];
        std::uint64_t nh = d.id.hash();
        auto perturbed_eval = [&](const SparsePoly& poly, std::uint8_t side) {
            Rational acc(0);
            std::uint32_t ordinal = 0;
            for (const auto& [m, c] : poly.terms) {
                StarKey key{static_cast<std::uint32_t>(i), side, ordinal};
                Rational star;
                if (override_stars) {
                    auto it = override_stars->find(key);
                    star = it == override_stars->end() ? Rational(0) : it->second;
                } else {
                    star = detail::draw_star(cfg, nh, side, ordinal);
                }
                res.stars.emplace(key, star);
                Rational term = (Rational(1) + star) * c;
                for (std::size_t j = 0; j < m.size(); ++j)
                    if (m[j] != 0) term *= rational_pow(values.at(d.predecessors[j]), m[j]);
                acc += term;
                ++ordinal;
            }
            return acc;
        };
        Rational num = perturbed_eval(d.P, 0);
        Rational den = perturbed_eval(d.Q, 1);
        if (den == 0) {
            res.abort = TrialAbort{i, "perturbed denominator is exactly zero at " + d.id.str()};
            return res;
        }
        res.values.push_back(num / den);
        res.value_known.push_back(true);
        values.emplace(d.id, res.values.back());
        res.denom_val.push_back(cfg.ctx.valuation(den));
        res.loss.push_back(detail::running_loss(spec, i, res.loss,
                                                res.denom_val.back().finite()));
        res.completed = i + 1;
    }
    return res;
}

/// The all-zero assignment: an N-perturbation that perturbs nothing.
inline StarAssignment zero_stars() { return StarAssignment{}; }

/// Floating emulation of one trial: every node evaluated with N-digit
/// p-adic floats, one digit stream for the whole trial.
inline PerturbationResult run_float(const RecurrenceSpec& spec, const GremlinConfig& cfg) {
    PerturbationResult res;
    res.mode = Mode::Float;
    const unsigned long p = cfg.ctx.prime();
    DigitSource fill(p, mix_keys({cfg.seed, 0xf10a7ull}));

    for (std::size_t i = 0; i < spec.size(); ++i) {
        const NodeDef& d = spec[i];
        std::vector<FloatEvent> ev;
        auto eval = [&](const SparsePoly& poly) {
            std::optional<PFloat> acc;
            for (const auto& [m, c] : poly.terms) {
                PFloat term = round_exact(c, cfg.ctx, cfg.N);
                for (std::size_t j = 0; j < m.size(); ++j)
                    for (unsigned e = 0; e < m[j]; ++e)
                        term = float_arith(ArithOp::Mul, term,
                                           res.floats[spec.index_of(d.predecessors[j])],
                                           fill, ev);
                acc = acc ? float_arith(ArithOp::Add, *acc, term, fill, ev)
                          : term;
            }
            return acc ? *acc : PFloat::exact_zero(p, cfg.N);
        };
        try {
            PFloat num = eval(d.P);
            PFloat den = eval(d.Q);
            PFloat val = float_arith(ArithOp::Div, num, den, fill, ev);
            for (const FloatEvent& e : ev) res.events.push_back({i, e});
            res.floats.push_back(val);
            bool known = val.kind() != PKind::Unknown;
            res.value_known.push_back(known);
            res.values.push_back(known ? val.representative() : Rational(0));
            res.denom_val.push_back(Valuation(den.exponent()));
            res.loss.push_back(detail::running_loss(spec, i, res.loss, den.exponent()));
            res.completed = i + 1;
        } catch (const PrecisionFailure& e) {
            for (const FloatEvent& fe : ev) res.events.push_back({i, fe});
            res.abort = TrialAbort{i, std::string(e.what()) + " at " + d.id.str()};
            return res;
        }
    }
    return res;
}

/// Fixed point mode: residues modulo p^N. Division by a residue of
/// valuation k > 0 determines only N-k digits; the vacated top digits
/// are drawn from the digit stream, mirroring the float-mode fill.
inline PerturbationResult run_fixed(const RecurrenceSpec& spec, const GremlinConfig& cfg) {
    PerturbationResult res;
    res.mode = Mode::Fixed;
    const Integer mod = cfg.ctx.pow(cfg.N);
    const Integer pz = cfg.ctx.prime_z();
    DigitSource fill(cfg.ctx.prime(), mix_keys({cfg.seed, 0xf17edull}));

    for (std::size_t i = 0; i < spec.size(); ++i) {
        const NodeDef& d = spec[i];
        auto eval = [&](const SparsePoly& poly) {
            Integer acc = 0;
            for (const auto& [m, c] : poly.terms) {
                Integer term = fixed_from_exact(c, cfg.ctx, cfg.N);
                for (std::size_t j = 0; j < m.size(); ++j) {
                    if (m[j] == 0) continue;
                    Integer base = res.residues[spec.index_of(d.predecessors[j])];
                    for (unsigned e = 0; e < m[j]; ++e) term = (term * base) % mod;
                }
                acc = (acc + term) % mod;
            }
            return acc;
        };
        Integer num = eval(d.P);
        Integer den = eval(d.Q);
        if (den == 0) {
            res.abort = TrialAbort{i, "denominator residue is zero at " + d.id.str()};
            return res;
        }
        long k = fixed_valuation(den, cfg.ctx);
        Integer value;
        if (k == 0) {
            value = fixed_arith(ArithOp::Div, num, den, cfg.ctx, cfg.N);
        } else {
            Integer pk = integer_pow(pz, static_cast<unsigned long>(k));
            if (!mpz_divisible_p(num.get_mpz_t(), pk.get_mpz_t())) {
                res.abort = TrialAbort{
                    i, "quotient not representable modulo p^N at " + d.id.str()};
                return res;
            }
            Integer modk = integer_pow(pz, cfg.N - static_cast<unsigned long>(k));
            Integer dunit = den / pk;
            Integer inv;
            mpz_invert(inv.get_mpz_t(), dunit.get_mpz_t(), modk.get_mpz_t());
            Integer base = ((num / pk) * inv) % modk;
            Integer high = 0;
            for (long j = 0; j < k; ++j)
                high += Integer(fill.draw()) * integer_pow(pz, static_cast<unsigned long>(j));
            value = base + modk * high;
            res.events.push_back(
                {i, FloatEvent{FloatEvent::Cancellation, static_cast<unsigned>(k)}});
        }
        res.residues.push_back(value);
        res.values.push_back(Rational(value));
        res.value_known.push_back(true);
        res.denom_val.push_back(Valuation(k));
        res.loss.push_back(detail::running_loss(spec, i, res.loss, k));
        res.completed = i + 1;
    }
    return res;
}

/// Dispatch on cfg.mode.
inline PerturbationResult run_perturbation(const RecurrenceSpec& spec,
                                           const GremlinConfig& cfg,
                                           const StarAssignment* override_stars = nullptr) {
    switch (cfg.mode) {
        case Mode::Exact: return perturb_exact(spec, cfg, override_stars);
        case Mode::Float: return run_float(spec, cfg);
        default: return run_fixed(spec, cfg);
    }
}

/// The single documented gremlin assignment for the counterexample
/// family: star -p^N on the constant term of P at node x[4], all other
/// stars zero. Shipped so reports can replay it without random search.
inline StarAssignment documented_counterexample_assignment(const RecurrenceSpec& spec,
                                                           const GremlinConfig& cfg) {
    StarAssignment stars;
    std::size_t i = spec.index_of(node("x", {4}));
    const SparsePoly& P = spec[i].P;
    std::uint32_t ordinal = 0;
    for (const auto& [m, c] : P.terms) {
        bool constant = true;
        for (unsigned e : m) constant &= (e == 0);
        if (constant) {
            stars.emplace(StarKey{static_cast<std::uint32_t>(i), 0, ordinal},
                          Rational(-cfg.ctx.pow(cfg.N)));
            return stars;
        }
        ++ordinal;
    }
    throw DomainError("no constant term in P at x[4]");
}

}  // namespace padiclab

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "padiclab/digits.hpp"
#include "padiclab/valuation.hpp"

namespace padiclab {

enum class PKind { Number, ExactZero, Unknown };

enum class ArithOp { Add, Sub, Mul, Div };

/// One noteworthy incident during emulated arithmetic.
struct FloatEvent {
    enum Type {
        Cancellation,       ///< leading k digits cancelled in add/sub; k fresh digits filled
        TotalCancellation,  ///< all N digits cancelled; result degraded to Unknown
        UnknownFill,        ///< an Unknown summand clobbered k high-order digits
    };
    Type type;
    unsigned k;
};

/// A p-adic floating point value with an N-digit mantissa.
///
/// kind = Number represents every rational r with v(r) = exponent and
/// unit part congruent to the mantissa mod p^N; equivalently the class
/// of any such r under multiplication by 1 + p^N u. kind = ExactZero is
/// the honest zero. kind = Unknown carries only the bound
/// v(value) >= exponent, the state left behind by total cancellation.
class PFloat {
public:
    static PFloat number(unsigned long p, unsigned N, Integer mantissa, long exponent) {
        PFloat f(p, N, PKind::Number);
        Integer mod = integer_pow(Integer(p), N);
        mpz_mod(mantissa.get_mpz_t(), mantissa.get_mpz_t(), mod.get_mpz_t());
        if (mantissa == 0 || mpz_divisible_ui_p(mantissa.get_mpz_t(), p))
            throw DomainError("PFloat: mantissa not a unit mod p^N");
        f.mantissa_ = std::move(mantissa);
        f.exponent_ = exponent;
        return f;
    }
    static PFloat exact_zero(unsigned long p, unsigned N) {
        return PFloat(p, N, PKind::ExactZero);
    }
    static PFloat unknown(unsigned long p, unsigned N, long valuation_bound) {
        PFloat f(p, N, PKind::Unknown);
        f.exponent_ = valuation_bound;
        return f;
    }

    unsigned long prime() const { return p_; }
    unsigned digits() const { return N_; }
    PKind kind() const { return kind_; }

    const Integer& mantissa() const {
        if (kind_ != PKind::Number) throw DomainError("PFloat: no mantissa");
        return mantissa_;
    }
    long exponent() const {
        if (kind_ == PKind::ExactZero) throw DomainError("PFloat: exact zero has no exponent");
        return exponent_;
    }
    /// Lower bound on the valuation of whatever this value stands for.
    Valuation valuation_bound() const {
        if (kind_ == PKind::ExactZero) return Valuation::infinity();
        return Valuation(exponent_);
    }

    /// The canonical exact member of the represented class:
    /// mantissa * p^exponent. Not defined for Unknown.
    Rational representative() const {
        switch (kind_) {
            case PKind::ExactZero: return Rational(0);
            case PKind::Number: return Rational(mantissa_) * rational_pow(Integer(p_), exponent_);
            default: throw DomainError("PFloat: Unknown has no representative");
        }
    }

    friend bool operator==(const PFloat& a, const PFloat& b) {
        if (a.p_ != b.p_ || a.N_ != b.N_ || a.kind_ != b.kind_) return false;
        switch (a.kind_) {
            case PKind::ExactZero: return true;
            case PKind::Unknown: return a.exponent_ == b.exponent_;
            default: return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
        }
    }

    std::string str() const {
        switch (kind_) {
            case PKind::ExactZero: return "0";
            case PKind::Unknown: return "unknown(v>=" + std::to_string(exponent_) + ")";
            default:
                return mantissa_.get_str() + "*" + std::to_string(p_) + "^" +
                       std::to_string(exponent_);
        }
    }

private:
    PFloat(unsigned long p, unsigned N, PKind kind) : p_(p), N_(N), kind_(kind) {}
    unsigned long p_;
    unsigned N_;
    PKind kind_;
    Integer mantissa_ = 0;
    long exponent_ = 0;
};

/// Rounds an exact rational into its N-digit representation. The unit
/// part's denominator is cleared by a modular inverse mod p^N.
inline PFloat round_exact(const Rational& x, const PrimeContext& ctx, unsigned N) {
    if (x == 0) return PFloat::exact_zero(ctx.prime(), N);
    long e = ctx.valuation(x).finite();
    Rational unit = x * rational_pow(ctx.prime_z(), -e);
    Integer mod = ctx.pow(N);
    Integer den_inv;
    Integer den(unit.get_den());
    if (mpz_invert(den_inv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t()) == 0)
        throw DomainError("round_exact: unit denominator not invertible (internal)");
    Integer m = (Integer(unit.get_num()) * den_inv) % mod;
    if (m < 0) m += mod;
    return PFloat::number(ctx.prime(), N, m, e);
}

/// True iff x and y admit the same N-digit representation,
/// i.e. v(y/x - 1) >= N.
inline bool same_representation(const Rational& x, const Rational& y,
                                const PrimeContext& ctx, unsigned N) {
    if (x == 0 || y == 0)
        throw DomainError("same_representation: zero argument");
    return ctx.valuation(y / x - 1) >= Valuation(static_cast<long>(N));
}

namespace detail {

inline PFloat negate(const PFloat& x) {
    if (x.kind() != PKind::Number) return x;
    Integer mod = integer_pow(Integer(x.prime()), x.digits());
    return PFloat::number(x.prime(), x.digits(), mod - x.mantissa(), x.exponent());
}

// Add with both operands kind=Number. Exact digit alignment, truncation
// to N digits, random refill of digits vacated by cancellation.
inline PFloat add_numbers(const PFloat& x, const PFloat& y, bool subtract,
                          DigitSource& fill, std::vector<FloatEvent>& events) {
    const unsigned long p = x.prime();
    const unsigned N = x.digits();
    const Integer pz(p);
    const Integer mod = integer_pow(pz, N);

    long e = std::min(x.exponent(), y.exponent());
    // Shifts beyond N digits cannot touch the mantissa; clamp.
    unsigned long dx = std::min<long>(x.exponent() - e, N);
    unsigned long dy = std::min<long>(y.exponent() - e, N);
    Integer t = x.mantissa() * integer_pow(pz, dx);
    Integer ty = y.mantissa() * integer_pow(pz, dy);
    if (subtract)
        t -= ty;
    else
        t += ty;
    mpz_mod(t.get_mpz_t(), t.get_mpz_t(), mod.get_mpz_t());

    if (t == 0) {
        events.push_back({FloatEvent::TotalCancellation, N});
        return PFloat::unknown(p, N, e + static_cast<long>(N));
    }
    Integer unit;
    unsigned long k = mpz_remove(unit.get_mpz_t(), t.get_mpz_t(), pz.get_mpz_t());
    if (k == 0) return PFloat::number(p, N, t, e);

    // unit < p^(N-k); the top k digits are undetermined after the shift.
    Integer high = 0;
    for (unsigned long j = 0; j < k; ++j)
        high += Integer(fill.draw()) * integer_pow(pz, j);
    Integer m = unit + integer_pow(pz, N - k) * high;
    events.push_back({FloatEvent::Cancellation, static_cast<unsigned>(k)});
    return PFloat::number(p, N, m, e + static_cast<long>(k));
}

// An Unknown summand: every digit position at or above its valuation
// bound becomes undetermined in the result.
inline PFloat add_unknown(const PFloat& num, long unknown_bound, DigitSource& fill,
                          std::vector<FloatEvent>& events) {
    const unsigned long p = num.prime();
    const unsigned N = num.digits();
    long e = num.exponent();
    if (unknown_bound - e >= static_cast<long>(N)) return num;
    if (unknown_bound <= e) {
        // Cannot even pin the leading digit.
        events.push_back({FloatEvent::UnknownFill, N});
        return PFloat::unknown(p, N, std::min(unknown_bound, e));
    }
    unsigned long keep = static_cast<unsigned long>(unknown_bound - e);
    const Integer pz(p);
    Integer low = num.mantissa() % integer_pow(pz, keep);
    Integer high = 0;
    unsigned long fills = N - keep;
    for (unsigned long j = 0; j < fills; ++j)
        high += Integer(fill.draw()) * integer_pow(pz, j);
    Integer m = low + integer_pow(pz, keep) * high;
    events.push_back({FloatEvent::UnknownFill, static_cast<unsigned>(fills)});
    // The kept digits include the leading unit digit, so m stays a unit.
    return PFloat::number(p, N, m, e);
}

}  // namespace detail

/// Emulated p-adic floating point arithmetic. The result is a valid
/// representation of op(x~, y~) for some exact values x~, y~ represented
/// by the operands. Division by ExactZero or Unknown aborts the trial.
inline PFloat float_arith(ArithOp op, const PFloat& x, const PFloat& y,
                          DigitSource& fill, std::vector<FloatEvent>& events) {
    if (x.prime() != y.prime() || x.digits() != y.digits())
        throw DomainError("float_arith: mismatched (p, N)");
    const unsigned long p = x.prime();
    const unsigned N = x.digits();
    const Integer mod = integer_pow(Integer(p), N);

    switch (op) {
        case ArithOp::Mul: {
            if (x.kind() == PKind::ExactZero || y.kind() == PKind::ExactZero)
                return PFloat::exact_zero(p, N);
            if (x.kind() == PKind::Unknown || y.kind() == PKind::Unknown)
                return PFloat::unknown(p, N, x.exponent() + y.exponent());
            Integer m = (x.mantissa() * y.mantissa()) % mod;
            return PFloat::number(p, N, m, x.exponent() + y.exponent());
        }
        case ArithOp::Div: {
            if (y.kind() == PKind::ExactZero)
                throw PrecisionFailure("division by exact zero");
            if (y.kind() == PKind::Unknown)
                throw PrecisionFailure("division by a value with no determined digits");
            if (x.kind() == PKind::ExactZero) return PFloat::exact_zero(p, N);
            if (x.kind() == PKind::Unknown)
                return PFloat::unknown(p, N, x.exponent() - y.exponent());
            Integer inv;
            Integer ym = y.mantissa();
            mpz_invert(inv.get_mpz_t(), ym.get_mpz_t(), mod.get_mpz_t());
            Integer m = (x.mantissa() * inv) % mod;
            return PFloat::number(p, N, m, x.exponent() - y.exponent());
        }
        case ArithOp::Add:
        case ArithOp::Sub: {
            bool sub = (op == ArithOp::Sub);
            if (y.kind() == PKind::ExactZero) return x;
            if (x.kind() == PKind::ExactZero) return sub ? detail::negate(y) : y;
            if (x.kind() == PKind::Unknown && y.kind() == PKind::Unknown)
                return PFloat::unknown(p, N, std::min(x.exponent(), y.exponent()));
            if (x.kind() == PKind::Unknown)
                return detail::add_unknown(sub ? detail::negate(y) : y, x.exponent(),
                                           fill, events);
            if (y.kind() == PKind::Unknown)
                return detail::add_unknown(x, y.exponent(), fill, events);
            return detail::add_numbers(x, y, sub, fill, events);
        }
    }
    throw DomainError("float_arith: bad op");
}

// ---------------------------------------------------------------------------
// Fixed point: plain residues modulo p^N.

/// Residue of an exact rational of nonnegative valuation.
inline Integer fixed_from_exact(const Rational& x, const PrimeContext& ctx, unsigned N) {
    if (ctx.valuation(x) < Valuation(0))
        throw FixedPointError("fixed point: value has negative valuation");
    Integer mod = ctx.pow(N);
    Integer den_inv;
    Integer den(x.get_den());  // coprime to p since v(x) >= 0 and x is reduced
    if (mpz_invert(den_inv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t()) == 0)
        throw FixedPointError("fixed point: denominator not invertible");
    Integer m = (Integer(x.get_num()) * den_inv) % mod;
    if (m < 0) m += mod;
    return m;
}

inline Integer fixed_arith(ArithOp op, const Integer& x, const Integer& y,
                           const PrimeContext& ctx, unsigned N) {
    Integer mod = ctx.pow(N);
    Integer r;
    switch (op) {
        case ArithOp::Add: r = x + y; break;
        case ArithOp::Sub: r = x - y; break;
        case ArithOp::Mul: r = x * y; break;
        case ArithOp::Div: {
            Integer inv;
            if (mpz_invert(inv.get_mpz_t(), y.get_mpz_t(), mod.get_mpz_t()) == 0)
                throw FixedPointError("fixed point: division by a non-unit residue");
            r = x * inv;
            break;
        }
    }
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), mod.get_mpz_t());
    return r;
}

/// v_p of the least representative of a nonzero residue class mod p^N.
inline long fixed_valuation(const Integer& residue, const PrimeContext& ctx) {
    if (residue == 0) throw DomainError("fixed_valuation of the zero residue");
    return ctx.int_valuation(residue);
}

}  // namespace padiclab

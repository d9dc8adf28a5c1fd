#pragma once

#include <compare>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "padiclab/rational.hpp"

namespace padiclab {

/// A discrete valuation value: an integer or +infinity (the valuation of 0).
class Valuation {
public:
    static Valuation infinity() { return Valuation(true, 0); }
    explicit Valuation(long v) : inf_(false), v_(v) {}

    bool is_infinity() const { return inf_; }
    long finite() const {
        if (inf_) throw DomainError("Valuation: finite() on +infinity");
        return v_;
    }

    friend bool operator==(const Valuation& a, const Valuation& b) {
        return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
    }
    friend bool operator<(const Valuation& a, const Valuation& b) {
        if (a.inf_) return false;
        if (b.inf_) return true;
        return a.v_ < b.v_;
    }
    friend bool operator<=(const Valuation& a, const Valuation& b) { return !(b < a); }
    friend bool operator>(const Valuation& a, const Valuation& b) { return b < a; }
    friend bool operator>=(const Valuation& a, const Valuation& b) { return !(a < b); }
    friend bool operator!=(const Valuation& a, const Valuation& b) { return !(a == b); }

    Valuation operator+(const Valuation& o) const {
        if (inf_ || o.inf_) return infinity();
        return Valuation(v_ + o.v_);
    }
    Valuation operator-(const Valuation& o) const {
        if (inf_) return infinity();
        if (o.inf_) throw DomainError("Valuation: subtracting +infinity");
        return Valuation(v_ - o.v_);
    }

    static Valuation min(const Valuation& a, const Valuation& b) { return a < b ? a : b; }
    static Valuation max(const Valuation& a, const Valuation& b) { return a < b ? b : a; }

    /// "inf" or the decimal integer; matches the report serialization.
    std::string str() const { return inf_ ? "inf" : std::to_string(v_); }

private:
    Valuation(bool inf, long v) : inf_(inf), v_(v) {}
    bool inf_;
    long v_;
};

namespace detail {

inline bool miller_rabin_witness(const Integer& n, const Integer& a) {
    if (mpz_divisible_p(n.get_mpz_t(), a.get_mpz_t())) return n == a;
    Integer d = n - 1;
    unsigned long r = mpz_scan1(d.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), r);
    Integer x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n - 1) return true;
    for (unsigned long i = 1; i < r; ++i) {
        x = (x * x) % n;
        if (x == n - 1) return true;
    }
    return false;
}

/// Deterministic for all 64-bit inputs (witness set 2..37).
inline bool is_prime_u64(unsigned long p) {
    if (p < 2) return false;
    Integer n(p);
    for (unsigned long a : {2ul, 3ul, 5ul, 7ul, 11ul, 13ul, 17ul, 19ul, 23ul, 29ul, 31ul, 37ul}) {
        if (p == a) return true;
        if (!miller_rabin_witness(n, Integer(a))) return false;
    }
    return true;
}

}  // namespace detail

/// Fixes the prime p of the p-adic valuation on Q. The interface is the
/// one seam a different valued field backend would have to replace.
class PrimeContext {
public:
    explicit PrimeContext(unsigned long p) : p_(p), pz_(p) {
        if (!detail::is_prime_u64(p))
            throw DomainError("PrimeContext: " + std::to_string(p) + " is not prime");
    }

    unsigned long prime() const { return p_; }
    const Integer& prime_z() const { return pz_; }

    Integer pow(unsigned long k) const { return integer_pow(pz_, k); }

    /// v_p of a nonzero integer, by repeated division.
    long int_valuation(const Integer& n) const {
        if (n == 0) throw DomainError("int_valuation of zero");
        Integer rem;
        return static_cast<long>(mpz_remove(rem.get_mpz_t(), n.get_mpz_t(), pz_.get_mpz_t()));
    }

    Valuation valuation(const Rational& x) const {
        if (x == 0) return Valuation::infinity();
        return Valuation(int_valuation(Integer(x.get_num())) -
                         int_valuation(Integer(x.get_den())));
    }

    friend bool operator==(const PrimeContext& a, const PrimeContext& b) {
        return a.p_ == b.p_;
    }

private:
    unsigned long p_;
    Integer pz_;
};

/// Divides every coefficient by p^k, k the minimum valuation over the
/// nonzero entries, so the minimum valuation of the output is 0.
/// Returns the rescaled list and k.
inline std::pair<std::vector<Rational>, long> normalize_coefficients(
    const std::vector<Rational>& coeffs, const PrimeContext& ctx) {
    if (coeffs.empty()) throw DomainError("normalize_coefficients: empty input");
    bool any = false;
    long k = 0;
    for (const Rational& c : coeffs) {
        if (c == 0) continue;
        long v = ctx.valuation(c).finite();
        if (!any || v < k) k = v;
        any = true;
    }
    if (!any) throw DomainError("normalize_coefficients: all coefficients are zero");
    std::vector<Rational> out;
    out.reserve(coeffs.size());
    Rational scale = rational_pow(ctx.prime_z(), -k);
    for (const Rational& c : coeffs) out.push_back(c * scale);
    return {std::move(out), k};
}

}  // namespace padiclab

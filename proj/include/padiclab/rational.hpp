#pragma once

#include <gmpxx.h>

#include <string>

#include "padiclab/errors.hpp"

namespace padiclab {

// GMP keeps mpq_class canonical: gcd(num, den) = 1, den > 0, zero is 0/1.
// Every operation on these is exact; nothing in the library ever rounds
// a Rational.
using Integer = mpz_class;
using Rational = mpq_class;

inline Integer integer_pow(const Integer& base, unsigned long e) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

/// base^e for integer base and possibly negative exponent.
inline Rational rational_pow(const Integer& base, long e) {
    if (e >= 0) return Rational(integer_pow(base, static_cast<unsigned long>(e)));
    if (base == 0) throw DomainError("rational_pow: 0 to a negative power");
    Rational r(1, integer_pow(base, static_cast<unsigned long>(-e)));
    r.canonicalize();
    return r;
}

inline Rational rational_pow(const Rational& base, unsigned long e) {
    Rational num(integer_pow(Integer(base.get_num()), e));
    Integer den = integer_pow(Integer(base.get_den()), e);
    Rational r(num.get_num(), den);
    r.canonicalize();
    return r;
}

/// Parses "a" or "a/b" with optional leading minus.
inline Rational rational_from_string(const std::string& s) {
    Rational r;
    if (r.set_str(s, 10) != 0)
        throw DomainError("bad rational literal: " + s);
    if (r.get_den() == 0) throw DomainError("zero denominator in literal: " + s);
    r.canonicalize();
    return r;
}

inline std::string rational_to_string(const Rational& r) {
    return r.get_str();
}

}  // namespace padiclab

#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "cnplab/errors.hpp"

namespace cnplab {

// Exact big-rational scalar. All coefficient algebra in this library is exact;
// conversion to double happens only at the numerical-evaluation boundary.
using Rat = mpq_class;

// Always build fractions through here: mpq_class's two-argument constructor
// does not canonicalize, and non-canonical values break exact equality.
inline Rat rat(long num, long den = 1) {
    if (den == 0) throw validation_error("rational with zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

// Accepts "p", "-p", "p/q" with arbitrary-precision integer parts.
inline Rat rat_from_string(const std::string& text) {
    if (text.empty()) throw validation_error("empty rational literal");
    mpq_class q;
    if (q.set_str(text, 10) != 0)
        throw validation_error("malformed rational literal '" + text + "'");
    if (q.get_den() == 0)
        throw validation_error("rational with zero denominator '" + text + "'");
    q.canonicalize();
    return q;
}

// Canonical form: "p" when the denominator is 1, otherwise "p/q"; deterministic.
inline std::string rat_to_string(const Rat& q) {
    return q.get_str();
}

inline double rat_to_double(const Rat& q) {
    return q.get_d();
}

inline Rat rat_pow(const Rat& base, unsigned long e) {
    Rat out;
    mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), e);
    mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), e);
    out.canonicalize();
    return out;
}

inline Rat factorial_rat(unsigned long n) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return Rat(f);
}

inline Rat binomial_rat(unsigned long n, unsigned long k) {
    if (k > n) return Rat(0);
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), n, k);
    return Rat(b);
}

} // namespace cnplab

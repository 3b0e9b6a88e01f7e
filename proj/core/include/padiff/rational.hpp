#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "padiff/errors.hpp"

namespace padiff {

// All exact rational arithmetic goes through GMP. Rationals are kept
// canonicalized (gmp does this on construction from mpq_class ops).
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
    if (den == 0) throw PreconditionError("rational with zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

// "num/den" or "num". Used by every serialized interface.
inline std::string rat_to_string(const Rat& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Rat rat_from_string(const std::string& s) {
    try {
        Rat q(s);
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw PreconditionError("malformed rational: " + s);
    }
}

// Number of base-p digits of n >= 1, i.e. floor(log_p n) + 1.
inline long base_p_digits(long p, long n) {
    long d = 0;
    while (n > 0) {
        ++d;
        n /= p;
    }
    return d;
}

} // namespace padiff

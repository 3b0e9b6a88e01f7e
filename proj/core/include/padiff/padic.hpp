#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "padiff/logval.hpp"
#include "padiff/rational.hpp"

namespace padiff {

// p^n with a per-thread memo; n is small (a few hundred) everywhere.
const Int& p_power(long p, long n);

// v_p(i!) by the finite Legendre sum.
long val_factorial(long p, long i);

// v_p((2i-1)!!) with the conventions 0!! = 1 and (-1)!! = -1; p must be odd.
long val_odd_double_factorial(long p, long i);

// v_p(n), n != 0.
long val_int(long p, const Int& n);

// An element of Q_p known to finite precision:
//
//     value = unit * p^val + O(p^{val + prec}),   p !| unit,
//
// the capped-relative model: the unit carries `prec` base-p digits, and
// arithmetic tracks the largest precision it can still guarantee.  Two
// degenerate states exist: an exact zero, and an "inexact zero" O(p^val)
// left behind when a sum cancels every known digit.  Both have unit == 0.
class PadicScalar {
public:
    static constexpr long kInfVal = std::numeric_limits<long>::max() / 2;

    PadicScalar() : p_(2), val_(kInfVal), prec_(0), unit_(0) {}

    static PadicScalar zero(long p) { return PadicScalar(p, kInfVal, 0, 0); }
    // O(p^bound): zero to absolute precision `bound`.
    static PadicScalar inexact_zero(long p, long bound) {
        return PadicScalar(p, bound, 0, 0);
    }
    static PadicScalar one(long p, long prec) { return from_long(p, 1, prec); }

    static PadicScalar from_long(long p, long v, long prec);
    static PadicScalar from_int(long p, const Int& v, long prec);
    // n/d with p !| d is handled exactly; otherwise the valuation of d is
    // subtracted. prec is the relative precision of the result.
    static PadicScalar from_rat(long p, const Rat& q, long prec);
    // Same value, but with enough unit digits that the absolute precision
    // val + prec is at least abs_prec.
    static PadicScalar from_rat_abs(long p, const Rat& q, long abs_prec);
    static PadicScalar from_parts(long p, long val, const Int& unit, long prec);

    long prime() const { return p_; }
    bool is_exact_zero() const { return unit_ == 0 && val_ == kInfVal; }
    bool is_zero_class() const { return unit_ == 0; }
    // Known lower bound for the valuation (kInfVal for exact zero).
    long val_lower_bound() const { return val_; }
    // Valuation of a certified-nonzero scalar.
    long valuation() const;
    long precision() const { return prec_; }
    const Int& unit() const { return unit_; }
    // Absolute precision: the value is known mod p^{abs_precision()}.
    long abs_precision() const {
        return is_zero_class() ? val_ : val_ + prec_;
    }

    PadicScalar operator-() const;
    friend PadicScalar operator+(const PadicScalar& a, const PadicScalar& b);
    friend PadicScalar operator-(const PadicScalar& a, const PadicScalar& b);
    friend PadicScalar operator*(const PadicScalar& a, const PadicScalar& b);

    PadicScalar inv() const;
    friend PadicScalar operator/(const PadicScalar& a, const PadicScalar& b) {
        return a * b.inv();
    }
    // Multiply by p^k: shifts the valuation, the unit is untouched.
    PadicScalar shift(long k) const;
    PadicScalar div_by_p() const { return shift(-1); }

    PadicScalar mul_long(long c) const;

    // Truncate the unit to at most `prec` digits.
    PadicScalar with_precision(long prec) const;

    // Congruent mod p^{min abs precision}.
    bool congruent(const PadicScalar& other) const;

    std::string str() const;

private:
    PadicScalar(long p, long val, long prec, Int unit)
        : p_(p), val_(val), prec_(static_cast<long>(prec)), unit_(std::move(unit)) {}

    long p_;
    long val_;
    long prec_;
    Int unit_;
};

} // namespace padiff

#include "padiff/padic.hpp"

#include <unordered_map>
#include <vector>

#include "padiff/errors.hpp"

namespace padiff {

const Int& p_power(long p, long n) {
    thread_local std::unordered_map<long, std::vector<Int>> cache;
    auto& pows = cache[p];
    if (pows.empty()) pows.emplace_back(1);
    while (static_cast<long>(pows.size()) <= n) pows.push_back(pows.back() * p);
    return pows[static_cast<size_t>(n)];
}

long val_factorial(long p, long i) {
    if (p < 2) throw PreconditionError("val_factorial: p must be prime >= 2");
    if (i < 0) throw PreconditionError("val_factorial: negative argument");
    long v = 0;
    for (long q = p; q <= i; q *= p) {
        v += i / q;
        if (q > i / p) break;  // next q would overflow past i anyway
    }
    return v;
}

long val_odd_double_factorial(long p, long i) {
    if (p == 2) throw PreconditionError("val_odd_double_factorial: p = 2 rejected");
    if (i < 0) throw PreconditionError("val_odd_double_factorial: negative argument");
    // (2i-1)!! = (2i)! / (2^i i!), and p odd ignores the power of two.
    return val_factorial(p, 2 * i) - val_factorial(p, i);
}

long val_int(long p, const Int& n) {
    if (n == 0) throw PreconditionError("val_int: zero has no finite valuation");
    Int m = abs(n);
    long v = 0;
    while (mpz_divisible_ui_p(m.get_mpz_t(), static_cast<unsigned long>(p))) {
        mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), static_cast<unsigned long>(p));
        ++v;
    }
    return v;
}

PadicScalar PadicScalar::from_long(long p, long v, long prec) {
    return from_int(p, Int(v), prec);
}

PadicScalar PadicScalar::from_int(long p, const Int& v, long prec) {
    if (prec <= 0) throw PreconditionError("PadicScalar: precision must be positive");
    if (v == 0) return zero(p);
    long val = val_int(p, v);
    Int unit = v / p_power(p, val);
    unit %= p_power(p, prec);
    if (unit < 0) unit += p_power(p, prec);
    return PadicScalar(p, val, prec, std::move(unit));
}

PadicScalar PadicScalar::from_rat(long p, const Rat& q, long prec) {
    if (q == 0) return zero(p);
    Int num = q.get_num(), den = q.get_den();
    long vn = val_int(p, num), vd = val_int(p, den);
    Int nu = num / p_power(p, vn);
    Int du = den / p_power(p, vd);
    const Int& mod = p_power(p, prec);
    Int dinv;
    if (mpz_invert(dinv.get_mpz_t(), du.get_mpz_t(), mod.get_mpz_t()) == 0)
        throw PreconditionError("PadicScalar::from_rat: denominator not invertible");
    Int unit = (nu % mod) * dinv % mod;
    if (unit < 0) unit += mod;
    return PadicScalar(p, vn - vd, prec, std::move(unit));
}

PadicScalar PadicScalar::from_rat_abs(long p, const Rat& q, long abs_prec) {
    if (q == 0) return zero(p);
    long v = val_int(p, q.get_num()) - val_int(p, q.get_den());
    long prec = abs_prec - v;
    if (prec < 1) prec = 1;
    return from_rat(p, q, prec);
}

PadicScalar PadicScalar::from_parts(long p, long val, const Int& unit, long prec) {
    if (unit == 0) return zero(p);
    if (prec <= 0) throw PreconditionError("PadicScalar: precision must be positive");
    if (mpz_divisible_ui_p(unit.get_mpz_t(), static_cast<unsigned long>(p)))
        throw PreconditionError("PadicScalar: unit divisible by p");
    Int u = unit % p_power(p, prec);
    if (u < 0) u += p_power(p, prec);
    return PadicScalar(p, val, prec, std::move(u));
}

long PadicScalar::valuation() const {
    if (is_zero_class())
        throw PreconditionError("valuation(): not certified nonzero");
    return val_;
}

PadicScalar PadicScalar::operator-() const {
    if (is_zero_class()) return *this;
    return PadicScalar(p_, val_, prec_, p_power(p_, prec_) - unit_);
}

PadicScalar operator+(const PadicScalar& a, const PadicScalar& b) {
    if (a.p_ != b.p_) throw PreconditionError("PadicScalar: mixed primes");
    const long p = a.p_;
    if (a.is_exact_zero()) return b;
    if (b.is_exact_zero()) return a;
    // Result known mod p^A.
    long A = std::min(a.abs_precision(), b.abs_precision());
    if (a.is_zero_class() && b.is_zero_class())
        return PadicScalar::inexact_zero(p, A);
    long base = PadicScalar::kInfVal;
    if (!a.is_zero_class()) base = std::min(base, a.val_);
    if (!b.is_zero_class()) base = std::min(base, b.val_);
    if (base >= A) return PadicScalar::inexact_zero(p, A);
    const Int& mod = p_power(p, A - base);
    Int s = 0;
    if (!a.is_zero_class()) s += a.unit_ * p_power(p, a.val_ - base);
    if (!b.is_zero_class()) s += b.unit_ * p_power(p, b.val_ - base);
    s %= mod;
    if (s < 0) s += mod;
    if (s == 0) return PadicScalar::inexact_zero(p, A);
    long k = val_int(p, s);
    if (base + k >= A) return PadicScalar::inexact_zero(p, A);
    Int unit = s / p_power(p, k);
    return PadicScalar::from_parts(p, base + k, unit, A - base - k);
}

PadicScalar operator-(const PadicScalar& a, const PadicScalar& b) { return a + (-b); }

PadicScalar operator*(const PadicScalar& a, const PadicScalar& b) {
    if (a.p_ != b.p_) throw PreconditionError("PadicScalar: mixed primes");
    const long p = a.p_;
    if (a.is_exact_zero() || b.is_exact_zero()) return PadicScalar::zero(p);
    if (a.is_zero_class() || b.is_zero_class()) {
        // v(xy) >= v-bound(x) + v-bound(y).
        long bound = a.val_ + b.val_;
        return PadicScalar::inexact_zero(p, std::min<long>(bound, PadicScalar::kInfVal - 1));
    }
    long prec = std::min(a.prec_, b.prec_);
    const Int& mod = p_power(p, prec);
    Int unit = a.unit_ * b.unit_ % mod;
    return PadicScalar(p, a.val_ + b.val_, prec, std::move(unit));
}

PadicScalar PadicScalar::inv() const {
    if (is_exact_zero()) throw PreconditionError("PadicScalar: inversion of exact zero");
    if (is_zero_class())
        throw WindowError("PadicScalar: inversion of a value not certified nonzero");
    const Int& mod = p_power(p_, prec_);
    Int r;
    mpz_invert(r.get_mpz_t(), unit_.get_mpz_t(), mod.get_mpz_t());
    return PadicScalar(p_, -val_, prec_, std::move(r));
}

PadicScalar PadicScalar::shift(long k) const {
    if (is_exact_zero()) return *this;
    long v = val_ + k;
    return PadicScalar(p_, v, prec_, unit_);
}

PadicScalar PadicScalar::mul_long(long c) const {
    if (c == 0) return zero(p_);
    if (is_zero_class()) {
        if (is_exact_zero()) return *this;
        long vc = val_int(p_, Int(c));
        return inexact_zero(p_, val_ + vc);
    }
    return *this * from_long(p_, c, prec_);
}

PadicScalar PadicScalar::with_precision(long prec) const {
    if (is_zero_class() || prec >= prec_) return *this;
    if (prec < 1) throw PreconditionError("with_precision: precision must be positive");
    // unit_ is coprime to p, so the truncation stays a unit.
    Int u = unit_ % p_power(p_, prec);
    return PadicScalar(p_, val_, prec, std::move(u));
}

bool PadicScalar::congruent(const PadicScalar& other) const {
    PadicScalar d = *this - other;
    return d.is_zero_class();
}

std::string PadicScalar::str() const {
    if (is_exact_zero()) return "0";
    if (is_zero_class()) return "O(p^" + std::to_string(val_) + ")";
    return unit_.get_str() + "*p^" + std::to_string(val_) + " + O(p^" +
           std::to_string(val_ + prec_) + ")";
}

} // namespace padiff

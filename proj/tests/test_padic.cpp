#include <random>

#include "doctest.h"
#include "padiff/errors.hpp"
#include "padiff/padic.hpp"

using namespace padiff;

namespace {

// Independent oracle: v_p(i!) by valuating every factor.
long brute_val_factorial(long p, long i) {
    long v = 0;
    for (long k = 2; k <= i; ++k) {
        long m = k;
        while (m % p == 0) {
            ++v;
            m /= p;
        }
    }
    return v;
}

// Independent oracle: (2i-1)!! as the literal product of odd numbers.
Int brute_odd_double_factorial(long i) {
    if (i == 0) return Int(-1) * Int(-1);  // (-1)!! = -1; valuation oracle uses |.|
    Int r = 1;
    for (long k = 1; k <= 2 * i - 1; k += 2) r *= k;
    return r;
}

} // namespace

TEST_CASE("val_factorial matches the Legendre oracle") {
    CHECK(val_factorial(3, 0) == 0);
    CHECK(val_factorial(3, 9) == 4);   // floor(9/3) + floor(9/9)
    CHECK(val_factorial(5, 26) == 6);  // floor(26/5) + floor(26/25)
    for (long p : {3L, 5L, 7L})
        for (long i : {1L, 2L, 10L, 99L, 625L, 3001L})
            CHECK(val_factorial(p, i) == brute_val_factorial(p, i));
}

TEST_CASE("val_odd_double_factorial against brute products") {
    CHECK(val_odd_double_factorial(5, 0) == 0);
    CHECK(val_odd_double_factorial(3, 2) == 1);  // 3!! = 3
    CHECK(val_odd_double_factorial(5, 3) == 1);  // 5!! = 15
    CHECK_THROWS_AS(val_odd_double_factorial(2, 3), PreconditionError);
    for (long p : {3L, 5L, 7L})
        for (long i = 0; i <= 40; ++i)
            CHECK(val_odd_double_factorial(p, i) ==
                  val_int(p, brute_odd_double_factorial(i)));
}

TEST_CASE("factorial bounds hold exactly for i <= 10^4") {
    // i/(p-1) - (1 + log_p i) <= v_p(i!) <= i/(p-1), with floor(log_p i)
    // giving the exact integer form used in the proof.
    for (long p : {3L, 5L, 7L}) {
        for (long i = 1; i <= 10000; ++i) {
            long v = val_factorial(p, i);
            Rat upper = rat(i, p - 1);
            CHECK(Rat(v) <= upper);
            long r = base_p_digits(p, i) - 1;  // p^r <= i < p^{r+1}
            CHECK(upper - Rat(v) <= Rat(r + 1));
        }
    }
}

TEST_CASE("scalar arithmetic: spec values") {
    const long p = 5, N = 8;
    auto one = PadicScalar::one(p, N);
    auto pp = PadicScalar::from_long(p, 5, N);
    auto s = one + pp;
    CHECK(s.valuation() == 0);
    CHECK(s.unit() == 6);

    auto p2 = PadicScalar::from_long(p, 25, N);
    auto q = p2 * pp.inv();
    CHECK(q.valuation() == 1);
    CHECK(q.unit() == 1);

    auto i2 = PadicScalar::from_long(3, 2, 4).inv();
    CHECK(i2.valuation() == 0);
    CHECK(i2.unit() == 41);  // 2*41 = 82 = 1 mod 81
    CHECK((PadicScalar::from_long(3, 2, 4) * i2).unit() == 1);
}

TEST_CASE("zero handling and exact-zero inversion") {
    const long p = 3, N = 6;
    auto z = PadicScalar::zero(p);
    CHECK(z.is_exact_zero());
    CHECK_THROWS_AS(z.inv(), PreconditionError);
    auto x = PadicScalar::from_long(p, 7, N);
    auto d = x - x;
    CHECK(d.is_zero_class());
    CHECK(!d.is_exact_zero());
    CHECK(d.val_lower_bound() == N);  // cancelled to absolute precision
    CHECK_THROWS_AS(d.inv(), WindowError);
}

TEST_CASE("ultrametric and multiplicativity properties") {
    std::mt19937_64 rng(20240521);
    const long p = 5, N = 20;
    auto rand_scalar = [&]() {
        long val = static_cast<long>(rng() % 11) - 5;
        long unit = static_cast<long>(rng() % 6242) + 1;
        while (unit % p == 0) ++unit;
        return PadicScalar::from_long(p, unit, N).shift(val);
    };
    for (int it = 0; it < 300; ++it) {
        auto a = rand_scalar(), b = rand_scalar(), c = rand_scalar();
        // |ab| = |a||b| exactly on valuations
        CHECK((a * b).valuation() == a.valuation() + b.valuation());
        // v(a+b) >= min, equality when valuations differ
        auto s = a + b;
        long m = std::min(a.valuation(), b.valuation());
        CHECK(s.val_lower_bound() >= m);
        if (a.valuation() != b.valuation()) CHECK(s.valuation() == m);
        // associativity and commutativity up to the precision model
        CHECK(((a * b) * c).congruent(a * (b * c)));
        CHECK((a * b).congruent(b * a));
        CHECK(((a + b) + c).congruent(a + (b + c)));
    }
}

TEST_CASE("division by p and rational construction") {
    const long p = 5, N = 10;
    auto x = PadicScalar::from_rat(p, rat(7, 10), N);
    CHECK(x.valuation() == -1);  // 10 = 2 * 5
    auto y = x.div_by_p();
    CHECK(y.valuation() == -2);
    CHECK(y.unit() == x.unit());

    auto z = PadicScalar::from_rat_abs(p, rat(1, 625), 10);
    CHECK(z.valuation() == -4);
    CHECK(z.abs_precision() >= 10);
}

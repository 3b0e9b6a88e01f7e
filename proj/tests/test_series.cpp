#include <random>

#include "doctest.h"
#include "padiff/errors.hpp"
#include "padiff/newton.hpp"
#include "padiff/series.hpp"

using namespace padiff;

namespace {

const long P = 5;
const long N = 30;

TruncatedSeries poly(std::initializer_list<std::pair<long, Rat>> terms,
                     RingDomain d = RingDomain::disc(), long p = P,
                     long prec = N + 64) {
    TruncatedSeries f(p, d);
    for (auto& [e, q] : terms) f.set_coeff(e, PadicScalar::from_rat(p, q, prec));
    return f;
}

// a = sum_i (2i-1)!! t^{-(2i+1)} with (-1)!! = -1, from literal products.
// The truncated tail is declared from the double-factorial valuations: the
// exact Legendre values up to p^2*(n+2) and the factorial-lemma floor
// v((2i-1)!!) >= i/(p-1) - 1 - digits_p(2i) beyond, minimized over the
// digit-jump points until the linear term dominates.  Valid only when
// 1/(p-1) > 2*inner, i.e. alpha in (omega^{1/2}, 1).
TruncatedSeries series_a(long n_terms, const LogVal& inner, long p = P, long prec = N) {
    RingDomain d = RingDomain::annulus(inner);
    long lo = -(2 * n_terms + 1);
    TruncatedSeries f(p, d, Window{lo, Window::kMax});
    Int df = -1;
    for (long i = 0; i <= n_terms; ++i) {
        if (i == 1) df = 1;
        if (i >= 2) df *= 2 * i - 1;
        f.set_coeff(-(2 * i + 1), PadicScalar::from_int(p, df, prec));
    }
    Rat delta = rat(1, p - 1) - Rat(2) * inner.value();
    if (delta <= 0) return f;  // not in the bounded ring: leave the tail dark
    auto normalized = [&](long i, const Rat& v) -> Rat {
        return v - Rat(2 * (i - n_terms)) * inner.value();
    };
    long P0 = p * p * (n_terms + 2);
    Rat best = normalized(n_terms + 1,
                          Rat(val_odd_double_factorial(p, n_terms + 1)));
    for (long i = n_terms + 1; i <= P0; ++i)
        best = std::min(best, normalized(i, Rat(val_odd_double_factorial(p, i))));
    Int pw = p;
    for (long k = 1; k < 60; ++k) {
        long ik = static_cast<long>(Int((pw + 1) / 2).get_si());  // digits_p(2i) jumps
        pw *= p;
        if (ik <= P0) continue;
        Rat psi = normalized(ik, rat(ik, p - 1) - Rat(2 + k));
        best = std::min(best, psi);
        if (psi > best + 4 && delta * Rat(ik) > 4) break;
    }
    f.declare_lo_tail(best);
    return f;
}

// c = sum_i ((-1)^i/(2i+1)!!) t^{2i+1}.
TruncatedSeries series_c(long n_terms, long p = P, long prec = N) {
    TruncatedSeries f(p, RingDomain::open_disc(),
                      Window{Window::kMin, 2 * n_terms + 1});
    Int df = 1;
    for (long i = 0; i <= n_terms; ++i) {
        if (i > 0) df *= 2 * i + 1;
        Rat q = Rat((i % 2 == 0) ? 1 : -1) / Rat(df);
        f.set_coeff(2 * i + 1, PadicScalar::from_rat_abs(p, q, prec));
    }
    return f;
}

// b = exp(-t^2/2) truncated after n_terms coefficients.
TruncatedSeries series_b(long n_terms, long p = P, long prec = N) {
    TruncatedSeries f(p, RingDomain::open_disc(), Window{Window::kMin, 2 * n_terms});
    Int fact = 1, two = 1;
    for (long i = 0; i <= n_terms; ++i) {
        if (i > 0) {
            fact *= i;
            two *= 2;
        }
        Rat q = Rat((i % 2 == 0) ? 1 : -1) / Rat(fact * two);
        f.set_coeff(2 * i, PadicScalar::from_rat_abs(p, q, prec));
    }
    return f;
}

TruncatedSeries geometric(long n_terms, long p = P, long prec = N) {
    TruncatedSeries f(p, RingDomain::open_disc(), Window{Window::kMin, n_terms});
    for (long i = 0; i <= n_terms; ++i)
        f.set_coeff(i, PadicScalar::one(p, prec));
    return f;
}

} // namespace

TEST_CASE("series_a helper really is -1/t + 1/t^3 + 3/t^5 + 15/t^7 + ...") {
    auto a = series_a(4, LogVal(1, 16));
    CHECK(a.coeff(-1).unit() == p_power(P, N) - 1);  // -1 mod p^N
    CHECK(a.coeff(-3).unit() == 1);
    CHECK(a.coeff(-5).unit() == 3);
    CHECK(a.coeff(-7).unit() == 3);  // 15 = 3 * 5
    CHECK(a.coeff(-7).valuation() == 1);
}

TEST_CASE("gauss_valuation: monomial, forced minima, and the a-series") {
    auto t = poly({{1, Rat(1)}});
    CHECK(gauss_valuation(t, LogVal(3, 4)) == rat(3, 4));

    auto f = poly({{0, Rat(1)}, {2, Rat(P)}});
    CHECK(gauss_valuation(f, LogVal()) == 0);
    CHECK(gauss_valuation(f, LogVal(1, 1)) == 0);  // min(0, 1 + 2) = 0

    auto a = series_a(40, LogVal(1, 16));
    CHECK(gauss_valuation(a, LogVal()) == 0);  // attained at the -1/t term
}

TEST_CASE("gauss_valuation flags truncation-boundary minima") {
    // Coefficients p^{-i}: the minimum rides the truncated right end.
    TruncatedSeries f(P, RingDomain::open_disc(), Window{Window::kMin, 30});
    for (long i = 0; i <= 30; ++i)
        f.set_coeff(i, PadicScalar::from_rat(P, Rat(1) / Rat(p_power(P, i)), N));
    CHECK_THROWS_AS(gauss_valuation(f, LogVal()), WindowError);
    // At r = 2 the minimum moves to t^0, away from the boundary.
    CHECK(gauss_valuation(f, LogVal(2, 1)) == 0);
}

TEST_CASE("derive: constants, powers, and c' = 1 - t*c") {
    auto one = poly({{0, Rat(1)}});
    CHECK(one.derive().is_zero_on_window());
    auto t2 = poly({{2, Rat(1)}});
    auto d = t2.derive();
    CHECK(d.coeff(1).unit() == 2);
    CHECK(d.coeff(1).valuation() == 0);

    auto c = series_c(60);
    auto lhs = c.derive();
    auto rhs = poly({{0, Rat(1)}}, RingDomain::open_disc()) -
               poly({{1, Rat(1)}}, RingDomain::open_disc()) * c;
    auto rep = (lhs - rhs).zero_report();
    CHECK(rep.all_zero);
    CHECK(rep.min_bound >= N - 2);
}

TEST_CASE("mul and invert_unit") {
    auto f = poly({{0, Rat(1)}, {1, Rat(1)}});
    auto g = poly({{0, Rat(1)}, {1, Rat(-1)}});
    auto h = f * g;
    CHECK(h.coeff(0).unit() == 1);
    CHECK(h.coeff(2).valuation() == 0);
    CHECK(h.coeff(1).is_zero_class());

    auto u = poly({{0, Rat(1)}, {1, Rat(P)}});
    auto inv = invert_unit(u, 12);
    for (long i = 0; i <= 8; ++i) CHECK(inv.coeff(i).valuation() == i);  // (-p)^i
    auto check = (u * inv).clip(Window{Window::kMin, 10});
    CHECK(check.coeff(0).unit() == 1);
    for (long i = 1; i <= 8; ++i) CHECK(check.coeff(i).is_zero_class());

    RingDomain ann = RingDomain::annulus(LogVal(1, 4));
    auto t = poly({{1, Rat(1)}}, ann);
    auto ti = invert_unit(t);
    CHECK(ti.coeff(-1).unit() == 1);

    // 1 + t ties at rho = 1 but inverts through the graded recursion.
    auto w = invert_unit(poly({{0, Rat(1)}, {1, Rat(1)}}, ann), 20);
    for (long i = 0; i <= 10; ++i) CHECK(w.coeff(i).valuation() == 0);
}

TEST_CASE("invert_unit rejects non-units") {
    CHECK_THROWS_AS(invert_unit(poly({{1, Rat(1)}})), PreconditionError);  // t on disc
    CHECK_THROWS_AS(invert_unit(poly({{0, Rat(P)}, {1, Rat(1)}})),
                    PreconditionError);  // zero at |t| = 1/p
    RingDomain wide = RingDomain::annulus(LogVal(2, 1));
    CHECK_THROWS_AS(invert_unit(poly({{0, Rat(P)}, {1, Rat(1)}}, wide)),
                    PreconditionError);  // slope 1 inside (0, 2]
}

TEST_CASE("newton polygon examples") {
    auto f = poly({{0, Rat(P)}, {1, Rat(1)}});
    auto np = newton_polygon(f, LogVal(), std::nullopt);
    REQUIRE(np.slopes.size() == 1);
    CHECK(np.slopes[0].slope == 1);
    CHECK(np.slopes[0].width == 1);
    REQUIRE(np.vertices.size() == 2);
    CHECK(np.vertices[0] == std::pair<Rat, Rat>{Rat(-1), Rat(0)});
    CHECK(np.vertices[1] == std::pair<Rat, Rat>{Rat(0), Rat(1)});

    auto one = poly({{0, Rat(1)}});
    CHECK(newton_polygon(one, LogVal(), std::nullopt).slopes.empty());

    auto g = poly({{0, Rat(P)}, {1, Rat(1)}, {2, Rat(P)}});
    auto npg = newton_polygon(g, LogVal(), std::optional<LogVal>(LogVal(1, 1)));
    REQUIRE(npg.slopes.size() == 1);
    CHECK(npg.slopes[0].slope == 1);
    CHECK(npg.slopes[0].width == 1);
}

TEST_CASE("polygon slope multiset of a product is the union") {
    auto f = poly({{0, Rat(P)}, {1, Rat(1)}});   // slope 1
    auto g = poly({{0, Rat(25)}, {1, Rat(1)}});  // slope 2
    auto np = newton_polygon(f * g, LogVal(), std::nullopt);
    REQUIRE(np.slopes.size() == 2);
    CHECK(np.slopes[0].slope == 1);
    CHECK(np.slopes[1].slope == 2);
}

TEST_CASE("has_finitely_many_zeroes") {
    RingDomain ann = RingDomain::annulus(LogVal(1, 16));
    auto lin = poly({{0, Rat(-1)}, {1, Rat(1)}}, ann);
    CHECK(has_finitely_many_zeroes(lin));

    auto a = series_a(60, LogVal(1, 16));
    CHECK(has_finitely_many_zeroes(a));

    // Unbounded coefficients: not in the bounded ring.
    TruncatedSeries f(P, ann, Window{0, 60});
    for (long i = 0; i <= 60; ++i)
        f.set_coeff(i, PadicScalar::from_rat(P, Rat(1) / Rat(p_power(P, i)), N));
    CHECK_FALSE(has_finitely_many_zeroes(f));

    // a is not in the ring once alpha <= omega^{1/2} (inner >= 1/8).
    auto a_bad = series_a(60, LogVal(1, 4));
    CHECK_FALSE(has_finitely_many_zeroes(a_bad));
}

TEST_CASE("radius of convergence estimates") {
    auto geo = geometric(200);
    auto est = radius_of_convergence_estimate(geo);
    CHECK(!est.entire);
    CHECK(est.contains(Rat(0)));

    auto b = series_b(200);
    auto eb = radius_of_convergence_estimate(b);
    CHECK(eb.contains(rat(1, 8)));  // 1/(2(p-1)) for p = 5
    CHECK(eb.relative_width(P) <= 0.10);

    // exp(t^2/2): same valuations, symmetric.
    TruncatedSeries e2(P, RingDomain::open_disc(), Window{Window::kMin, 400});
    Int fact = 1, two = 1;
    for (long i = 0; i <= 200; ++i) {
        if (i > 0) {
            fact *= i;
            two *= 2;
        }
        e2.set_coeff(2 * i, PadicScalar::from_rat_abs(P, Rat(1) / Rat(fact * two), N));
    }
    auto ee = radius_of_convergence_estimate(e2);
    CHECK(ee.contains(rat(1, 8)));
    CHECK(ee.relative_width(P) <= 0.10);

    auto c = series_c(200);
    auto ec = radius_of_convergence_estimate(c);
    CHECK(ec.contains(rat(1, 8)));
    CHECK(ec.relative_width(P) <= 0.10);

    CHECK(radius_of_convergence_estimate(poly({{0, Rat(1)}, {40, Rat(1)}})).entire);
}

TEST_CASE("log growth classification") {
    auto geo = geometric(300);
    auto rep = log_growth_classify(geo, {Rat(1), Rat(2)});
    CHECK(rep.status == LogGrowthReport::Status::bounded);

    // log(1+t) = sum (-1)^{i+1} t^i / i: delta = 1 passes, 0 fails.
    TruncatedSeries lg(P, RingDomain::open_disc(), Window{Window::kMin, 500});
    for (long i = 1; i <= 500; ++i)
        lg.set_coeff(i, PadicScalar::from_rat_abs(P, Rat((i % 2 == 1) ? 1 : -1) / Rat(i), N));
    auto rl = log_growth_classify(lg, {Rat(1), Rat(2)});
    CHECK(rl.status == LogGrowthReport::Status::delta);
    CHECK(rl.delta == 1);

    // v(a_i) = -2 floor(log_p(i+1)): delta = 2 passes, 1 fails.
    TruncatedSeries syn(P, RingDomain::open_disc(), Window{Window::kMin, 600});
    for (long i = 0; i <= 600; ++i) {
        long fl = base_p_digits(P, i + 1) - 1;
        syn.set_coeff(i, PadicScalar::from_rat_abs(P, Rat(1) / Rat(p_power(P, 2 * fl)), N));
    }
    auto rs = log_growth_classify(syn, {Rat(1), Rat(2)});
    CHECK(rs.status == LogGrowthReport::Status::delta);
    CHECK(rs.delta == 2);

    // b has radius < 1: classification refuses.
    CHECK_THROWS_AS(log_growth_classify(series_b(200), {Rat(1)}), PreconditionError);
}

TEST_CASE("log-growth stability under derivation") {
    auto geo = geometric(300);
    CHECK(log_growth_classify(geo.derive(), {Rat(1)}).status ==
          LogGrowthReport::Status::bounded);

    TruncatedSeries lg(P, RingDomain::open_disc(), Window{Window::kMin, 500});
    for (long i = 1; i <= 500; ++i)
        lg.set_coeff(i, PadicScalar::from_rat_abs(P, Rat((i % 2 == 1) ? 1 : -1) / Rat(i), N));
    auto rep = log_growth_classify(lg.derive(), {Rat(1), Rat(2)});
    CHECK((rep.status == LogGrowthReport::Status::bounded || rep.delta <= 2));
}

TEST_CASE("gauss multiplicativity on random sparse series") {
    std::mt19937_64 rng(777);
    RingDomain ann = RingDomain::annulus(LogVal(1, 2));
    auto rand_series = [&]() {
        TruncatedSeries f(P, ann);
        int terms = 1 + static_cast<int>(rng() % 5);
        for (int k = 0; k < terms; ++k) {
            long e = static_cast<long>(rng() % 21) - 10;
            long v = static_cast<long>(rng() % 9) - 4;
            long u = 1 + static_cast<long>(rng() % 100);
            while (u % P == 0) ++u;
            f.set_coeff(e, PadicScalar::from_long(P, u, N).shift(v));
        }
        return f;
    };
    std::vector<LogVal> rs = {LogVal(), LogVal(1, 8), LogVal(1, 3), LogVal(1, 2)};
    int checked = 0;
    for (int it = 0; it < 200; ++it) {
        auto f = rand_series(), g = rand_series();
        for (const auto& r : rs) {
            try {
                Rat vf = gauss_valuation(f, r);
                Rat vg = gauss_valuation(g, r);
                Rat vfg = gauss_valuation(f * g, r);
                CHECK(vfg == vf + vg);
                ++checked;
            } catch (const WindowError&) {
                // tie or cancelled coefficient: only certified cases count
            }
        }
    }
    CHECK(checked > 300);
}

TEST_CASE("gauss valuation is concave piecewise affine in r") {
    auto f = poly({{0, Rat(25)}, {3, Rat(5)}, {7, Rat(1)}},
                  RingDomain::annulus(LogVal(4, 1)), P, N);
    std::vector<Rat> vals;
    for (long k = 0; k <= 16; ++k) vals.push_back(gauss_valuation(f, LogVal(k, 4)));
    for (size_t i = 2; i < vals.size(); ++i) {
        Rat d1 = vals[i - 1] - vals[i - 2];
        Rat d2 = vals[i] - vals[i - 1];
        CHECK(d2 <= d1);  // concave
    }
}

TEST_CASE("invert_unit residual valuations on the annulus") {
    // The inverse of a is genuinely two-sided; resolving it to N digits
    // needs the a-window deep enough that the declared tail bound clears N.
    auto a = series_a(160, LogVal(1, 16));
    auto inv = invert_unit(a);
    auto prod = mul_capped(a, inv, Window{-240, 60});
    auto one = poly({{0, Rat(1)}}, a.domain());
    auto rep = (prod - one).zero_report();
    CHECK(rep.all_zero);
    CHECK(rep.min_bound >= N - 5);
}

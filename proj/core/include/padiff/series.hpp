#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padiff/logval.hpp"
#include "padiff/padic.hpp"

namespace padiff {

// The coefficient rings: K[[t]]_0 (bounded disc), K{t} (open disc),
// K<alpha/t,t]]_0 (bounded annulus).  inner is -log_p alpha; 0 for discs.
struct RingDomain {
    enum class Kind { bounded_disc, open_disc, bounded_annulus };
    Kind kind = Kind::bounded_disc;
    LogVal inner;

    static RingDomain disc() { return {Kind::bounded_disc, LogVal()}; }
    static RingDomain open_disc() { return {Kind::open_disc, LogVal()}; }
    static RingDomain annulus(LogVal inner_log_radius);

    bool is_disc() const { return kind != Kind::bounded_annulus; }
    bool operator==(const RingDomain& o) const {
        return kind == o.kind && inner == o.inner;
    }
    std::string str() const;
};

// Interval of exponents whose coefficients are known.  A sentinel end means
// the series is exact on that side: every coefficient beyond the stored
// support is exactly zero there.
struct Window {
    static constexpr long kMin = std::numeric_limits<long>::min() / 4;
    static constexpr long kMax = std::numeric_limits<long>::max() / 4;

    long lo = kMin;
    long hi = kMax;

    static Window all() { return {kMin, kMax}; }
    bool lo_exact() const { return lo == kMin; }
    bool hi_exact() const { return hi == kMax; }
    bool contains(long e) const { return lo <= e && e <= hi; }
    bool empty() const { return lo > hi; }
    Window intersect(const Window& o) const {
        return {std::max(lo, o.lo), std::min(hi, o.hi)};
    }
    bool operator==(const Window& o) const { return lo == o.lo && hi == o.hi; }
};

// What is known about the coefficients beyond a truncated window end.
// On the low side the bound is measured against the inner Gauss norm:
//   v(a_e) >= v + (lo - e) * inner   for e < lo,
// which is the natural alpha-convergence statement; on the high side it is
// flat: v(a_e) >= v for e > hi.  neg_inf means nothing is known there.
struct TailBound {
    enum class Kind { neg_inf, finite, pos_inf };
    Kind kind = Kind::neg_inf;
    Rat v;

    static TailBound unknown() { return {Kind::neg_inf, Rat()}; }
    static TailBound exact() { return {Kind::pos_inf, Rat()}; }
    static TailBound at(const Rat& v) { return {Kind::finite, v}; }
    bool is_neg_inf() const { return kind == Kind::neg_inf; }
    bool is_pos_inf() const { return kind == Kind::pos_inf; }
};

// Truncated Laurent series over Q_p.  Stored entries are either certified
// nonzero or inexact zeros carrying a valuation bound; an absent exponent
// inside the window is exactly zero; beyond the window the tail bounds
// apply.
class TruncatedSeries {
public:
    TruncatedSeries(long p, RingDomain domain, Window window = Window::all());

    static TruncatedSeries zero(long p, RingDomain domain) {
        return TruncatedSeries(p, domain);
    }
    static TruncatedSeries constant(const PadicScalar& c, RingDomain domain);
    static TruncatedSeries monomial(const PadicScalar& c, long e, RingDomain domain);
    static TruncatedSeries one(long p, long prec, RingDomain domain) {
        return constant(PadicScalar::one(p, prec), domain);
    }

    long prime() const { return p_; }
    const RingDomain& domain() const { return domain_; }
    const Window& window() const { return window_; }
    const std::map<long, PadicScalar>& coeffs() const { return coeffs_; }

    const TailBound& lo_tail() const { return lo_tail_; }
    const TailBound& hi_tail() const { return hi_tail_; }
    // Builders that know their tails (from a valuation lemma, say) declare
    // them; arithmetic then propagates the bounds.
    void declare_lo_tail(const Rat& v);
    void declare_hi_tail(const Rat& v);

    // Coefficient at e; exact zero if absent inside the window.
    PadicScalar coeff(long e) const;
    bool known(long e) const { return window_.contains(e) || is_exact_at(e); }
    void set_coeff(long e, const PadicScalar& c);

    bool is_zero_on_window() const;  // no certified-nonzero entry
    std::optional<long> min_support() const;  // possibly-nonzero exponents
    std::optional<long> max_support() const;
    std::optional<long> min_certified_support() const;
    std::optional<long> max_certified_support() const;

    TruncatedSeries operator-() const;
    friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b);
    friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b);
    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b);
    // Product with the result window pre-clipped to cap.  Prefer this in
    // iterations: tail bounds are taken at the cap directly, which avoids
    // compounding the integer rounding of per-coefficient bounds.
    friend TruncatedSeries mul_capped(const TruncatedSeries& a, const TruncatedSeries& b,
                                      const Window& cap);

    TruncatedSeries scalar_mul(const PadicScalar& c) const;
    // c * t^k * f; k < 0 requires an annulus domain or vanishing low part.
    TruncatedSeries shift_t(long k) const;
    // d/dt, termwise.
    TruncatedSeries derive() const;
    // Termwise antiderivative with zero constant term; the t^{-1}
    // coefficient must be absent or exactly zero.
    TruncatedSeries antiderive() const;

    // Narrow the known window (clipping is always sound).
    TruncatedSeries clip(const Window& w) const;
    // Reinterpret in another ring; only inclusions are allowed
    // (disc -> annulus, bounded disc -> open disc, annulus -> wider alpha).
    TruncatedSeries to_domain(const RingDomain& d) const;

    // All stored coefficients are zero-class; min_bound is the least
    // valuation bound among them (kInfVal when nothing is stored).
    struct ZeroReport {
        bool all_zero = true;
        long min_bound = PadicScalar::kInfVal;
        long worst_exponent = 0;
    };
    ZeroReport zero_report() const;

    std::string str(long max_terms = 12) const;

    // Gauss-bound of the tail regions alone at radius r (pos_inf-kind when
    // both sides are exact, neg_inf when either side is dark).
    TailBound tail_gauss(const LogVal& r) const;
    // Flat valuation floor of everything (stored entries and tails).
    TailBound value_floor() const;

private:
    bool is_exact_at(long e) const;
    void normalize_entry(long e, const PadicScalar& c);

    long p_;
    RingDomain domain_;
    Window window_;
    std::map<long, PadicScalar> coeffs_;
    TailBound lo_tail_;
    TailBound hi_tail_;
};

// ---- Gauss valuations ------------------------------------------------

// Valid radius range of r for the domain: [0, inner] on an annulus,
// [0, +inf) on discs.
bool radius_in_domain(const RingDomain& d, const LogVal& r);

// v_r(f) = min_e (v(a_e) + e*r), exact.  Throws WindowError when the
// minimizing index touches a truncated window end whose tail bound cannot
// rule out smaller values, or sits on a coefficient that is not certified
// nonzero.
Rat gauss_valuation(const TruncatedSeries& f, const LogVal& r);

// Lower bound for v_r over the represented window only (tails ignored);
// +inf when nothing is stored.  Suitable for residual measurements.
std::optional<Rat> gauss_window_bound(const TruncatedSeries& f, const LogVal& r);

// Lower bound for v_r of the full element, tails included; nullopt when a
// dark tail makes no bound possible, +inf as a large Rat never occurs --
// returned optional is empty in that case too.
struct GaussBound {
    bool has_bound = false;
    bool infinite = false;  // zero on window with exact tails
    Rat v;
};
GaussBound gauss_full_bound(const TruncatedSeries& f, const LogVal& r);

// ---- Units ------------------------------------------------------------

// Is f a unit of its ring (no zeroes on the spectrum, unique dominant
// behavior)?
bool is_unit(const TruncatedSeries& f);

// Inverse of a unit.  n_terms limits the output window for inverses with
// infinite tails (auto when < 0).  max_iter caps the geometric iteration.
TruncatedSeries invert_unit(const TruncatedSeries& f, long n_terms = -1,
                            long max_iter = 4096);

// ---- Boundedness / zero counting ---------------------------------------

// Lemma-B style test on an annulus: true iff the represented part certifies
// membership in the bounded ring (finitely many zeroes on alpha <= |t| < 1).
// Throws WindowError when a truncated tail is not yet stable.
bool has_finitely_many_zeroes(const TruncatedSeries& f, const Rat& margin = Rat(1));

// ---- Radius of convergence ----------------------------------------------

// Bracket for s = -log_p R(f) from the tail half of the window, widened by
// the factorial-lemma term (1 + log_p e)/e.
struct RadiusEstimate {
    bool entire = false;  // all-zero tail: R = +inf
    Rat slope_lo;
    Rat slope_hi;
    // First-order relative width of the radius bracket, ln(p)*(hi-lo).
    double relative_width(long p) const;
    bool contains(const Rat& s) const {
        return !entire && slope_lo <= s && s <= slope_hi;
    }
};
RadiusEstimate radius_of_convergence_estimate(const TruncatedSeries& f);

// ---- Log-growth -----------------------------------------------------------

struct LogGrowthReport {
    enum class Status { bounded, delta, exceeds_window };
    Status status = Status::exceeds_window;
    Rat delta;           // meaningful for bounded (0) and delta
    long witness_index = 0;  // argmax index of the last-quarter sup
    std::string str() const;
};

// Least delta in {0} + deltas for which sup |a_i|/(i+1)^delta is bounded
// over the window with a one-p-power stability margin.
LogGrowthReport log_growth_classify(const TruncatedSeries& f,
                                    const std::vector<Rat>& deltas);

} // namespace padiff

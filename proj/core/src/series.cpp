#include "padiff/series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "padiff/errors.hpp"

namespace padiff {

namespace {

long sat_add(long a, long b) {
    if (a <= Window::kMin || b <= Window::kMin) return Window::kMin;
    if (a >= Window::kMax || b >= Window::kMax) return Window::kMax;
    return a + b;
}

TailBound tb_min(const TailBound& a, const TailBound& b) {
    if (a.is_neg_inf() || b.is_neg_inf()) return TailBound::unknown();
    if (a.is_pos_inf()) return b;
    if (b.is_pos_inf()) return a;
    return TailBound::at(std::min(a.v, b.v));
}

TailBound tb_add(const TailBound& a, const TailBound& b) {
    if (a.is_neg_inf() || b.is_neg_inf()) return TailBound::unknown();
    if (a.is_pos_inf() || b.is_pos_inf()) return TailBound::exact();
    return TailBound::at(Rat(a.v + b.v));
}

TailBound tb_shift(const TailBound& a, const Rat& d) {
    if (!a.is_neg_inf() && !a.is_pos_inf()) return TailBound::at(Rat(a.v + d));
    return a;
}

long rat_floor(const Rat& q) {
    Int f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return static_cast<long>(f.get_si());
}

} // namespace

RingDomain RingDomain::annulus(LogVal inner_log_radius) {
    if (inner_log_radius.is_infinity() || inner_log_radius.is_zero())
        throw PreconditionError("annulus requires 0 < -log alpha < inf");
    return {Kind::bounded_annulus, inner_log_radius};
}

std::string RingDomain::str() const {
    switch (kind) {
        case Kind::bounded_disc: return "bounded_disc";
        case Kind::open_disc: return "open_disc";
        case Kind::bounded_annulus: return "bounded_annulus(" + inner.str() + ")";
    }
    return "?";
}

TruncatedSeries::TruncatedSeries(long p, RingDomain domain, Window window)
    : p_(p), domain_(domain), window_(window) {
    if (window_.empty()) throw PreconditionError("empty series window");
    if (domain_.is_disc()) window_.lo = Window::kMin;  // exactly zero below 0
    lo_tail_ = window_.lo_exact() ? TailBound::exact() : TailBound::unknown();
    hi_tail_ = window_.hi_exact() ? TailBound::exact() : TailBound::unknown();
}

TruncatedSeries TruncatedSeries::constant(const PadicScalar& c, RingDomain domain) {
    return monomial(c, 0, domain);
}

TruncatedSeries TruncatedSeries::monomial(const PadicScalar& c, long e,
                                          RingDomain domain) {
    TruncatedSeries f(c.prime(), domain);
    f.set_coeff(e, c);
    return f;
}

void TruncatedSeries::declare_lo_tail(const Rat& v) {
    if (window_.lo_exact()) return;
    lo_tail_ = TailBound::at(v);
}

void TruncatedSeries::declare_hi_tail(const Rat& v) {
    if (window_.hi_exact()) return;
    hi_tail_ = TailBound::at(v);
}

bool TruncatedSeries::is_exact_at(long e) const {
    return domain_.is_disc() && e < 0;
}

PadicScalar TruncatedSeries::coeff(long e) const {
    if (is_exact_at(e)) return PadicScalar::zero(p_);
    if (!window_.contains(e))
        throw WindowError("coefficient outside the known window: t^" +
                          std::to_string(e));
    auto it = coeffs_.find(e);
    return it == coeffs_.end() ? PadicScalar::zero(p_) : it->second;
}

void TruncatedSeries::set_coeff(long e, const PadicScalar& c) {
    if (domain_.is_disc() && e < 0 && !c.is_exact_zero())
        throw PreconditionError("disc series with a negative exponent");
    if (!window_.contains(e) && !is_exact_at(e))
        throw WindowError("set_coeff outside the window");
    normalize_entry(e, c);
}

void TruncatedSeries::normalize_entry(long e, const PadicScalar& c) {
    if (c.is_exact_zero())
        coeffs_.erase(e);
    else
        coeffs_[e] = c;
}

bool TruncatedSeries::is_zero_on_window() const {
    for (const auto& [e, c] : coeffs_)
        if (!c.is_zero_class()) return false;
    return true;
}

std::optional<long> TruncatedSeries::min_support() const {
    if (coeffs_.empty()) return std::nullopt;
    return coeffs_.begin()->first;
}

std::optional<long> TruncatedSeries::max_support() const {
    if (coeffs_.empty()) return std::nullopt;
    return coeffs_.rbegin()->first;
}

std::optional<long> TruncatedSeries::min_certified_support() const {
    for (const auto& [e, c] : coeffs_)
        if (!c.is_zero_class()) return e;
    return std::nullopt;
}

std::optional<long> TruncatedSeries::max_certified_support() const {
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
        if (!it->second.is_zero_class()) return it->first;
    return std::nullopt;
}

TailBound TruncatedSeries::tail_gauss(const LogVal& r) const {
    // min over both tail regions of v(a_e) + e*r; requires r <= inner on
    // the low side, which radius_in_domain guarantees for callers.
    TailBound out = TailBound::exact();
    if (!lo_tail_.is_pos_inf()) {
        if (lo_tail_.is_neg_inf()) return TailBound::unknown();
        out = tb_min(out, TailBound::at(Rat(lo_tail_.v + Rat(window_.lo) * r.value())));
    }
    if (!hi_tail_.is_pos_inf()) {
        if (hi_tail_.is_neg_inf()) return TailBound::unknown();
        out = tb_min(out,
                     TailBound::at(Rat(hi_tail_.v + Rat(window_.hi + 1) * r.value())));
    }
    return out;
}

TailBound TruncatedSeries::value_floor() const {
    TailBound out = tb_min(lo_tail_, hi_tail_);
    for (const auto& [e, c] : coeffs_)
        out = tb_min(out, TailBound::at(Rat(c.val_lower_bound())));
    return out;
}

TruncatedSeries TruncatedSeries::operator-() const {
    TruncatedSeries r(*this);
    for (auto& [e, c] : r.coeffs_) c = -c;
    return r;
}

TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (a.p_ != b.p_) throw PreconditionError("series: mixed primes");
    if (!(a.domain_ == b.domain_)) throw PreconditionError("series: mixed domains");
    TruncatedSeries r(a.p_, a.domain_, a.window_.intersect(b.window_));
    if (r.window_.empty()) throw WindowError("series add: empty window overlap");
    auto absorb = [&](const TruncatedSeries& src, const TruncatedSeries& other) {
        for (const auto& [e, c] : src.coeffs_) {
            if (!r.window_.contains(e) && !r.is_exact_at(e)) continue;
            if (r.coeffs_.count(e)) continue;  // handled when seen first
            PadicScalar sum = c + other.coeff(e);
            r.normalize_entry(e, sum);
        }
    };
    absorb(a, b);
    absorb(b, a);

    // Tail bounds: on each side collect the other operand's dropped
    // coefficients into the slope-normalized (lo) or flat (hi) form.
    const Rat inner = a.domain_.is_disc() ? Rat(0) : a.domain_.inner.value();
    auto lo_at = [&](const TruncatedSeries& f, long new_lo) -> TailBound {
        TailBound t = f.lo_tail_;
        if (!t.is_neg_inf() && !t.is_pos_inf() && new_lo > f.window_.lo)
            t = TailBound::at(Rat(t.v - Rat(new_lo - f.window_.lo) * inner));
        for (const auto& [e, c] : f.coeffs_) {
            if (e >= new_lo) break;
            t = tb_min(t, TailBound::at(Rat(Rat(c.val_lower_bound()) -
                                            Rat(new_lo - e) * inner)));
        }
        return t;
    };
    auto hi_at = [&](const TruncatedSeries& f, long new_hi) -> TailBound {
        TailBound t = f.hi_tail_;
        for (auto it = f.coeffs_.rbegin(); it != f.coeffs_.rend(); ++it) {
            if (it->first <= new_hi) break;
            t = tb_min(t, TailBound::at(Rat(it->second.val_lower_bound())));
        }
        return t;
    };
    r.lo_tail_ = tb_min(lo_at(a, r.window_.lo), lo_at(b, r.window_.lo));
    r.hi_tail_ = tb_min(hi_at(a, r.window_.hi), hi_at(b, r.window_.hi));
    return r;
}

TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
    return a + (-b);
}

namespace {

// One contamination source of a product: a valuation lower bound for the
// contributions of pairs touching a tail of one factor, applicable on an
// exponent range.  Content classes carry prefix/suffix minima of the other
// factor so the bound tightens away from the window ends.
struct ContamTerm {
    enum class Form { flat, sloped, lo_content, hi_content };
    Form form = Form::flat;
    Rat value;         // base value (tail sums)
    long anchor = 0;   // slope anchor for sloped / lo_content
    long offset = 0;   // content classes: j-cut = e - offset
    int content = -1;  // 0 = a, 1 = b
    long from = Window::kMin, to = Window::kMax;
    bool dark = false;
};

// suffix minima of (v_j + j*inner) over stored coefficients, and prefix
// minima of v_j, for the content-class bounds
struct ContentMins {
    std::vector<long> exps;
    std::vector<Rat> suffix_inner;  // min over j >= exps[i]
    std::vector<Rat> prefix_flat;   // min over j <= exps[i]
};

ContentMins content_mins(const TruncatedSeries& f, const Rat& inner) {
    ContentMins m;
    for (const auto& [e, c] : f.coeffs()) {
        m.exps.push_back(e);
        m.prefix_flat.push_back(Rat(c.val_lower_bound()));
        m.suffix_inner.push_back(Rat(Rat(c.val_lower_bound()) + Rat(e) * inner));
    }
    for (size_t i = 1; i < m.exps.size(); ++i)
        m.prefix_flat[i] = std::min(m.prefix_flat[i], m.prefix_flat[i - 1]);
    for (size_t i = m.exps.size(); i-- > 1;)
        m.suffix_inner[i - 1] = std::min(m.suffix_inner[i - 1], m.suffix_inner[i]);
    return m;
}

// min of (v_j + j*inner) over stored j >= j0; nullopt when empty
std::optional<Rat> suffix_at(const ContentMins& m, long j0) {
    auto it = std::lower_bound(m.exps.begin(), m.exps.end(), j0);
    if (it == m.exps.end()) return std::nullopt;
    return m.suffix_inner[static_cast<size_t>(it - m.exps.begin())];
}

// min of v_j over stored j <= j0; nullopt when empty
std::optional<Rat> prefix_at(const ContentMins& m, long j0) {
    auto it = std::upper_bound(m.exps.begin(), m.exps.end(), j0);
    if (it == m.exps.begin()) return std::nullopt;
    return m.prefix_flat[static_cast<size_t>(it - m.exps.begin()) - 1];
}

} // namespace

TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    return mul_capped(a, b, Window::all());
}

TruncatedSeries mul_capped(const TruncatedSeries& a, const TruncatedSeries& b,
                           const Window& cap) {
    if (a.p_ != b.p_) throw PreconditionError("series: mixed primes");
    if (!(a.domain_ == b.domain_)) throw PreconditionError("series: mixed domains");
    const long p = a.p_;
    const Rat inner = a.domain_.is_disc() ? Rat(0) : a.domain_.inner.value();

    auto lo_of = [](const TruncatedSeries& x) { return x.window_.lo; };
    auto hi_of = [](const TruncatedSeries& x) { return x.window_.hi; };

    ContentMins mins[2] = {content_mins(a, inner), content_mins(b, inner)};

    std::vector<ContamTerm> terms;
    auto classes_of = [&](const TruncatedSeries& x, const TruncatedSeries& y,
                          int y_id) {
        const TailBound& xlo = x.lo_tail();
        const TailBound& xhi = x.hi_tail();
        // (1) x.lo-tail x y-content: bound(e) = xlo + (x.lo - e)*inner +
        //     min_{j >= e - x.lo + 1} (v_j + j*inner); e <= x.lo - 1 + maxsupp(y)
        if (!xlo.is_pos_inf() && y.max_support()) {
            ContamTerm t;
            t.form = ContamTerm::Form::lo_content;
            t.anchor = lo_of(x);
            t.offset = lo_of(x) - 1;  // j-cut = e - offset
            t.content = y_id;
            t.to = sat_add(sat_add(lo_of(x), -1), *y.max_support());
            t.dark = xlo.is_neg_inf();
            if (!t.dark) t.value = xlo.v;
            terms.push_back(t);
        }
        // (2) x.lo-tail x y.lo-tail: sloped, e <= x.lo + y.lo - 2
        if (!xlo.is_pos_inf() && !y.lo_tail().is_pos_inf()) {
            ContamTerm t;
            t.form = ContamTerm::Form::sloped;
            t.anchor = sat_add(lo_of(x), lo_of(y));
            t.to = sat_add(t.anchor, -2);
            t.dark = xlo.is_neg_inf() || y.lo_tail().is_neg_inf();
            if (!t.dark) t.value = Rat(xlo.v + y.lo_tail().v);
            terms.push_back(t);
        }
        // (3) x.lo-tail x y.hi-tail: sloped up to the anchor, flat beyond
        if (!xlo.is_pos_inf() && !y.hi_tail().is_pos_inf()) {
            bool dark = xlo.is_neg_inf() || y.hi_tail().is_neg_inf();
            long anchor = sat_add(sat_add(lo_of(x), hi_of(y)), 1);
            ContamTerm s;
            s.form = ContamTerm::Form::sloped;
            s.anchor = anchor;
            s.to = anchor;
            s.dark = dark;
            if (!dark) s.value = Rat(xlo.v + y.hi_tail().v);
            terms.push_back(s);
            ContamTerm f;
            f.from = sat_add(anchor, 1);
            f.dark = dark;
            if (!dark) f.value = Rat(xlo.v + y.hi_tail().v);
            terms.push_back(f);
        }
        // (4) x.hi-tail x y-content: bound(e) = xhi + min_{j <= e - x.hi - 1} v_j;
        //     e >= x.hi + 1 + minsupp(y)
        if (!xhi.is_pos_inf() && y.min_support()) {
            ContamTerm t;
            t.form = ContamTerm::Form::hi_content;
            t.offset = hi_of(x) + 1;  // j-cut = e - offset
            t.content = y_id;
            t.from = sat_add(sat_add(hi_of(x), 1), *y.min_support());
            t.dark = xhi.is_neg_inf();
            if (!t.dark) t.value = xhi.v;
            terms.push_back(t);
        }
        // (5) x.hi-tail x y.hi-tail: flat, e >= x.hi + y.hi + 2
        if (!xhi.is_pos_inf() && !y.hi_tail().is_pos_inf()) {
            ContamTerm t;
            t.from = sat_add(sat_add(hi_of(x), hi_of(y)), 2);
            t.dark = xhi.is_neg_inf() || y.hi_tail().is_neg_inf();
            if (!t.dark) t.value = Rat(xhi.v + y.hi_tail().v);
            terms.push_back(t);
        }
    };
    classes_of(a, b, 1);
    classes_of(b, a, 0);

    // Window of exact claims: dark terms force it off their ranges; finite
    // contamination against an exact side caps the window at the content
    // reach (the tail bounds cover the rest).
    long lo = sat_add(lo_of(a), lo_of(b));
    long hi = sat_add(hi_of(a), hi_of(b));
    for (const auto& t : terms) {
        if (!t.dark) continue;
        if (t.from == Window::kMin && t.to == Window::kMax)
            throw WindowError("series mul: two dark tails contaminate everything");
        if (t.from == Window::kMin)
            lo = std::max(lo, sat_add(t.to, 1));
        else
            hi = std::min(hi, sat_add(t.from, -1));
    }
    bool contam_below = false, contam_above = false;
    for (const auto& t : terms) {
        if (t.dark) continue;
        if (t.from == Window::kMin) contam_below = true;
        if (t.to == Window::kMax) contam_above = true;
    }
    if (lo == Window::kMin && contam_below) {
        long reach = Window::kMax;
        if (a.min_support() && b.min_support())
            reach = sat_add(*a.min_support(), *b.min_support());
        lo = (reach == Window::kMax) ? 0 : reach;
    }
    if (hi == Window::kMax && contam_above) {
        long reach = Window::kMin;
        if (a.max_support() && b.max_support())
            reach = sat_add(*a.max_support(), *b.max_support());
        hi = (reach == Window::kMin) ? std::max(lo, 0L) : std::max(reach, lo);
    }

    lo = std::max(lo, cap.lo);
    hi = std::min(hi, cap.hi);
    TruncatedSeries r(p, a.domain_, Window{lo, hi});
    if (r.window_.empty()) throw WindowError("series mul: empty window");
    std::map<long, PadicScalar> acc;
    for (const auto& [i, ci] : a.coeffs_) {
        for (const auto& [j, cj] : b.coeffs_) {
            long e = i + j;
            if (!r.window_.contains(e) && !r.is_exact_at(e)) continue;
            PadicScalar prod = ci * cj;
            auto it = acc.find(e);
            if (it == acc.end())
                acc.emplace(e, std::move(prod));
            else
                it->second = it->second + prod;
        }
    }

    // Precision degradation inside the window.
    auto term_bound_at = [&](const ContamTerm& t, long e) -> std::optional<Rat> {
        if (t.dark || e < t.from || e > t.to) return std::nullopt;
        switch (t.form) {
            case ContamTerm::Form::flat:
                return t.value;
            case ContamTerm::Form::sloped:
                return Rat(t.value + Rat(t.anchor - e) * inner);
            case ContamTerm::Form::lo_content: {
                auto s = suffix_at(mins[t.content], e - t.offset);
                if (!s) return std::nullopt;
                return Rat(t.value + Rat(t.anchor - e) * inner + *s);
            }
            case ContamTerm::Form::hi_content: {
                auto s = prefix_at(mins[t.content], e - t.offset);
                if (!s) return std::nullopt;
                return Rat(t.value + *s);
            }
        }
        return std::nullopt;
    };
    bool any_finite = false;
    for (const auto& t : terms)
        if (!t.dark) any_finite = true;
    if (any_finite) {
        long from = r.window_.lo == Window::kMin
                        ? (acc.empty() ? 0 : acc.begin()->first)
                        : r.window_.lo;
        long to = r.window_.hi == Window::kMax
                      ? (acc.empty() ? from - 1 : acc.rbegin()->first)
                      : r.window_.hi;
        if (r.domain_.is_disc()) from = std::max<long>(from, 0);
        for (long e = from; e <= to; ++e) {
            Rat bound;
            bool have = false;
            for (const auto& t : terms) {
                auto v = term_bound_at(t, e);
                if (v && (!have || *v < bound)) bound = *v, have = true;
            }
            if (!have) continue;
            PadicScalar deg = PadicScalar::inexact_zero(p, rat_floor(bound));
            auto it = acc.find(e);
            if (it == acc.end())
                acc.emplace(e, deg);
            else
                it->second = it->second + deg;
        }
    }
    for (auto& [e, c] : acc) r.normalize_entry(e, c);

    // Result tails from the same terms, with global content minima.
    TailBound lo_t = TailBound::exact(), hi_t = TailBound::exact();
    for (const auto& t : terms) {
        if (t.from < r.window_.lo) {
            if (t.dark) {
                lo_t = TailBound::unknown();
            } else {
                Rat base = t.value;
                bool ok = true;
                if (t.form == ContamTerm::Form::lo_content) {
                    auto s = suffix_at(mins[t.content], Window::kMin + 1);
                    if (!s) ok = false;
                    else base = Rat(base + *s + Rat(t.anchor - r.window_.lo) * inner);
                } else if (t.form == ContamTerm::Form::sloped) {
                    base = Rat(base + Rat(t.anchor - r.window_.lo) * inner);
                } else {  // flat / hi_content: flat over their range
                    if (t.form == ContamTerm::Form::hi_content) {
                        auto s = prefix_at(mins[t.content], Window::kMax - 1);
                        if (!s) ok = false;
                        else base = Rat(base + *s);
                    }
                    if (ok) base = Rat(base - Rat(r.window_.lo - t.from) * inner);
                }
                if (ok) lo_t = tb_min(lo_t, TailBound::at(base));
            }
        }
        if (t.to > r.window_.hi) {
            if (t.dark) {
                hi_t = TailBound::unknown();
            } else {
                Rat base = t.value;
                bool ok = true;
                if (t.form == ContamTerm::Form::lo_content) {
                    auto s = suffix_at(mins[t.content], Window::kMin + 1);
                    if (!s) ok = false;
                    else base = Rat(base + *s + Rat(t.anchor - t.to) * inner);
                } else if (t.form == ContamTerm::Form::sloped) {
                    base = Rat(base + Rat(t.anchor - t.to) * inner);
                } else if (t.form == ContamTerm::Form::hi_content) {
                    auto s = prefix_at(mins[t.content], Window::kMax - 1);
                    if (!s) ok = false;
                    else base = Rat(base + *s);
                }
                if (ok) hi_t = tb_min(hi_t, TailBound::at(base));
            }
        }
    }
    // Stored products cut off by the cap contribute tails of their own.
    if (!mins[0].exps.empty() && !mins[1].exps.empty()) {
        long plo = sat_add(mins[0].exps.front(), mins[1].exps.front());
        long phi = sat_add(mins[0].exps.back(), mins[1].exps.back());
        if (plo < r.window_.lo) {
            Rat G = mins[0].suffix_inner.front() + mins[1].suffix_inner.front();
            lo_t = tb_min(lo_t,
                          TailBound::at(Rat(G - Rat(r.window_.lo) * inner)));
        }
        if (phi > r.window_.hi) {
            Rat F = mins[0].prefix_flat.back() + mins[1].prefix_flat.back();
            hi_t = tb_min(hi_t, TailBound::at(F));
        }
    }
    r.lo_tail_ = r.window_.lo_exact() ? TailBound::exact() : lo_t;
    r.hi_tail_ = r.window_.hi_exact() ? TailBound::exact() : hi_t;
    return r;
}

TruncatedSeries TruncatedSeries::scalar_mul(const PadicScalar& c) const {
    TruncatedSeries r(p_, domain_, window_);
    if (c.is_exact_zero()) return r;
    for (const auto& [e, x] : coeffs_) r.normalize_entry(e, x * c);
    Rat cv(c.val_lower_bound());
    r.lo_tail_ = tb_shift(lo_tail_, cv);
    r.hi_tail_ = tb_shift(hi_tail_, cv);
    return r;
}

TruncatedSeries TruncatedSeries::shift_t(long k) const {
    RingDomain d = domain_;
    Window w{sat_add(window_.lo, k), sat_add(window_.hi, k)};
    TruncatedSeries r(p_, d, w);
    for (const auto& [e, c] : coeffs_) {
        long en = e + k;
        if (d.is_disc() && en < 0)
            throw PreconditionError("shift_t: negative exponent in a disc ring");
        r.normalize_entry(en, c);
    }
    r.lo_tail_ = lo_tail_;
    r.hi_tail_ = hi_tail_;
    return r;
}

TruncatedSeries TruncatedSeries::derive() const {
    Window w{window_.lo == Window::kMin ? Window::kMin : window_.lo - 1,
             window_.hi == Window::kMax ? Window::kMax : window_.hi - 1};
    TruncatedSeries r(p_, domain_, w);
    for (const auto& [e, c] : coeffs_) {
        PadicScalar d = c.mul_long(e);
        if (domain_.is_disc() && e == 0) continue;
        r.normalize_entry(e - 1, d);
    }
    // v(e a_e) >= v(a_e): both tail forms survive unchanged.
    r.lo_tail_ = lo_tail_;
    r.hi_tail_ = hi_tail_;
    return r;
}

TruncatedSeries TruncatedSeries::antiderive() const {
    if (coeffs_.count(-1) && !coeffs_.at(-1).is_zero_class())
        throw PreconditionError("antiderive: nonzero t^{-1} coefficient");
    Window w{window_.lo == Window::kMin ? Window::kMin : window_.lo + 1,
             window_.hi == Window::kMax ? Window::kMax : window_.hi + 1};
    TruncatedSeries r(p_, domain_, w);
    for (const auto& [e, c] : coeffs_) {
        if (e == -1) continue;
        PadicScalar q = c * PadicScalar::from_rat(p_, rat(1, e + 1),
                                                  std::max<long>(c.precision(), 1));
        r.normalize_entry(e + 1, q);
    }
    // Dividing by e+1 loses unboundedly much valuation along the tails.
    r.lo_tail_ = window_.lo_exact() ? TailBound::exact() : TailBound::unknown();
    r.hi_tail_ = window_.hi_exact() ? TailBound::exact() : TailBound::unknown();
    return r;
}

TruncatedSeries TruncatedSeries::clip(const Window& w) const {
    Window nw = window_.intersect(w);
    if (nw.empty()) throw WindowError("clip to an empty window");
    // Keep a side's window (and tail) whenever nothing is dropped there.
    if (window_.lo < nw.lo && (coeffs_.empty() || coeffs_.begin()->first >= nw.lo))
        nw.lo = window_.lo;
    if (window_.hi > nw.hi && (coeffs_.empty() || coeffs_.rbegin()->first <= nw.hi))
        nw.hi = window_.hi;
    TruncatedSeries r(p_, domain_, nw);
    const Rat inner = domain_.is_disc() ? Rat(0) : domain_.inner.value();
    TailBound lo_t = lo_tail_, hi_t = hi_tail_;
    if (nw.lo > window_.lo && !lo_t.is_neg_inf() && !lo_t.is_pos_inf())
        lo_t = TailBound::at(Rat(lo_t.v - Rat(nw.lo - window_.lo) * inner));
    for (const auto& [e, c] : coeffs_) {
        if (nw.contains(e) || r.is_exact_at(e)) {
            r.normalize_entry(e, c);
        } else if (e < nw.lo) {
            lo_t = tb_min(lo_t, TailBound::at(Rat(Rat(c.val_lower_bound()) -
                                                  Rat(nw.lo - e) * inner)));
        } else {
            hi_t = tb_min(hi_t, TailBound::at(Rat(c.val_lower_bound())));
        }
    }
    r.lo_tail_ = nw.lo_exact() ? TailBound::exact() : lo_t;
    r.hi_tail_ = nw.hi_exact() ? TailBound::exact() : hi_t;
    return r;
}

TruncatedSeries TruncatedSeries::to_domain(const RingDomain& d) const {
    if (domain_ == d) return *this;
    bool ok = false;
    if (domain_.kind == RingDomain::Kind::bounded_disc) ok = true;  // into anything
    else if (domain_.kind == RingDomain::Kind::open_disc)
        ok = (d.kind == RingDomain::Kind::open_disc);
    else if (domain_.kind == RingDomain::Kind::bounded_annulus)
        ok = (d.kind == RingDomain::Kind::bounded_annulus && d.inner <= domain_.inner);
    if (!ok)
        throw PreconditionError("to_domain: " + domain_.str() + " does not include into " +
                                d.str());
    TruncatedSeries r(p_, d, window_);
    r.coeffs_ = coeffs_;
    // Low tails were normalized against the old inner norm; a smaller inner
    // only weakens the requirement, so the bound value carries over.
    r.lo_tail_ = lo_tail_;
    r.hi_tail_ = hi_tail_;
    return r;
}

TruncatedSeries::ZeroReport TruncatedSeries::zero_report() const {
    ZeroReport rep;
    for (const auto& [e, c] : coeffs_) {
        if (!c.is_zero_class()) {
            rep.all_zero = false;
            rep.worst_exponent = e;
            rep.min_bound = c.val_lower_bound();
            return rep;
        }
        if (c.val_lower_bound() < rep.min_bound) {
            rep.min_bound = c.val_lower_bound();
            rep.worst_exponent = e;
        }
    }
    return rep;
}

std::string TruncatedSeries::str(long max_terms) const {
    std::ostringstream os;
    os << "[" << domain_.str() << "]";
    long shown = 0;
    for (const auto& [e, c] : coeffs_) {
        if (c.is_zero_class()) continue;
        if (++shown > max_terms) {
            os << " + ...";
            break;
        }
        os << (shown == 1 ? " " : " + ") << "(" << c.str() << ")t^" << e;
    }
    if (shown == 0) os << " 0";
    return os.str();
}

// ---- Gauss valuations ------------------------------------------------

bool radius_in_domain(const RingDomain& d, const LogVal& r) {
    if (r.is_infinity()) return false;
    if (d.kind == RingDomain::Kind::bounded_annulus) return r <= d.inner;
    return true;
}

namespace {

Rat term_value(long e, long v, const LogVal& r) {
    return Rat(v) + Rat(e) * r.value();
}

} // namespace

Rat gauss_valuation(const TruncatedSeries& f, const LogVal& r) {
    if (!radius_in_domain(f.domain(), r))
        throw PreconditionError("gauss_valuation: radius outside the domain");
    bool found = false;
    Rat best;
    std::vector<long> argmin;
    for (const auto& [e, c] : f.coeffs()) {
        Rat val = term_value(e, c.val_lower_bound(), r);
        if (!found || val < best) {
            best = val;
            argmin.assign(1, e);
            found = true;
        } else if (val == best) {
            argmin.push_back(e);
        }
    }
    if (!found)
        throw PreconditionError("gauss_valuation: zero series on the window");
    for (long e : argmin) {
        const PadicScalar& c = f.coeffs().at(e);
        if (c.is_zero_class())
            throw WindowError("gauss_valuation: minimizing coefficient at t^" +
                              std::to_string(e) + " is not certified nonzero");
    }
    // The tails must certify that nothing beyond the window goes lower.
    TailBound tg = f.tail_gauss(r);
    if (tg.is_neg_inf()) {
        // Fall back to the boundary rule: an interior minimum is accepted.
        for (long e : argmin)
            if ((e == f.window().lo && !f.window().lo_exact()) ||
                (e == f.window().hi && !f.window().hi_exact()))
                throw WindowError("gauss_valuation: minimum attained at the "
                                  "truncation boundary t^" + std::to_string(e));
    } else if (!tg.is_pos_inf() && tg.v <= best) {
        throw WindowError("gauss_valuation: tail bound does not separate the minimum");
    }
    return best;
}

std::optional<Rat> gauss_window_bound(const TruncatedSeries& f, const LogVal& r) {
    bool found = false;
    Rat best;
    for (const auto& [e, c] : f.coeffs()) {
        Rat val = term_value(e, c.val_lower_bound(), r);
        if (!found || val < best) {
            best = val;
            found = true;
        }
    }
    if (!found) return std::nullopt;
    return best;
}

GaussBound gauss_full_bound(const TruncatedSeries& f, const LogVal& r) {
    GaussBound gb;
    TailBound tg = f.tail_gauss(r);
    if (tg.is_neg_inf()) return gb;
    auto wb = gauss_window_bound(f, r);
    if (!wb) {
        if (tg.is_pos_inf()) {
            gb.has_bound = true;
            gb.infinite = true;
        } else {
            gb.has_bound = true;
            gb.v = tg.v;
        }
        return gb;
    }
    gb.has_bound = true;
    gb.v = tg.is_pos_inf() ? *wb : std::min(*wb, tg.v);
    return gb;
}

// ---- Units ------------------------------------------------------------

namespace {

// Unique minimizing exponent of v(a_e) + e*r, or nullopt on ties /
// uncertified minima.
std::optional<long> unique_argmin(const TruncatedSeries& f, const LogVal& r) {
    bool found = false;
    Rat best;
    long arg = 0;
    bool unique = true, certified = true;
    for (const auto& [e, c] : f.coeffs()) {
        Rat val = term_value(e, c.val_lower_bound(), r);
        if (!found || val < best) {
            best = val;
            arg = e;
            unique = true;
            certified = !c.is_zero_class();
            found = true;
        } else if (val == best) {
            unique = false;
        }
    }
    if (!found || !unique || !certified) return std::nullopt;
    // Tails may not dip to the minimum.
    TailBound tg = f.tail_gauss(r);
    if (tg.is_neg_inf()) {
        const Window& w = f.window();
        if ((arg == w.lo && !w.lo_exact()) || (arg == w.hi && !w.hi_exact()))
            return std::nullopt;
    } else if (!tg.is_pos_inf() && tg.v <= best) {
        return std::nullopt;
    }
    return arg;
}

// A unit of K<alpha/t,t]]_0 is c t^{e*} (1 + g) where the inward part of g
// (exponents below e*) is strictly small on the whole radius range and the
// outward part has nonnegative relative valuation; equivalently the argmin
// at r = inner is the unique e*, and every r = 0 tie with e* comes from
// above.  Subsumes "no polygon slopes in (0, -log alpha]".
std::optional<long> annulus_unit_pivot(const TruncatedSeries& f) {
    auto estar = unique_argmin(f, f.domain().inner);
    if (!estar) return std::nullopt;
    const PadicScalar& c = f.coeffs().at(*estar);
    Rat base0 = Rat(c.valuation());  // v_0 of the pivot term
    for (const auto& [e, x] : f.coeffs()) {
        if (e == *estar) continue;
        if (Rat(x.val_lower_bound()) < base0) return std::nullopt;  // v_0(g) < 0
        if (e < *estar && Rat(x.val_lower_bound()) == base0 && x.is_zero_class())
            return std::nullopt;  // an uncertified inward tie
    }
    // Tails at r = 0 may not undercut the pivot either.
    TailBound t0 = f.tail_gauss(LogVal());
    if (t0.is_neg_inf()) return std::nullopt;
    if (!t0.is_pos_inf() && t0.v < base0) return std::nullopt;
    return estar;
}

} // namespace

bool is_unit(const TruncatedSeries& f) {
    if (f.is_zero_on_window()) return false;
    const RingDomain& d = f.domain();
    if (d.is_disc()) {
        auto a0it = f.coeffs().find(0);
        if (a0it == f.coeffs().end() || a0it->second.is_zero_class()) return false;
        if (!f.window().hi_exact() && f.hi_tail().is_neg_inf()) return false;
        long v0 = a0it->second.valuation();
        // No zeroes in the open disc: nothing may sit below v(a_0); that is
        // "no polygon slope > 0" checked directly.
        for (const auto& [e, c] : f.coeffs())
            if (e > 0 && c.val_lower_bound() < v0) return false;
        if (!f.hi_tail().is_pos_inf() && !f.hi_tail().is_neg_inf() &&
            f.hi_tail().v < v0)
            return false;
        return true;
    }
    return annulus_unit_pivot(f).has_value();
}

TruncatedSeries invert_unit(const TruncatedSeries& f, long n_terms, long max_iter) {
    const long p = f.prime();
    const RingDomain& d = f.domain();
    if (d.is_disc()) {
        if (!is_unit(f))
            throw PreconditionError("invert_unit: not a unit of the disc ring");
        PadicScalar a0inv = f.coeff(0).inv();
        long out_hi = f.window().hi;
        if (out_hi == Window::kMax) {
            auto ms = f.max_support();
            out_hi = (n_terms > 0) ? n_terms : std::max<long>(4 * (*ms) + 16, 64);
            if (*ms == 0) out_hi = 0;  // constant: exact inverse
        } else if (n_terms > 0) {
            out_hi = std::min(out_hi, n_terms);
        }
        TruncatedSeries r(p, d, Window{Window::kMin, out_hi});
        r.set_coeff(0, a0inv);
        for (long e = 1; e <= out_hi; ++e) {
            PadicScalar s = PadicScalar::zero(p);
            for (const auto& [j, aj] : f.coeffs()) {
                if (j < 1 || j > e) continue;
                s = s + aj * r.coeff(e - j);
            }
            r.set_coeff(e, -(a0inv * s));
        }
        return r;
    }

    // Annulus: write f = c t^{e*} (1 - h) and sum the geometric series.
    // Inward terms of h gain valuation per factor; outward terms march out
    // of the window; mixed terms do both.  Within a clipped window the
    // partial sums therefore stabilize to the working precision.
    auto pivot = annulus_unit_pivot(f);
    if (!pivot)
        throw PreconditionError("invert_unit: not certified a unit of the annulus ring");
    long estar = *pivot;
    const PadicScalar& c = f.coeffs().at(estar);
    TruncatedSeries h =
        TruncatedSeries::one(p, c.precision(), d) - f.scalar_mul(c.inv()).shift_t(-estar);
    if (h.is_zero_on_window())
        return TruncatedSeries::monomial(c.inv(), -estar, d);

    long target = 0;
    long floor_abs = PadicScalar::kInfVal;
    for (const auto& [e, x] : f.coeffs()) {
        target = std::max<long>(target, x.abs_precision() - x.val_lower_bound());
        floor_abs = std::min(floor_abs, x.abs_precision());
    }

    Window cap = h.window();
    if (n_terms > 0) {
        long span = std::abs(n_terms) + std::abs(estar) + 8;
        cap = cap.intersect(Window{-span, span});
    } else {
        long span = 64;
        if (cap.lo != Window::kMin) span = std::max(span, -cap.lo + 8);
        if (cap.hi != Window::kMax) span = std::max(span, cap.hi + 8);
        cap = cap.intersect(Window{-span, span});
    }
    // Inward exponents pay e*inner of valuation inside the window; nothing
    // can be resolved beyond the input's own absolute precision.
    Rat span_corr = Rat(std::max(-cap.lo, 0L)) * d.inner.value();
    long stop_at = std::min(target + 1 + rat_floor(span_corr), floor_abs);

    TruncatedSeries sum = TruncatedSeries::one(p, c.precision(), d).clip(cap);
    TruncatedSeries cur = sum;
    bool complete = false;
    for (long k = 0; k < max_iter; ++k) {
        cur = mul_capped(cur, h, cap);
        long minv = PadicScalar::kInfVal;
        for (const auto& [e, x] : cur.coeffs())
            minv = std::min(minv, x.val_lower_bound());
        if (cur.coeffs().empty() || minv >= stop_at) {
            complete = true;
            break;
        }
        sum = sum + cur;
    }
    if (!complete)
        throw WindowError("invert_unit: geometric iteration budget exhausted");
    return sum.scalar_mul(c.inv()).shift_t(-estar);
}

// ---- Boundedness ------------------------------------------------------

bool has_finitely_many_zeroes(const TruncatedSeries& f, const Rat& margin) {
    if (f.domain().kind != RingDomain::Kind::bounded_annulus)
        throw PreconditionError("has_finitely_many_zeroes: annulus domain required");
    if (f.is_zero_on_window())
        throw PreconditionError("has_finitely_many_zeroes: zero series");

    std::vector<std::pair<long, long>> pts;  // (e, v-bound)
    for (const auto& [e, c] : f.coeffs()) pts.push_back({e, c.val_lower_bound()});

    auto quarter_test = [&](bool left_side, auto value_of) -> std::optional<bool> {
        long lo = pts.front().first, hi = pts.back().first;
        long span = hi - lo;
        long cut = left_side ? lo + std::max<long>(1, span / 4)
                             : hi - std::max<long>(1, span / 4);
        bool have_far = false, have_near = false;
        Rat far, near;
        for (auto& [e, v] : pts) {
            Rat val = value_of(e, v);
            bool is_far = left_side ? (e <= cut) : (e >= cut);
            if (is_far) {
                if (!have_far || val < far) far = val, have_far = true;
            } else {
                if (!have_near || val < near) near = val, have_near = true;
            }
        }
        if (!have_far || !have_near) return std::nullopt;
        if (far >= near) return true;
        if (far < near - margin) return false;
        return std::nullopt;  // within margin: not yet stable
    };

    if (!f.window().hi_exact() && !f.hi_tail().is_pos_inf()) {
        auto res = quarter_test(false, [&](long, long v) { return Rat(v); });
        if (!res)
            throw WindowError("has_finitely_many_zeroes: right tail not stable");
        if (!*res) return false;
    }
    if (!f.window().lo_exact() && !f.lo_tail().is_pos_inf()) {
        const Rat& r = f.domain().inner.value();
        auto res = quarter_test(true, [&](long e, long v) { return Rat(Rat(v) + Rat(e) * r); });
        if (!res)
            throw WindowError("has_finitely_many_zeroes: left tail not stable");
        if (!*res) return false;
    }
    return true;
}

// ---- Radius estimate ---------------------------------------------------

double RadiusEstimate::relative_width(long p) const {
    if (entire) return 0.0;
    return std::log(static_cast<double>(p)) * Rat(slope_hi - slope_lo).get_d();
}

RadiusEstimate radius_of_convergence_estimate(const TruncatedSeries& f) {
    if (!f.domain().is_disc())
        throw PreconditionError("radius estimate: disc domains only");
    const long p = f.prime();
    auto msup = f.max_certified_support();
    RadiusEstimate est;
    if (!msup || f.window().hi_exact()) {
        est.entire = true;  // polynomial: nothing beyond the support
        return est;
    }
    long W = *msup;
    long wlo = 0;
    for (const auto& [e, c] : f.coeffs())
        if (!c.is_zero_class()) {
            wlo = e;
            break;
        }
    if (W - wlo < 32)
        throw WindowError("radius estimate: window length < 32");
    long tail_from = std::max<long>(W / 2, 1);
    bool any = false;
    Rat lo, hi;
    for (const auto& [e, c] : f.coeffs()) {
        if (e < tail_from || c.is_zero_class()) continue;
        Rat L = Rat(-c.valuation()) / Rat(e);
        Rat w = Rat(1 + base_p_digits(p, e)) / Rat(e);
        if (!any || L - w < lo) lo = L - w;
        if (!any || L + w > hi) hi = L + w;
        any = true;
    }
    if (!any) {
        est.entire = true;  // all-zero tail half: polynomial behavior
        return est;
    }
    est.slope_lo = lo;
    est.slope_hi = hi;
    return est;
}

// ---- Log-growth ---------------------------------------------------------

std::string LogGrowthReport::str() const {
    switch (status) {
        case Status::bounded: return "bounded";
        case Status::delta: return "delta=" + rat_to_string(delta);
        case Status::exceeds_window: return "exceeds_window";
    }
    return "?";
}

namespace {

// Compare |a_i|/(i+1)^delta > p^{half_shift/2} |a_j|/(j+1)^delta exactly;
// delta = n/d >= 0, v are valuations.  Doubling the exponents keeps the
// half-p-power margin integral.
bool excess_greater(long p, const Rat& delta, long i, long vi, long j, long vj,
                    long half_shift) {
    long n = static_cast<long>(delta.get_num().get_si());
    long d = static_cast<long>(delta.get_den().get_si());
    long vmin = std::min(vi, vj);
    Int lhs = p_power(p, 2 * d * (vj - vmin));
    mpz_class jp1(j + 1), ip1(i + 1);
    Int jn, in;
    mpz_pow_ui(jn.get_mpz_t(), jp1.get_mpz_t(), static_cast<unsigned long>(2 * n));
    mpz_pow_ui(in.get_mpz_t(), ip1.get_mpz_t(), static_cast<unsigned long>(2 * n));
    lhs *= jn;
    Int rhs = p_power(p, 2 * d * (vi - vmin) + d * half_shift);
    rhs *= in;
    return lhs > rhs;
}

} // namespace

LogGrowthReport log_growth_classify(const TruncatedSeries& f,
                                    const std::vector<Rat>& deltas) {
    if (!f.domain().is_disc())
        throw PreconditionError("log_growth_classify: disc domains only");
    const long p = f.prime();
    RadiusEstimate est = radius_of_convergence_estimate(f);

    LogGrowthReport rep;
    if (est.entire || f.is_zero_on_window()) {
        rep.status = LogGrowthReport::Status::bounded;
        rep.delta = 0;
        return rep;
    }
    long W = *f.max_certified_support();

    std::vector<Rat> cands;
    cands.push_back(Rat(0));
    for (const Rat& d : deltas)
        if (d > 0) cands.push_back(d);
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

    // Finite log-growth allows tail slopes up to ~ delta*log_p(W)/W; only a
    // certified faster growth means the radius is below one.
    Rat dmax = cands.back();
    Rat gate = Rat((2 + rat_floor(dmax)) * (1 + base_p_digits(p, W)), W);
    gate.canonicalize();
    if (est.slope_lo > gate)
        throw PreconditionError("log_growth_classify: radius certified < 1");

    for (const Rat& delta : cands) {
        // Sup of |a_i|/(i+1)^delta over [0, W/p] against (W/p, W]: growth of
        // the sup across a p-fold window step by more than half a p-power
        // flags unboundedness.
        long cut = W / p;
        std::optional<std::pair<long, long>> head, tail;  // (i, v)
        for (const auto& [e, c] : f.coeffs()) {
            if (e < 0 || e > W) continue;
            long v = c.val_lower_bound();
            auto& slot = (e > cut) ? tail : head;
            if (!slot || excess_greater(p, delta, e, v, slot->first, slot->second, 0))
                slot = {e, v};
        }
        bool ok;
        if (!tail)
            ok = true;  // nothing in the upper stretch at all
        else if (!head)
            ok = false;
        else
            ok = !excess_greater(p, delta, tail->first, tail->second, head->first,
                                 head->second, 1);
        if (ok) {
            rep.status = delta == 0 ? LogGrowthReport::Status::bounded
                                    : LogGrowthReport::Status::delta;
            rep.delta = delta;
            if (tail) rep.witness_index = tail->first;
            return rep;
        }
        rep.witness_index = tail->first;
    }
    rep.status = LogGrowthReport::Status::exceeds_window;
    return rep;
}

} // namespace padiff

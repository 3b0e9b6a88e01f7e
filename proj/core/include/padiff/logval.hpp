#pragma once

#include <string>

#include "padiff/rational.hpp"

namespace padiff {

// A radius or norm on the -log_p scale: rho in (0,1] is represented by the
// exact nonnegative rational r = -log_p rho, with r = 0 <=> rho = 1.
// +infinity stands for rho = 0 (the norm of an exact zero).
class LogVal {
public:
    LogVal() : inf_(false), v_(0) {}
    explicit LogVal(const Rat& v) : inf_(false), v_(v) {
        if (v_ < 0) throw PreconditionError("LogVal must be nonnegative");
    }
    LogVal(long num, long den) : LogVal(rat(num, den)) {}

    static LogVal infinity() {
        LogVal r;
        r.inf_ = true;
        return r;
    }
    // omega = p^{-1/(p-1)}, the exponential convergence threshold.
    static LogVal omega(long p) { return LogVal(rat(1, p - 1)); }

    bool is_infinity() const { return inf_; }
    bool is_zero() const { return !inf_ && v_ == 0; }
    const Rat& value() const {
        if (inf_) throw PreconditionError("LogVal: value() of +inf");
        return v_;
    }

    friend bool operator==(const LogVal& a, const LogVal& b) {
        if (a.inf_ || b.inf_) return a.inf_ && b.inf_;
        return a.v_ == b.v_;
    }
    friend bool operator!=(const LogVal& a, const LogVal& b) { return !(a == b); }
    friend bool operator<(const LogVal& a, const LogVal& b) {
        if (a.inf_) return false;
        if (b.inf_) return true;
        return a.v_ < b.v_;
    }
    friend bool operator>(const LogVal& a, const LogVal& b) { return b < a; }
    friend bool operator<=(const LogVal& a, const LogVal& b) { return !(b < a); }
    friend bool operator>=(const LogVal& a, const LogVal& b) { return !(a < b); }

    friend LogVal operator+(const LogVal& a, const LogVal& b) {
        if (a.inf_ || b.inf_) return infinity();
        return LogVal(a.v_ + b.v_);
    }

    std::string str() const { return inf_ ? "inf" : rat_to_string(v_); }

    static LogVal parse(const std::string& s) {
        if (s == "inf") return infinity();
        return LogVal(rat_from_string(s));
    }

private:
    bool inf_;
    Rat v_;
};

} // namespace padiff

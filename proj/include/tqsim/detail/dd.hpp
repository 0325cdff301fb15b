#pragma once

#include <cmath>

namespace tqsim::detail {

// Double-double value: hi + lo with |lo| <= ulp(hi)/2. Roughly 31 significant
// decimal digits, which is what lets the alternating hypergeometric series
// survive the cancellation between terms up to the 1F1 Kummer switch point.
struct dd {
    double hi = 0.0;
    double lo = 0.0;
};

// Error-free transformations (Knuth / Dekker). two_sum and two_prod return the
// rounding error of the primitive operation exactly.
inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline dd quick_two_sum(double a, double b) {  // requires |a| >= |b|
    double s = a + b;
    return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline dd dd_add(const dd& a, const dd& b) {
    dd s = two_sum(a.hi, b.hi);
    dd t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline dd dd_neg(const dd& a) { return {-a.hi, -a.lo}; }

inline dd dd_sub(const dd& a, const dd& b) { return dd_add(a, dd_neg(b)); }

inline dd dd_mul(const dd& a, const dd& b) {
    dd p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline dd dd_mul(const dd& a, double b) {
    dd p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

inline dd dd_div(const dd& a, const dd& b) {
    double q1 = a.hi / b.hi;
    dd r = dd_sub(a, dd_mul(b, q1));
    double q2 = r.hi / b.hi;
    r = dd_sub(r, dd_mul(b, q2));
    double q3 = r.hi / b.hi;
    dd q = quick_two_sum(q1, q2);
    return dd_add(q, dd{q3, 0.0});
}

inline dd dd_div(const dd& a, double b) { return dd_div(a, dd{b, 0.0}); }

inline double to_double(const dd& a) { return a.hi + a.lo; }

}  // namespace tqsim::detail

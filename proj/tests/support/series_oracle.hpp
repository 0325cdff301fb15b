#pragma once

// Independent high-precision reference implementations used only by tests.
// Everything here is computed with 500 decimal digits through routes that
// share no code with the library: Spouge's formula for the gamma function
// and raw Maclaurin series for the hypergeometric sums.

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

using big = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<500>>;

inline const big& big_pi() {
    static const big v = 4 * atan(big(1));
    return v;
}

namespace detail {

// Spouge's approximation with a = 260 terms; relative truncation error is
// below 1e-200 for arguments >= 1.
inline big spouge(const big& x) {
    constexpr int a = 260;
    const big z = x - 1;
    big acc = sqrt(2 * big_pi());
    big fact = 1;  // (k-1)!
    for (int k = 1; k < a; ++k) {
        big ck = pow(big(a - k), big(k) - big(1) / 2) * exp(big(a - k)) / fact;
        if ((k - 1) % 2 == 1) ck = -ck;
        acc += ck / (z + k);
        fact *= k;
    }
    return pow(z + a, z + big(1) / 2) * exp(-(z + a)) * acc;
}

}  // namespace detail

inline big gamma_big(big x) {
    if (x <= 0 && x == floor(x)) throw std::domain_error("gamma_big: pole");
    big scale = 1;
    while (x < 1) {
        scale /= x;
        x += 1;
    }
    return scale * detail::spouge(x);
}

// Plain term-by-term pFq sum; adequate for every argument the tests use
// because 500 digits absorb the alternating-series cancellation.
inline big hyp_series_big(const std::vector<big>& as, const std::vector<big>& bs, const big& x) {
    static const big tiny = big("1e-260");
    big term = 1, sum = 1;
    int consec = 0;
    for (int k = 0; k < 200000; ++k) {
        big num = x, den = k + 1;
        for (const auto& a : as) num *= a + k;
        for (const auto& b : bs) den *= b + k;
        term *= num / den;
        sum += term;
        if (abs(term) < abs(sum) * tiny) {
            if (++consec >= 3) return sum;
        } else {
            consec = 0;
        }
    }
    throw std::runtime_error("hyp_series_big: no convergence");
}

inline big hyp1f1_big(const big& a, const big& b, const big& x) {
    return hyp_series_big({a}, {b}, x);
}

inline big hyp2f2_big(const big& x) {
    return hyp_series_big({1, 1}, {big(3) / 2, 2}, x);
}

// Dephasing integral; mirrors the production branch routing so values are
// comparable at the Ohmic crossover.
inline big i_q_big(double t, double Q, double gamma0) {
    if (t == 0.0) return 0;
    const big tg = big(t) * big(gamma0);
    const big x = -tg * tg / 4;
    if (std::abs(Q - 1.0) < 1e-9) return tg * tg / 2 * hyp2f2_big(x);
    const big a = (big(Q) - 1) / 2;
    return 2 * pow(big(gamma0), big(Q) - 1) * gamma_big(a) * (1 - hyp1f1_big(a, big(1) / 2, x));
}

inline big beta_magnitude_big(double Q, double gamma0) {
    return 4 * big_pi() / gamma_big(big(Q) + 1) / pow(big(gamma0), big(Q) + 1);
}

inline big alpha_big(double t, double Q, double gamma0, double B) {
    const big expo = 2 * big(B) * big(B) * beta_magnitude_big(Q, gamma0) * i_q_big(t, Q, gamma0);
    return exp(-expo);
}

inline double to_d(const big& v) { return v.convert_to<double>(); }

}  // namespace oracle

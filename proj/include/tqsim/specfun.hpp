#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tqsim/detail/dd.hpp"

namespace tqsim {

// One qubit's bath and control settings.
struct EnvironmentParams {
    double Q = 1.0;       // spectral exponent of the bath density ~ w^Q, Q >= 0
    double gamma0 = 1.0;  // cutoff frequency, > 0, sets the bath correlation time
    double B = 1.0;       // field strength, >= 0; only B^2 enters the dephasing exponent

    void check() const {
        if (!(Q >= 0.0))
            throw std::invalid_argument("EnvironmentParams: Q must be >= 0, got " + std::to_string(Q));
        if (!(gamma0 > 0.0))
            throw std::invalid_argument("EnvironmentParams: gamma0 must be > 0, got " + std::to_string(gamma0));
        if (!(B >= 0.0))
            throw std::invalid_argument("EnvironmentParams: B must be >= 0, got " + std::to_string(B));
    }
};

// alpha(t) in (0, 1] and its analytic field derivative.
struct DecoherenceFactor {
    double alpha = 1.0;
    double dalpha_dB = 0.0;
};

inline double gamma_fn(double z) {
    if (z <= 0.0 && z == std::floor(z))
        throw std::domain_error("gamma_fn: pole at z = " + std::to_string(z));
    return std::tgamma(z);
}

namespace detail {

inline constexpr int kSeriesIterCap = 10000;
inline constexpr double kSeriesRelTol = 1e-16;

// Direct power series for pFq (p, q <= 2) summed in double-double arithmetic.
// T_{k+1} = T_k * prod(a_i + k) / prod(b_j + k) * x / (k + 1).
// include_unit = false drops the k = 0 term and returns pFq - 1, which is what
// keeps 1 - 1F1 fully accurate near x = 0.
// Convergence: |term| < 1e-16 * |partial sum| for 3 consecutive terms.
inline double hyp_series(const double* as, int na, const double* bs, int nb, double x,
                         bool include_unit) {
    dd term{1.0, 0.0};
    dd sum = include_unit ? term : dd{0.0, 0.0};
    int quiet = 0;
    for (int k = 0; k < kSeriesIterCap; ++k) {
        for (int i = 0; i < na; ++i) term = dd_mul(term, two_sum(as[i], double(k)));
        term = dd_mul(term, x);
        for (int j = 0; j < nb; ++j) term = dd_div(term, two_sum(bs[j], double(k)));
        term = dd_div(term, double(k + 1));
        sum = dd_add(sum, term);
        const double partial = std::abs(to_double(sum) + (include_unit ? 0.0 : 1.0));
        if (std::abs(to_double(term)) < kSeriesRelTol * std::max(partial, 1e-300)) {
            if (++quiet == 3) return to_double(sum);
        } else {
            quiet = 0;
        }
    }
    throw std::runtime_error("hypergeometric series did not converge within " +
                             std::to_string(kSeriesIterCap) + " terms (x = " + std::to_string(x) + ")");
}

inline double hyp1f1_series(double a, double b, double x, bool include_unit) {
    return hyp_series(&a, 1, &b, 1, x, include_unit);
}

// Direct-series cutoff. The alternating series loses ~0.434*|x| digits to
// cancellation while the value itself can be as small as e^x, so |x| = 15
// is where double-double still holds every case comfortably below 1e-12.
inline constexpr double kKummerSwitch = -15.0;

// 1F1(a;b;x) - 1 without the cancellation of forming the difference.
inline double hyp1f1_m1(double a, double b, double x) {
    if (x < kKummerSwitch)  // Kummer transform; the product is far from 1 here
        return std::exp(x) * hyp1f1_series(b - a, b, -x, true) - 1.0;
    return hyp1f1_series(a, b, x, false);
}

}  // namespace detail

inline double hyp1f1(double a, double b, double x) {
    if (b <= 0.0 && b == std::floor(b))
        throw std::domain_error("hyp1f1: parameter pole at b = " + std::to_string(b));
    // Kummer transformation for negative argument: after the transform every
    // case in range sums with at most algebraic cancellation.
    if (x < detail::kKummerSwitch)
        return std::exp(x) * detail::hyp1f1_series(b - a, b, -x, true);
    return 1.0 + detail::hyp1f1_series(a, b, x, false);
}

// 2F2(1,1; 3/2,2; x). Entire function; series up to |x| = 40, beyond that the
// integral representation via the Dawson function gives
//   2F2(1,1;3/2,2;-w) = (2/w) [ c0 + ln(w)/4 + T(w) ],
//   T(w) = -sum_{n>=1} (2n-1)!! / (2^{n+2} n w^n),  c0 = (eulergamma + 2 ln 2)/4,
// with the asymptotic tail truncated at its smallest term (error ~ e^{-w}).
inline double hyp2f2_11_3half2(double x) {
    if (x >= -40.0) {
        const double as[2] = {1.0, 1.0};
        const double bs[2] = {1.5, 2.0};
        return 1.0 + detail::hyp_series(as, 2, bs, 2, x, false);
    }
    const double w = -x;
    const double c0 = 0.25 * (std::numbers::egamma + 2.0 * std::numbers::ln2);
    double term = 1.0 / (8.0 * w);
    double tail = -term;
    for (int n = 1; n < 400; ++n) {
        const double next = term * ((2.0 * n + 1.0) * n) / ((n + 1.0) * 2.0 * w);
        if (next >= term || next < 1e-18) break;
        term = next;
        tail -= term;
    }
    return 2.0 / w * (c0 + 0.25 * std::log(w) + tail);
}

namespace detail {
// Everything within this band of Q = 1 routes to the Ohmic branch; the generic
// branch has a Gamma((Q-1)/2) pole there and no interpolation is attempted.
inline constexpr double kOhmicBranchTol = 1e-9;
}  // namespace detail

// Dephasing integral I_Q(t). Q = 1:  (t G)^2/2 * 2F2(1,1;3/2,2;-(t G)^2/4).
// Q != 1: 2 G^(Q-1) Gamma((Q-1)/2) [1 - 1F1((Q-1)/2; 1/2; -(t G)^2/4)].
inline double i_q(double t, const EnvironmentParams& env) {
    env.check();
    if (!(t >= 0.0)) throw std::domain_error("i_q: t must be >= 0, got " + std::to_string(t));
    if (t == 0.0) return 0.0;
    const double u = t * env.gamma0;
    const double x = -0.25 * u * u;
    if (std::abs(env.Q - 1.0) < detail::kOhmicBranchTol) return 0.5 * u * u * hyp2f2_11_3half2(x);
    const double a = 0.5 * (env.Q - 1.0);
    double bracket;  // 1 - 1F1(a; 1/2; x)
    if (x < -30.0)
        bracket = 1.0 - std::exp(x) * detail::hyp1f1_series(0.5 - a, 0.5, -x, true);
    else
        bracket = -detail::hyp1f1_series(a, 0.5, x, false);
    return 2.0 * std::pow(env.gamma0, env.Q - 1.0) * gamma_fn(a) * bracket;
}

// |beta| with beta = -4 pi / Gamma(Q+1) * (1/gamma0)^(Q+1); beta < 0 always,
// only its magnitude enters alpha.
inline double beta_magnitude(const EnvironmentParams& env) {
    env.check();
    return 4.0 * std::numbers::pi / gamma_fn(env.Q + 1.0) * std::pow(env.gamma0, -(env.Q + 1.0));
}

// alpha(t) = exp(-2 B^2 |beta| I_Q(t)), dalpha/dB = -4 B |beta| I_Q alpha.
// A negative dephasing exponent (I_Q < 0) would push alpha above 1; no sampled
// parameter region does this, so it is flagged rather than clamped.
inline DecoherenceFactor alpha(double t, const EnvironmentParams& env) {
    env.check();
    if (!(t >= 0.0)) throw std::domain_error("alpha: t must be >= 0, got " + std::to_string(t));
    if (t == 0.0 || env.B == 0.0) return {1.0, 0.0};
    const double iq = i_q(t, env);
    const double bmag = beta_magnitude(env);
    double expo = 2.0 * env.B * env.B * bmag * iq;
    if (expo < -1e-12)
        throw std::domain_error("alpha: negative dephasing exponent (I_Q < 0) at Q = " +
                                std::to_string(env.Q) + ", t = " + std::to_string(t));
    if (expo < 0.0) expo = 0.0;
    const double a = std::exp(-expo);
    return {a, -4.0 * env.B * bmag * iq * a};
}

}  // namespace tqsim

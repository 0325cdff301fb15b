#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "tqsim/channel.hpp"
#include "tqsim/qmatrix.hpp"
#include "tqsim/specfun.hpp"

namespace tqsim {

inline bool is_x_state(const Mat4& m, double tol = 1e-12) {
    static constexpr std::array<std::array<int, 2>, 4> off = {
        {{0, 1}, {0, 2}, {1, 3}, {2, 3}}};
    for (const auto& ij : off) {
        if (std::abs(m(ij[0], ij[1])) > tol) return false;
        if (std::abs(m(ij[1], ij[0])) > tol) return false;
    }
    return true;
}

namespace detail {

inline void require_x_state(const Mat4& m, const char* where) {
    if (!is_x_state(m))
        throw std::invalid_argument(std::string(where) + ": state is not of X form");
}

inline double xlog2x(double p) {
    if (p <= 0.0) return 0.0;
    return p * std::log2(p);
}

// Binary Shannon entropy, clamped against roundoff at the endpoints.
inline double h2(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return -xlog2x(x) - xlog2x(1.0 - x);
}

// Eigenvalues of the 2x2 principal block (d0, d1, corner c).
inline std::array<double, 2> x_block_eigs(double d0, double d1, double c_abs) {
    const double mid = 0.5 * (d0 + d1);
    const double rad = std::hypot(0.5 * (d0 - d1), c_abs);
    return {std::max(mid + rad, 0.0), std::max(mid - rad, 0.0)};
}

}  // namespace detail

// Wootters concurrence of an X state.
inline double concurrence_x(const Mat4& rho) {
    detail::require_x_state(rho, "concurrence_x");
    const double p00 = rho(0, 0).real(), p11 = rho(1, 1).real();
    const double p22 = rho(2, 2).real(), p33 = rho(3, 3).real();
    const double c1 = std::abs(rho(0, 3)) - std::sqrt(std::max(p11 * p22, 0.0));
    const double c2 = std::abs(rho(1, 2)) - std::sqrt(std::max(p00 * p33, 0.0));
    return 2.0 * std::max({0.0, c1, c2});
}

template <int N>
double coherence_l1(const Matrix<N>& rho) {
    double s = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (i != j) s += std::abs(rho(i, j));
    return s;
}

// Quantum discord of an X state under projective measurements on qubit 2;
// the conditional entropy minimum is attained on one of two branches.
inline double discord_x(const Mat4& rho) {
    detail::require_x_state(rho, "discord_x");
    const double p00 = rho(0, 0).real(), p11 = rho(1, 1).real();
    const double p22 = rho(2, 2).real(), p33 = rho(3, 3).real();
    const double c03 = std::abs(rho(0, 3)), c12 = std::abs(rho(1, 2));

    const auto outer = detail::x_block_eigs(p00, p33, c03);
    const auto inner = detail::x_block_eigs(p11, p22, c12);
    double sum_llog = 0.0;
    for (double l : {outer[0], outer[1], inner[0], inner[1]})
        sum_llog += detail::xlog2x(l);

    const double hb = detail::h2(p00 + p22);  // marginal of qubit 1

    const double zleg = 1.0 - 2.0 * (p22 + p33);
    const double d1 =
        detail::h2(0.5 * (1.0 + std::sqrt(zleg * zleg + 4.0 * (c03 + c12) * (c03 + c12))));
    const double d2 = -detail::xlog2x(p00) - detail::xlog2x(p11) - detail::xlog2x(p22) -
                      detail::xlog2x(p33) - detail::h2(p00 + p22);

    const double q1 = hb + sum_llog + d1;
    const double q2 = hb + sum_llog + d2;
    return std::max(0.0, std::min(q1, q2));
}

namespace detail {

// Hilbert-Schmidt phase speed of the evolved witness (|0> + e^{i phi}|1>)/sqrt(2):
// off-diagonal magnitude alpha/2, so the speed is exactly alpha/2.
inline double hss_value(double al) {
    constexpr double phi = 0.4;
    Mat2 drho;
    drho(0, 1) = cplx(0.0, -0.5) * std::polar(al, -phi);
    drho(1, 0) = std::conj(drho(0, 1));
    const double tr2 = ((drho * drho).trace()).real();
    return std::sqrt(0.5 * tr2);
}

inline double blp_value(double al) {
    Mat2 zero, one;
    zero(0, 0) = 1.0;
    one(1, 1) = 1.0;
    const Density2 r0 = evolve_single(Density2(zero), al);
    const Density2 r1 = evolve_single(Density2(one), al);
    return trace_distance<2>(r0, r1);
}

template <class F>
int rate_sign(F value_at, double t) {
    constexpr double h = 1e-4;
    double rate;
    if (t < h)
        rate = (value_at(t + h) - value_at(t)) / h;
    else
        rate = (value_at(t + h) - value_at(t - h)) / (2.0 * h);
    if (std::abs(rate) < 1e-10) return 0;
    return rate > 0.0 ? 1 : -1;
}

}  // namespace detail

struct WitnessPoint {
    double value = 0.0;
    int rate_sign = 0;  // +1 marks backflow (non-Markovian growth)
};

inline WitnessPoint hss_witness(double t, const EnvironmentParams& env) {
    WitnessPoint w;
    w.value = detail::hss_value(alpha(t, env).alpha);
    w.rate_sign =
        detail::rate_sign([&](double s) { return detail::hss_value(alpha(s, env).alpha); }, t);
    return w;
}

inline WitnessPoint blp_witness(double t, const EnvironmentParams& env) {
    WitnessPoint w;
    w.value = detail::blp_value(alpha(t, env).alpha);
    w.rate_sign =
        detail::rate_sign([&](double s) { return detail::blp_value(alpha(s, env).alpha); }, t);
    return w;
}

struct ResourceReport {
    double t = 0.0;
    double concurrence = 0.0;
    double coherence_l1 = 0.0;
    double discord = 0.0;
    double hss = 0.0;
    double trace_dist = 0.0;
    int hss_rate_sign = 0;
    int blp_rate_sign = 0;
};

// Scores a two-qubit X state and attaches the single-qubit non-Markovianity
// witnesses of the qubit-1 environment at the same instant.
inline ResourceReport resource_report(double t, const EnvironmentParams& env1, const Mat4& rho) {
    ResourceReport r;
    r.t = t;
    r.concurrence = concurrence_x(rho);
    r.coherence_l1 = coherence_l1<4>(rho);
    r.discord = discord_x(rho);
    const WitnessPoint h = hss_witness(t, env1);
    const WitnessPoint b = blp_witness(t, env1);
    r.hss = h.value;
    r.trace_dist = b.value;
    r.hss_rate_sign = h.rate_sign;
    r.blp_rate_sign = b.rate_sign;
    return r;
}

}  // namespace tqsim

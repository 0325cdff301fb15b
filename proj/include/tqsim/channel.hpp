#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "tqsim/qmatrix.hpp"
#include "tqsim/specfun.hpp"

namespace tqsim {

namespace detail {
inline void check_alpha_range(double alpha, const char* where) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument(std::string(where) + ": alpha outside [0, 1]: " +
                                    std::to_string(alpha));
}
}  // namespace detail

// Operator-sum representation of the dephasing map at decoherence factor alpha.
struct KrausSet {
    std::array<Mat2, 4> k;
};

inline KrausSet kraus_set(double alpha) {
    detail::check_alpha_range(alpha, "kraus_set");
    const double r = std::sqrt(0.5 * (1.0 - alpha * alpha));
    KrausSet s;
    s.k[0](0, 0) = 0.5 * (alpha - 1.0);
    s.k[0](1, 1) = 0.5 * (1.0 - alpha);
    s.k[1](0, 0) = 0.5 * (alpha + 1.0);
    s.k[1](1, 1) = 0.5 * (alpha + 1.0);
    s.k[2](0, 1) = r;
    s.k[3](1, 0) = r;
    return s;
}

// Closed-form single-qubit evolution: populations pulled toward 1/2 by alpha^2,
// coherences scaled by alpha.
inline Density2 evolve_single(const Density2& rho0, double alpha) {
    detail::check_alpha_range(alpha, "evolve_single");
    const Mat2& r = rho0.mat();
    Mat2 m;
    m(0, 0) = 0.5 * (1.0 + (2.0 * r(0, 0).real() - 1.0) * alpha * alpha);
    m(1, 1) = 0.5 * (1.0 + (2.0 * r(1, 1).real() - 1.0) * alpha * alpha);
    m(0, 1) = r(0, 1) * alpha;
    m(1, 0) = r(1, 0) * alpha;
    return Density2(m);
}

inline Density2 evolve_single_kraus(const Density2& rho0, double alpha) {
    const KrausSet s = kraus_set(alpha);
    Mat2 m;
    for (const auto& k : s.k) m = m + k * rho0.mat() * k.adjoint();
    return Density2(m);
}

// Product-channel evolution of a two-qubit state: 16-term sum over K_i (x) K_j.
// Validator path; the element closed form below is the production route.
inline Density4 evolve_two_kraus(const Density4& rho0, double alpha1, double alpha2) {
    const KrausSet s1 = kraus_set(alpha1);
    const KrausSet s2 = kraus_set(alpha2);
    Mat4 m;
    for (const auto& ka : s1.k)
        for (const auto& kb : s2.k) {
            const Mat4 k = tensor(ka, kb);
            m = m + k * rho0.mat() * k.adjoint();
        }
    return Density4(m);
}

// Resource preparation cos(vartheta/2)|00> + sin(vartheta/2)|11>.
inline Vec4 resource_initial(double vartheta) {
    return {std::cos(0.5 * vartheta), 0.0, 0.0, std::sin(0.5 * vartheta)};
}

// Evolved resource state: X form with corner coherences only.
inline Mat4 channel_elements(double alpha1, double alpha2, double vartheta) {
    detail::check_alpha_range(alpha1, "channel_elements");
    detail::check_alpha_range(alpha2, "channel_elements");
    const double a1 = alpha1 * alpha1, a2 = alpha2 * alpha2;
    const double cv = std::cos(vartheta), sv = std::sin(vartheta);
    Mat4 m;
    m(0, 0) = 0.25 * ((a1 + a2) * cv + a1 * a2 + 1.0);
    m(1, 1) = 0.25 * (1.0 - a1 * a2 + (a1 - a2) * cv);
    m(2, 2) = 0.25 * (1.0 - a1 * a2 - (a1 - a2) * cv);
    m(3, 3) = 0.25 * (-(a1 + a2) * cv + a1 * a2 + 1.0);
    m(0, 3) = 0.5 * alpha1 * alpha2 * sv;
    m(3, 0) = m(0, 3);
    return m;
}

// Teleportation resource at time t with per-qubit decoherence factors attached,
// so downstream closed forms never re-derive alpha from the matrix.
struct ChannelSnapshot {
    double t;
    DecoherenceFactor alpha1;
    DecoherenceFactor alpha2;
    Density4 rho_ch;
};

inline ChannelSnapshot channel_state(double t, const EnvironmentParams& env1,
                                     const EnvironmentParams& env2, double vartheta) {
    if (!(vartheta >= 0.0 && vartheta <= std::numbers::pi))
        throw std::invalid_argument("channel_state: vartheta outside [0, pi]: " +
                                    std::to_string(vartheta));
    const DecoherenceFactor a1 = alpha(t, env1);
    const DecoherenceFactor a2 = alpha(t, env2);
    return {t, a1, a2, Density4(channel_elements(a1.alpha, a2.alpha, vartheta))};
}

}  // namespace tqsim

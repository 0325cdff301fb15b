#pragma once

#include <cmath>
#include <stdexcept>

#include "tqsim/channel.hpp"
#include "tqsim/qmatrix.hpp"

namespace tqsim {

inline const std::array<Mat2, 4>& pauli() {
    static const std::array<Mat2, 4> s = [] {
        std::array<Mat2, 4> p;
        p[0] = Mat2::identity();
        p[1](0, 1) = 1.0;
        p[1](1, 0) = 1.0;
        p[2](0, 1) = cplx(0.0, -1.0);
        p[2](1, 0) = cplx(0.0, 1.0);
        p[3](0, 0) = 1.0;
        p[3](1, 1) = -1.0;
        return p;
    }();
    return s;
}

// Bell projectors B_i = (s0 (x) s_i) B0 (s0 (x) s_i), B0 = |Phi+><Phi+|.
inline const std::array<Mat4, 4>& bell_states() {
    static const std::array<Mat4, 4> b = [] {
        const double r = 1.0 / std::sqrt(2.0);
        const Mat4 b0 = projector<4>({r, 0.0, 0.0, r});
        std::array<Mat4, 4> out;
        for (int i = 0; i < 4; ++i) {
            const Mat4 u = tensor(pauli()[0], pauli()[i]);
            out[i] = u * b0 * u;
        }
        return out;
    }();
    return b;
}

inline Vec4 input_state_vec(double theta, double phi) {
    const cplx ephi = std::polar(1.0, phi);
    return {0.0, ephi * std::sin(0.5 * theta), std::cos(0.5 * theta), 0.0};
}

inline Density4 input_state(const PureStateParams& p) {
    p.check();
    return Density4(projector<4>(input_state_vec(p.theta, p.phi)));
}

// Bell overlaps q_i = Tr(B_i rho); a probability vector for any state.
inline std::array<double, 4> bell_overlaps(const Density4& rho) {
    std::array<double, 4> q{};
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        q[i] = (bell_states()[i] * rho.mat()).trace().real();
        if (q[i] < 0.0 && q[i] > -1e-12) q[i] = 0.0;
        sum += q[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::runtime_error("bell_overlaps: overlaps sum to " + std::to_string(sum));
    return q;
}

// Two-qubit protocol as a channel on rho_in: both input qubits are teleported
// through independent Bell measurements against the same resource state.
inline Density4 teleport_generic(const Density4& rho_in, const Density4& rho_res) {
    const std::array<double, 4> q = bell_overlaps(rho_res);
    Mat4 out;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double p = q[i] * q[j];
            if (p == 0.0) continue;
            const Mat4 u = tensor(pauli()[i], pauli()[j]);
            out = out + p * (u * rho_in.mat() * u);
        }
    }
    return Density4(out);
}

// Output-state closed form at effective alpha = alpha1 * alpha2.
inline Mat4 teleport_closed_elements(double alpha, const PureStateParams& p) {
    detail::check_alpha_range(alpha, "teleport_closed_elements");
    p.check();
    const double a2 = alpha * alpha, a4 = a2 * a2;
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    const double sv = std::sin(p.vartheta);
    Mat4 m;
    m(0, 0) = 0.25 * (1.0 - a4);
    m(3, 3) = 0.25 * (1.0 - a4);
    m(1, 1) = 0.25 * (1.0 - 2.0 * a2 * ct + a4);
    m(2, 2) = 0.25 * (1.0 + 2.0 * a2 * ct + a4);
    m(1, 2) = 0.5 * a2 * st * sv * sv * std::polar(1.0, p.phi);
    m(2, 1) = std::conj(m(1, 2));
    return m;
}

// Input-sphere average of the pointwise fidelity.
inline double average_fidelity(double alpha, double vartheta) {
    detail::check_alpha_range(alpha, "average_fidelity");
    const double a2 = alpha * alpha, a4 = a2 * a2;
    return (1.0 / 12.0) * (-2.0 * a2 * std::cos(2.0 * vartheta) + 3.0 * a4 + 4.0 * a2 + 3.0);
}

struct TeleportResult {
    Density4 rho_out;
    double fidelity_pointwise;
    double f_avg;
    double alpha_eff;
};

inline TeleportResult teleport_closed(double alpha, const PureStateParams& p) {
    Density4 out(teleport_closed_elements(alpha, p));
    const double f = fidelity(out, input_state(p));
    return {out, f, average_fidelity(alpha, p.vartheta), alpha};
}

}  // namespace tqsim

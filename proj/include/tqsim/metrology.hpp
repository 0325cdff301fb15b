#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tqsim/qmatrix.hpp"
#include "tqsim/specfun.hpp"
#include "tqsim/teleport.hpp"

namespace tqsim {

// Basis reorder sending the output X state to diag(1x1, 1x1, 2x2) block form.
inline constexpr std::array<int, 4> kSldBasisOrder{0, 3, 1, 2};

template <int N>
Matrix<N> permute_basis(const Matrix<N>& m, const std::array<int, N>& order) {
    Matrix<N> out;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out(i, j) = m(order[i], order[j]);
    return out;
}

template <int N>
Matrix<N> unpermute_basis(const Matrix<N>& m, const std::array<int, N>& order) {
    Matrix<N> out;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out(order[i], order[j]) = m(i, j);
    return out;
}

namespace detail {

// Connected components of the shared sparsity pattern, each a 1x1 or 2x2 block.
template <int N>
std::vector<std::vector<int>> diagonal_blocks(const Matrix<N>& a, const Matrix<N>& b,
                                              double tol = 1e-12) {
    std::array<int, N> comp;
    comp.fill(-1);
    std::vector<std::vector<int>> blocks;
    for (int i = 0; i < N; ++i) {
        if (comp[i] >= 0) continue;
        std::vector<int> members{i};
        comp[i] = int(blocks.size());
        for (size_t scan = 0; scan < members.size(); ++scan) {
            const int r = members[scan];
            for (int j = 0; j < N; ++j) {
                if (j == r || comp[j] >= 0) continue;
                if (std::abs(a(r, j)) > tol || std::abs(b(r, j)) > tol) {
                    comp[j] = comp[i];
                    members.push_back(j);
                }
            }
        }
        blocks.push_back(std::move(members));
    }
    return blocks;
}

}  // namespace detail

// Symmetric logarithmic derivative of a block-diagonal state, per invariant
// block: L_i = (1/mu_i) [ drho_i + xi_i rho_i^{-1} - dmu_i ], mu_i = tr(rho_i)/2,
// xi_i = 2 mu_i dmu_i - dP_i/4, P_i = tr(rho_i^2); xi_i = 0 on singular blocks.
template <int N>
Matrix<N> sld_block_diagonal(const Matrix<N>& rho, const Matrix<N>& drho) {
    if (!is_hermitian(rho) || !is_hermitian(drho))
        throw std::invalid_argument("sld_block_diagonal: inputs must be Hermitian");
    Matrix<N> L;
    for (const auto& blk : detail::diagonal_blocks(rho, drho)) {
        if (blk.size() == 1) {
            const int i = blk[0];
            const double r = rho(i, i).real();
            const double dr = drho(i, i).real();
            if (r < 1e-14) {
                if (std::abs(dr) > 1e-12)
                    throw std::domain_error(
                        "sld_block_diagonal: singular 1x1 block with nonvanishing derivative");
                L(i, i) = 0.0;
            } else {
                L(i, i) = dr / r;
            }
            continue;
        }
        if (blk.size() != 2)
            throw std::invalid_argument(
                "sld_block_diagonal: matrix is not block diagonal in 1x1/2x2 blocks");
        const int i = blk[0], j = blk[1];
        const cplx r00 = rho(i, i), r01 = rho(i, j), r10 = rho(j, i), r11 = rho(j, j);
        const cplx d00 = drho(i, i), d01 = drho(i, j), d10 = drho(j, i), d11 = drho(j, j);
        const double mu = 0.5 * (r00 + r11).real();
        const double dmu = 0.5 * (d00 + d11).real();
        if (std::abs(mu) < 1e-14)
            throw std::domain_error("sld_block_diagonal: trace-free 2x2 block");
        const double dP = 2.0 * (r00 * d00 + r01 * d10 + r10 * d01 + r11 * d11).real();
        double xi = 2.0 * mu * dmu - 0.25 * dP;
        const double det = (r00 * r11 - r01 * r10).real();
        cplx inv00 = 0.0, inv01 = 0.0, inv10 = 0.0, inv11 = 0.0;
        if (std::abs(det) < 1e-14) {
            if (std::abs(xi) > 1e-12)
                throw std::domain_error(
                    "sld_block_diagonal: singular 2x2 block with nonvanishing xi");
            xi = 0.0;
        } else {
            inv00 = r11 / det;
            inv11 = r00 / det;
            inv01 = -r01 / det;
            inv10 = -r10 / det;
        }
        L(i, i) = (d00 + xi * inv00 - dmu) / mu;
        L(i, j) = (d01 + xi * inv01) / mu;
        L(j, i) = (d10 + xi * inv10) / mu;
        L(j, j) = (d11 + xi * inv11 - dmu) / mu;
    }
    return L;
}

struct PovmProbs {
    std::array<double, 4> p{};
    double eta = 0.0;
};

// Outcome probabilities of the SLD eigenbasis measurement.
inline PovmProbs optimal_povm_probs(double alpha, const PureStateParams& prm) {
    detail::check_alpha_range(alpha, "optimal_povm_probs");
    prm.check();
    const double st = std::sin(prm.theta);
    if (std::abs(st) < 1e-12)
        throw std::domain_error("optimal_povm_probs: eta singular at sin(theta) = 0");
    const double cv = std::cos(prm.vartheta);
    PovmProbs out;
    out.eta = std::sqrt(4.0 / (st * st) + 2.0 * (std::cos(2.0 * prm.vartheta) - 3.0) * cv * cv);
    const double a2 = alpha * alpha, a4 = a2 * a2;
    const double u = a2 * out.eta * st;
    out.p = {0.25 * (u + a4 + 1.0), 0.25 * (-u + a4 + 1.0), 0.25 * (1.0 - a4),
             0.25 * (1.0 - a4)};
    double sum = 0.0;
    for (double& p : out.p) {
        if (p < 0.0 && p > -1e-12) p = 0.0;
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::runtime_error("optimal_povm_probs: probabilities sum to " + std::to_string(sum));
    return out;
}

// Classical Fisher information of the outcome distribution; the probabilities
// depend on B1 only through alpha, so the derivative is a chain rule.
inline double fi_from_probs(double alpha, double dalpha_dB1, const PureStateParams& prm) {
    const PovmProbs pv = optimal_povm_probs(alpha, prm);
    const double u = pv.eta * std::sin(prm.theta);
    const double a2 = alpha * alpha, a3 = a2 * alpha;
    const std::array<double, 4> dp_dalpha = {0.5 * alpha * (u + 2.0 * a2),
                                             0.5 * alpha * (-u + 2.0 * a2), -a3, -a3};
    double fi = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double dp = dp_dalpha[i] * dalpha_dB1;
        if (pv.p[i] < 1e-14) {
            if (std::abs(dp) > 1e-10)
                throw std::domain_error(
                    "fi_from_probs: vanishing probability with nonvanishing derivative");
            continue;
        }
        fi += dp * dp / pv.p[i];
    }
    return fi;
}

struct EstimationReport {
    double qfi = 0.0;
    double fi_optimal_povm = 0.0;
    Mat4 sld;
    std::array<double, 4> probs{};
    double eta = 0.0;
    double alpha_eff = 1.0;
    double dalpha_dB1 = 0.0;
    bool singular_continuity = false;  // alpha = 1 boundary, values are continuity limits
};

// d(output state)/d(alpha), elementwise on the closed form.
inline Mat4 teleport_output_dalpha(double alpha, const PureStateParams& p) {
    const double a3 = alpha * alpha * alpha;
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    const double sv = std::sin(p.vartheta);
    Mat4 m;
    m(0, 0) = -a3;
    m(3, 3) = -a3;
    m(1, 1) = a3 - alpha * ct;
    m(2, 2) = a3 + alpha * ct;
    m(1, 2) = alpha * st * sv * sv * std::polar(1.0, p.phi);
    m(2, 1) = std::conj(m(1, 2));
    return m;
}

// Quantum Fisher information for the field on qubit 1, via Tr[drho L] with the
// block SLD, cross-checked against the block-eigenvalue closed form
//   F_alpha = 8 a^6/(1-a^4) + (a^3+a g)^2/l+ + (a^3-a g)^2/l-,
//   g = sqrt(cos^2 th + sin^2 th sin^4 vt), l+- = (1+a^4)/4 +- a^2 g / 2,
// which reduces to 8 a^2/(1-a^4) at vartheta = pi/2 where g = 1.
inline EstimationReport qfi_b1(double t, const EnvironmentParams& env1,
                               const EnvironmentParams& env2, const PureStateParams& prm) {
    prm.check();
    const DecoherenceFactor a1 = alpha(t, env1);
    const DecoherenceFactor a2f = alpha(t, env2);
    const double a = a1.alpha * a2f.alpha;
    const double da = a2f.alpha * a1.dalpha_dB;

    EstimationReport rep;
    rep.alpha_eff = a;
    rep.dalpha_dB1 = da;
    const PovmProbs pv = optimal_povm_probs(a, prm);
    rep.probs = pv.p;
    rep.eta = pv.eta;

    if (a >= 1.0 - 1e-15) {
        if (std::abs(da) > 1e-12)
            throw std::domain_error("qfi_b1: degenerate point alpha = 1 with nonzero derivative");
        rep.singular_continuity = true;  // QFI -> 0 as t -> 0 or B1 -> 0
        return rep;
    }

    const double ct = std::cos(prm.theta), st = std::sin(prm.theta);
    const double sv = std::sin(prm.vartheta);
    const double g = std::sqrt(ct * ct + st * st * sv * sv * sv * sv);
    const double aa = a * a, a3 = aa * a, a4 = aa * aa, a6 = a4 * aa;
    const double lp = 0.25 * (1.0 + a4) + 0.5 * aa * g;
    const double lm = 0.25 * (1.0 + a4) - 0.5 * aa * g;
    const double falpha = 8.0 * a6 / (1.0 - a4) + (a3 + a * g) * (a3 + a * g) / lp +
                          (a3 - a * g) * (a3 - a * g) / lm;
    const double qfi_closed = falpha * da * da;

    const Mat4 rho = teleport_closed_elements(a, prm);
    const Mat4 drho = teleport_output_dalpha(a, prm) * cplx(da, 0.0);
    const Mat4 lperm = sld_block_diagonal<4>(permute_basis<4>(rho, kSldBasisOrder),
                                             permute_basis<4>(drho, kSldBasisOrder));
    rep.sld = unpermute_basis<4>(lperm, kSldBasisOrder);
    rep.qfi = (drho * rep.sld).trace().real();
    if (std::abs(rep.qfi - qfi_closed) > 1e-8 * std::max(std::abs(qfi_closed), 1e-12))
        throw std::runtime_error("qfi_b1: SLD route disagrees with the closed form");

    rep.fi_optimal_povm = fi_from_probs(a, da, prm);
    return rep;
}

}  // namespace tqsim

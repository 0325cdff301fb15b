#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tqsim {

using cplx = std::complex<double>;

// Angles describing the pure input state cos(theta/2)|10> + e^{i phi} sin(theta/2)|01>
// and the resource preparation cos(vartheta/2)|00> + sin(vartheta/2)|11>.
struct PureStateParams {
    double theta = std::numbers::pi / 2;     // polar angle, [0, pi]
    double phi = 0.0;                        // azimuth, [0, 2 pi)
    double vartheta = std::numbers::pi / 2;  // resource preparation angle, [0, pi]

    void check() const {
        if (!(theta >= 0.0 && theta <= std::numbers::pi))
            throw std::invalid_argument("PureStateParams: theta outside [0, pi]: " +
                                        std::to_string(theta));
        if (!(phi >= 0.0 && phi < 2.0 * std::numbers::pi))
            throw std::invalid_argument("PureStateParams: phi outside [0, 2 pi): " +
                                        std::to_string(phi));
        if (!(vartheta >= 0.0 && vartheta <= std::numbers::pi))
            throw std::invalid_argument("PureStateParams: vartheta outside [0, pi]: " +
                                        std::to_string(vartheta));
    }
};

template <int N>
struct Matrix {
    static_assert(N >= 2);
    std::array<cplx, N * N> e{};

    cplx& operator()(int i, int j) { return e[i * N + j]; }
    const cplx& operator()(int i, int j) const { return e[i * N + j]; }

    static Matrix identity() {
        Matrix m;
        for (int i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    Matrix adjoint() const {
        Matrix m;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) m(i, j) = std::conj((*this)(j, i));
        return m;
    }

    cplx trace() const {
        cplx t = 0.0;
        for (int i = 0; i < N; ++i) t += (*this)(i, i);
        return t;
    }

    Matrix operator+(const Matrix& o) const {
        Matrix m;
        for (int i = 0; i < N * N; ++i) m.e[i] = e[i] + o.e[i];
        return m;
    }
    Matrix operator-(const Matrix& o) const {
        Matrix m;
        for (int i = 0; i < N * N; ++i) m.e[i] = e[i] - o.e[i];
        return m;
    }
    Matrix operator*(const Matrix& o) const {
        Matrix m;
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) {
                const cplx a = (*this)(i, k);
                if (a == 0.0) continue;
                for (int j = 0; j < N; ++j) m(i, j) += a * o(k, j);
            }
        return m;
    }
    Matrix operator*(cplx s) const {
        Matrix m;
        for (int i = 0; i < N * N; ++i) m.e[i] = e[i] * s;
        return m;
    }
};

template <int N>
Matrix<N> operator*(cplx s, const Matrix<N>& m) {
    return m * s;
}

using Mat2 = Matrix<2>;
using Mat4 = Matrix<4>;
using Vec2 = std::array<cplx, 2>;
using Vec4 = std::array<cplx, 4>;

template <int N>
double max_abs(const Matrix<N>& m) {
    double v = 0.0;
    for (const auto& x : m.e) v = std::max(v, std::abs(x));
    return v;
}

template <int N>
double frobenius(const Matrix<N>& m) {
    double s = 0.0;
    for (const auto& x : m.e) s += std::norm(x);
    return std::sqrt(s);
}

template <int N>
Matrix<N> projector(const std::array<cplx, N>& v) {
    Matrix<N> m;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
}

// Kronecker product in basis order |00>,|01>,|10>,|11> (first factor = qubit A).
inline Mat4 tensor(const Mat2& a, const Mat2& b) {
    Mat4 m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
    return m;
}

template <int N>
bool is_hermitian(const Matrix<N>& m, double tol = 1e-12) {
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
            if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) return false;
    return true;
}

template <int N>
struct EigSystem {
    std::array<double, N> values{};  // descending
    Matrix<N> vectors;               // orthonormal columns, m * v_k = values[k] * v_k
};

namespace detail {

// Cyclic complex Jacobi rotations. Dimensions here are 2 and 4, so an iterative
// two-sided scheme converges in a handful of sweeps and stays deterministic.
template <int N>
EigSystem<N> jacobi_eig(Matrix<N> a) {
    Matrix<N> v = Matrix<N>::identity();
    const double scale = std::max(1.0, frobenius(a));
    bool converged = false;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) < 1e-14 * scale) {
            converged = true;
            break;
        }
        for (int p = 0; p < N - 1; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag < 1e-300) continue;
                const cplx phase = apq / mag;
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
                const double c = 1.0 / std::hypot(1.0, t);
                const cplx s = t * c * phase;
                for (int k = 0; k < N; ++k) {  // columns (right factor)
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - std::conj(s) * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {  // rows (left factor, adjoint)
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = std::conj(s) * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (int k = 0; k < N; ++k) {
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - std::conj(s) * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) >= 1e-12 * scale)
            throw std::runtime_error("jacobi_eig: rotation sweeps failed to converge");
    }

    std::array<int, N> order{};
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });
    EigSystem<N> out;
    for (int k = 0; k < N; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (int r = 0; r < N; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

}  // namespace detail

template <int N>
EigSystem<N> eig_hermitian(const Matrix<N>& m) {
    if (!is_hermitian(m))
        throw std::invalid_argument("eig_hermitian: matrix is not Hermitian within 1e-12");
    if constexpr (N == 2) {
        const double a = m(0, 0).real(), d = m(1, 1).real();
        const cplx c = m(0, 1);
        const double h = 0.5 * (a + d);
        const double r = std::hypot(0.5 * (a - d), std::abs(c));
        EigSystem<2> out;
        out.values = {h + r, h - r};
        if (std::abs(c) < 1e-15 * (std::abs(a) + std::abs(d) + 1.0)) {
            const bool flip = d > a;
            out.vectors(0, 0) = flip ? 0.0 : 1.0;
            out.vectors(1, 0) = flip ? 1.0 : 0.0;
            out.vectors(0, 1) = flip ? 1.0 : 0.0;
            out.vectors(1, 1) = flip ? 0.0 : 1.0;
            return out;
        }
        for (int k = 0; k < 2; ++k) {
            const cplx v0 = c;
            const cplx v1 = out.values[k] - a;
            const double n = std::sqrt(std::norm(v0) + std::norm(v1));
            out.vectors(0, k) = v0 / n;
            out.vectors(1, k) = v1 / n;
        }
        return out;
    } else {
        return detail::jacobi_eig(m);
    }
}

// Validated quantum state: Hermitian, unit trace, PSD up to numerical slack.
template <int N>
class DensityMatrix {
  public:
    explicit DensityMatrix(const Matrix<N>& m) : m_(m) { validate(); }
    const Matrix<N>& mat() const { return m_; }
    static constexpr int dim = N;

  private:
    Matrix<N> m_;

    void validate() const {
        if (!is_hermitian(m_))
            throw std::invalid_argument("DensityMatrix: not Hermitian within 1e-12");
        const double tr = m_.trace().real();
        if (std::abs(tr - 1.0) > 1e-12)
            throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                        std::to_string(tr - 1.0));
        const auto es = eig_hermitian(m_);
        if (es.values[N - 1] < -1e-10)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                        std::to_string(es.values[N - 1]));
    }
};

using Density2 = DensityMatrix<2>;
using Density4 = DensityMatrix<4>;

// <psi|rho|psi> for a rank-1 second argument; reduces to Tr(rho * P).
template <int N>
double fidelity(const DensityMatrix<N>& rho, const DensityMatrix<N>& pure) {
    const double purity = (pure.mat() * pure.mat()).trace().real();
    if (std::abs(purity - 1.0) > 1e-10)
        throw std::invalid_argument("fidelity: second argument has purity " +
                                    std::to_string(purity) + ", expected a rank-1 projector");
    const double f = (rho.mat() * pure.mat()).trace().real();
    return std::clamp(f, 0.0, 1.0);
}

template <int N>
double trace_distance(const DensityMatrix<N>& a, const DensityMatrix<N>& b) {
    const auto es = eig_hermitian(a.mat() - b.mat());
    double s = 0.0;
    for (double l : es.values) s += std::abs(l);
    return std::clamp(0.5 * s, 0.0, 1.0);
}

}  // namespace tqsim

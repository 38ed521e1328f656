// Copyright 2026 The rblab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

/// Single-qubit channels in the Pauli-Liouville (Pauli transfer matrix) picture.
///
/// Basis order is (I, X, Y, Z). Entry (i, j) is (1/2) tr(sigma_i Lambda(sigma_j)),
/// so row 0 of a trace-preserving channel is (1, 0, 0, 0) and channels compose by
/// ordinary matrix multiplication, later * earlier.
namespace rblab {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;

inline constexpr double kPi = 3.14159265358979323846;

/// Entrywise tolerance for treating two channels as equal.
inline constexpr double kChannelTolerance = 1e-9;

enum class Axis { I, X, Y, Z };

inline char axis_char(Axis a) {
    switch (a) {
        case Axis::I: return 'I';
        case Axis::X: return 'X';
        case Axis::Y: return 'Y';
        case Axis::Z: return 'Z';
    }
    return '?';
}

inline const std::array<Matrix2c, 4> &pauli_matrices() {
    static const std::array<Matrix2c, 4> paulis = [] {
        std::array<Matrix2c, 4> p;
        const Complex i(0, 1);
        p[0] << 1, 0, 0, 1;
        p[1] << 0, 1, 1, 0;
        p[2] << 0, -i, i, 0;
        p[3] << 1, 0, 0, -1;
        return p;
    }();
    return paulis;
}

class Unitary2 {
   public:
    Unitary2() : m_(Matrix2c::Identity()) {}

    /// Throws std::invalid_argument unless U^dagger U = I to within `tolerance`.
    explicit Unitary2(const Matrix2c &m, double tolerance = 1e-8) : m_(m) {
        double dev = (m.adjoint() * m - Matrix2c::Identity()).cwiseAbs().maxCoeff();
        if (!(dev <= tolerance)) {
            throw std::invalid_argument("matrix is not unitary (deviation " + std::to_string(dev) + ")");
        }
    }

    const Matrix2c &matrix() const { return m_; }

    friend Unitary2 operator*(const Unitary2 &a, const Unitary2 &b) {
        Unitary2 r;
        r.m_ = a.m_ * b.m_;
        return r;
    }

   private:
    Matrix2c m_;
};

class Ptm {
   public:
    Ptm() : m_(Matrix4::Identity()) {}
    explicit Ptm(const Matrix4 &m) : m_(m) {}

    static Ptm identity() { return Ptm(); }
    static Ptm diagonal(double x, double y, double z) { return Ptm(Vector4(1, x, y, z).asDiagonal().toDenseMatrix()); }
    static Ptm depolarizing(double p) { return diagonal(p, p, p); }
    /// diag(1, alpha, alpha, 1).
    static Ptm dephasing(double alpha) { return diagonal(alpha, alpha, 1); }

    const Matrix4 &matrix() const { return m_; }
    double operator()(int row, int col) const { return m_(row, col); }

    /// Diagonal entries of the unital block, (x, y, z) = (L22, L33, L44) in one-based notation.
    Eigen::Vector3d unital_diagonal() const { return m_.diagonal().tail<3>(); }

    bool is_trace_preserving(double tolerance = 1e-12) const {
        return std::abs(m_(0, 0) - 1) <= tolerance && m_.row(0).tail<3>().cwiseAbs().maxCoeff() <= tolerance;
    }

    bool approx_equal(const Ptm &other, double tolerance = kChannelTolerance) const {
        return (m_ - other.m_).cwiseAbs().maxCoeff() <= tolerance;
    }

    double max_abs_diff(const Ptm &other) const { return (m_ - other.m_).cwiseAbs().maxCoeff(); }

    Ptm transpose() const { return Ptm(m_.transpose()); }

    friend Ptm operator*(const Ptm &later, const Ptm &earlier) { return Ptm(later.m_ * earlier.m_); }
    friend Ptm operator+(const Ptm &a, const Ptm &b) { return Ptm(a.m_ + b.m_); }
    friend Ptm operator*(double s, const Ptm &a) { return Ptm(s * a.m_); }

   private:
    Matrix4 m_;
};

/// Bloch-vector form of a density matrix: (tr rho, tr X rho, tr Y rho, tr Z rho).
struct State {
    Vector4 bloch{1, 0, 0, 1};

    static State ground() { return State{}; }
    static State excited() { return State{Vector4(1, 0, 0, -1)}; }

    /// tr(Q rho) for an operator Q given in the same coordinates.
    double expectation(const State &effect) const { return 0.5 * bloch.dot(effect.bloch); }
};

inline State apply(const Ptm &channel, const State &s) { return State{channel.matrix() * s.bloch}; }

/// exp(-i angle/2 sigma_axis), evaluated in closed form.
inline Unitary2 pulse_unitary(Axis axis, double angle) {
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("pulse angle must be finite");
    }
    if (axis == Axis::I) {
        return Unitary2();
    }
    const auto &sigma = pauli_matrices()[static_cast<int>(axis)];
    Matrix2c m = std::cos(angle / 2) * Matrix2c::Identity() - Complex(0, std::sin(angle / 2)) * sigma;
    return Unitary2(m);
}

inline Ptm ptm_from_unitary(const Unitary2 &u) {
    const auto &sigma = pauli_matrices();
    const Matrix2c &um = u.matrix();
    Matrix4 r;
    for (int j = 0; j < 4; ++j) {
        Matrix2c image = um * sigma[j] * um.adjoint();
        for (int i = 0; i < 4; ++i) {
            r(i, j) = 0.5 * (sigma[i] * image).trace().real();
        }
    }
    return Ptm(r);
}

inline Ptm pulse_ptm(Axis axis, double angle) { return ptm_from_unitary(pulse_unitary(axis, angle)); }

/// `earlier` is applied first.
inline Ptm compose(const Ptm &later, const Ptm &earlier) { return later * earlier; }

/// Average infidelity to the identity: 1/2 - (L22 + L33 + L44)/6.
inline double infidelity(const Ptm &channel) { return 0.5 - channel.unital_diagonal().sum() / 6.0; }

/// Depolarizing parameter of the channel's 2-design twirl, (L22 + L33 + L44)/3.
inline double depolarizing_parameter(const Ptm &channel) { return channel.unital_diagonal().sum() / 3.0; }

}  // namespace rblab

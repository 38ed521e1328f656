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

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rblab/gatesets.hpp"

namespace rblab {

class ConvergenceError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// (1/|G|) sum_G G^-1 L G.
inline Ptm twirl(const Ptm &channel, std::span<const GateLabel> gates) {
    const auto &group = CliffordGroup::instance();
    Matrix4 sum = Matrix4::Zero();
    for (GateLabel g : gates) {
        sum += (group.ptm(group.inv(g)) * channel * group.ptm(g)).matrix();
    }
    return Ptm(sum / static_cast<double>(gates.size()));
}

inline Ptm twirl(const Ptm &channel, Gateset gateset) {
    auto labels = gateset_labels(gateset);
    return twirl(channel, labels);
}

/// Diagonal decay triple (x_m, y_m, z_m) of the averaged NIST sequence.
struct RecursionState {
    int length = 0;
    Eigen::Vector3d xyz{1, 1, 1};
};

/// M = (1/2) [[x, 0, z], [0, y, z], [x, y, 0]], the one-step map of the NIST decay triple.
struct RecursionMatrix {
    double x = 1, y = 1, z = 1;
    Eigen::Matrix3d m;

    RecursionState step(const RecursionState &s) const { return {s.length + 1, m * s.xyz}; }

    RecursionState state(int length) const {
        RecursionState s;
        for (int k = 0; k < length; ++k) {
            s = step(s);
        }
        return s;
    }

    /// Coefficients of lambda^3 + c2 lambda^2 + c1 lambda + c0.
    std::array<double, 3> characteristic() const {
        const double a = x / 2, b = y / 2, c = z / 2;
        return {2 * a * b * c, a * b - b * c - a * c, -(a + b)};
    }
};

inline RecursionMatrix recursion_matrix(double x, double y, double z) {
    if (std::abs(x) > 1 + 1e-12 || std::abs(y) > 1 + 1e-12 || std::abs(z) > 1 + 1e-12) {
        throw std::invalid_argument("recursion matrix needs |x|, |y|, |z| <= 1");
    }
    RecursionMatrix r{x, y, z, Eigen::Matrix3d::Zero()};
    r.m << x, 0, z, 0, y, z, x, y, 0;
    r.m *= 0.5;
    return r;
}

/// diag(1, x_m, y_m, z_m): the sequence-averaged NIST core sequence under a channel with
/// Pauli-twirled diagonal (x, y, z).
inline Ptm nist_average_sequence(double x, double y, double z, int length) {
    auto s = recursion_matrix(x, y, z).state(length);
    return Ptm::diagonal(s.xyz(0), s.xyz(1), s.xyz(2));
}

/// Roots of t^3 + c2 t^2 + c1 t + c0, sorted by real part (descending), then imaginary part.
inline std::array<Complex, 3> solve_cubic(double c0, double c1, double c2) {
    const double shift = c2 / 3;
    const double p = c1 - c2 * c2 / 3;
    const double q = 2 * c2 * c2 * c2 / 27 - c2 * c1 / 3 + c0;
    std::array<Complex, 3> roots;
    const double disc = -(4 * p * p * p + 27 * q * q);
    if (p < 0 && disc >= 0) {
        const double r = 2 * std::sqrt(-p / 3);
        const double arg = std::clamp(3 * q / (p * r), -1.0, 1.0);
        const double phi = std::acos(arg) / 3;
        for (int k = 0; k < 3; ++k) {
            roots[k] = r * std::cos(phi - 2 * kPi * k / 3) - shift;
        }
    } else {
        const double s = std::sqrt(q * q / 4 + p * p * p / 27);
        const double u = std::cbrt(-q / 2 + s), v = std::cbrt(-q / 2 - s);
        const double re = -(u + v) / 2 - shift, im = std::sqrt(3.0) / 2 * (u - v);
        roots = {Complex(u + v - shift, 0), Complex(re, im), Complex(re, -im)};
    }
    // Newton polish of real roots.
    for (auto &root : roots) {
        if (root.imag() != 0) {
            continue;
        }
        double t = root.real();
        for (int it = 0; it < 3; ++it) {
            double f = ((t + c2) * t + c1) * t + c0;
            double df = (3 * t + 2 * c2) * t + c1;
            if (df == 0) {
                break;
            }
            t -= f / df;
        }
        root = t;
    }
    std::sort(roots.begin(), roots.end(), [](const Complex &a, const Complex &b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    return roots;
}

inline std::array<Complex, 3> recursion_spectrum(const RecursionMatrix &r) {
    auto c = r.characteristic();
    return solve_cubic(c[0], c[1], c[2]);
}

struct NistDecay {
    double p_nist = 1;                    ///< exact dominant eigenvalue of M
    std::array<Complex, 2> subleading{};  ///< the two remaining eigenvalues (near +1/2 and -1/2)
    double p_clifford = 1;                ///< (x + y + z)/3
    std::array<double, 3> perturbative{}; ///< (x+y+z)/3, (x+y)/4, -(x+y+4z)/12
    bool outside_perturbative_regime = false;
};

inline NistDecay nist_decay_parameter(double x, double y, double z) {
    auto spec = recursion_spectrum(recursion_matrix(x, y, z));
    // Perron root: M is entrywise nonnegative in the regime of interest.
    int dominant = 0;
    for (int k = 1; k < 3; ++k) {
        if (std::abs(spec[k]) > std::abs(spec[dominant])) {
            dominant = k;
        }
    }
    if (std::abs(spec[dominant].imag()) > 1e-12) {
        throw std::domain_error("recursion matrix has no real dominant eigenvalue");
    }
    NistDecay out;
    out.p_nist = spec[dominant].real();
    int j = 0;
    for (int k = 0; k < 3; ++k) {
        if (k != dominant) {
            out.subleading[j++] = spec[k];
        }
    }
    out.p_clifford = (x + y + z) / 3;
    out.perturbative = {(x + y + z) / 3, (x + y) / 4, -(x + y + 4 * z) / 12};
    out.outside_perturbative_regime = std::abs(1 - out.p_nist) > 0.2;
    return out;
}

/// Eigen-decomposition of the recursion: M^m (1,1,1) = sum_k lambda_k^m v_k.
struct RecursionMode {
    Complex eigenvalue;
    Eigen::Vector3cd amplitude;
};

inline std::vector<RecursionMode> recursion_modes(const RecursionMatrix &r) {
    Eigen::EigenSolver<Eigen::Matrix3d> es(r.m);
    Eigen::Matrix3cd vecs = es.eigenvectors();
    Eigen::Vector3cd coeff = vecs.lu().solve(Eigen::Vector3cd::Ones());
    std::vector<RecursionMode> out;
    for (int k = 0; k < 3; ++k) {
        out.push_back({es.eigenvalues()(k), vecs.col(k) * coeff(k)});
    }
    std::sort(out.begin(), out.end(), [](const RecursionMode &a, const RecursionMode &b) {
        return std::abs(a.eigenvalue) > std::abs(b.eigenvalue);
    });
    return out;
}

using Superop = Eigen::Matrix<double, 16, 16>;
using NoisyImplementation = std::function<Ptm(GateLabel)>;

/// (1/|G|) sum_G G (x) G~, ideal factor first.
inline Superop averaged_superop(std::span<const GateLabel> gates, const NoisyImplementation &noisy) {
    const auto &group = CliffordGroup::instance();
    Superop sum = Superop::Zero();
    for (GateLabel g : gates) {
        const Matrix4 &a = group.ptm(g).matrix();
        const Matrix4 b = noisy(g).matrix();
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                sum.block<4, 4>(4 * i, 4 * j) += a(i, j) * b;
            }
        }
    }
    return sum / static_cast<double>(gates.size());
}

/// Eigenvalues sorted by real part (descending), then imaginary part (descending).
inline std::vector<Complex> spectrum(const Eigen::MatrixXd &m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](const Complex &a, const Complex &b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    return ev;
}

/// Eigenvalues with modulus above `threshold`.
inline std::vector<Complex> nonzero_spectrum(const Eigen::MatrixXd &m, double threshold = 1e-8) {
    std::vector<Complex> out;
    for (const Complex &c : spectrum(m)) {
        if (std::abs(c) > threshold) {
            out.push_back(c);
        }
    }
    return out;
}

/// The decay eigenvalue: the largest eigenvalue after the trace-preservation eigenvalue 1.
inline double decay_eigenvalue(const Superop &s) { return spectrum(s).at(1).real(); }

struct LAnalysis {
    Matrix4 L = Matrix4::Zero();
    Eigen::Vector3d singular_values = Eigen::Vector3d::Zero();
    double singular_spread = 1;
    int iterations = 0;
    int prescribed_length = 0;
};

/// Minimum sequence length after which the rescaled average is trusted, -2 log2(r),
/// floored at 8 so that nearly noiseless channels still get a few iterations.
inline int prescribed_length(double infidelity) {
    if (infidelity <= 0) {
        return 8;
    }
    return std::max(8, static_cast<int>(std::ceil(-2 * std::log(infidelity) / std::log(2.0))));
}

/// Iterates L <- p^-1 E[G~ L G^-1] from the traceless projector until the normalised
/// iterate changes by less than 1e-12 and at least the prescribed length has been reached.
inline LAnalysis compute_L(std::span<const GateLabel> gates, const NoisyImplementation &noisy, double p_nist) {
    if (!(p_nist > 0 && p_nist <= 1 + 1e-12)) {
        throw std::invalid_argument("decay parameter must lie in (0, 1]");
    }
    const auto &group = CliffordGroup::instance();
    std::vector<Matrix4> ideal_inv, noisy_ptm;
    for (GateLabel g : gates) {
        ideal_inv.push_back(group.ptm(group.inv(g)).matrix());
        noisy_ptm.push_back(noisy(g).matrix());
    }
    const double weight = 1.0 / (static_cast<double>(gates.size()) * p_nist);

    LAnalysis out;
    out.prescribed_length = prescribed_length((1 - p_nist) / 2);
    const int max_iterations = 10 * out.prescribed_length;
    Matrix4 l = Vector4(0, 1, 1, 1).asDiagonal().toDenseMatrix();
    bool converged = false;
    for (int it = 1; it <= max_iterations; ++it) {
        Matrix4 next = Matrix4::Zero();
        for (size_t k = 0; k < ideal_inv.size(); ++k) {
            next += noisy_ptm[k] * l * ideal_inv[k];
        }
        next *= weight;
        next.row(0).setZero();
        next.col(0).setZero();
        double change = (next / next.norm() - l / l.norm()).norm();
        l = next;
        out.iterations = it;
        if (change < 1e-12 && it >= out.prescribed_length) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError("L iteration did not converge within " + std::to_string(max_iterations) + " steps");
    }
    out.L = l;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(l.bottomRightCorner<3, 3>());
    out.singular_values = svd.singularValues();
    double smin = 0;
    for (int k = 2; k >= 0; --k) {
        if (out.singular_values(k) > 1e-12 * out.singular_values(0)) {
            smin = out.singular_values(k);
            break;
        }
    }
    out.singular_spread = out.singular_values(0) / smin;
    return out;
}

}  // namespace rblab

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

#include "rblab/ptm.hpp"

#include "gtest/gtest.h"

#include "rblab/gatesets.hpp"
#include "test_util.hpp"

using namespace rblab;
using rblab::testing::M2;

namespace {

M2 to_raw(const Unitary2 &u) {
    M2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = u.matrix()(i, j);
    return r;
}

void expect_close(const Matrix4 &a, const Matrix4 &b, double tol) {
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "\n" << a << "\nvs\n" << b;
}

}  // namespace

TEST(pulse_unitary, zero_rotation_is_identity) {
    EXPECT_LE((pulse_unitary(Axis::X, 0).matrix() - Matrix2c::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(pulse_unitary, z_pi_is_diagonal) {
    Matrix2c expected;
    expected << Complex(0, -1), 0, 0, Complex(0, 1);
    EXPECT_LE((pulse_unitary(Axis::Z, kPi).matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(pulse_unitary, matches_matrix_exponential) {
    // exp(-i theta/2 sigma) by Taylor series.
    for (int axis = 1; axis <= 3; ++axis) {
        for (double angle : {kPi / 2, -kPi / 2, kPi, 0.1, 1.7}) {
            M2 gen = rblab::testing::raw_paulis()[axis];
            for (auto &row : gen)
                for (auto &x : row) x *= Complex(0, -angle / 2);
            M2 oracle = rblab::testing::expm_taylor(gen);
            Unitary2 u = pulse_unitary(static_cast<Axis>(axis), angle);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(u.matrix()(i, j) - oracle[i][j]), 0, 1e-14);
        }
    }
    const double s = 1 / std::sqrt(2.0);
    Matrix2c x90;
    x90 << s, Complex(0, -s), Complex(0, -s), s;
    EXPECT_LE((pulse_unitary(Axis::X, kPi / 2).matrix() - x90).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(pulse_unitary, rejects_non_finite_angle) {
    EXPECT_THROW(pulse_unitary(Axis::X, std::nan("")), std::invalid_argument);
}

TEST(ptm_from_unitary, identity_and_x_pi) {
    expect_close(ptm_from_unitary(Unitary2()).matrix(), Matrix4::Identity(), 1e-15);
    expect_close(pulse_ptm(Axis::X, kPi).matrix(), Vector4(1, 1, -1, -1).asDiagonal().toDenseMatrix(), 1e-15);
}

TEST(ptm_from_unitary, x90_matches_conjugation_oracle) {
    // Conjugating the basis by X90: X -> X, Y -> Z, Z -> -Y.
    Matrix4 expected;
    expected << 1, 0, 0, 0,  //
        0, 1, 0, 0,          //
        0, 0, 0, -1,         //
        0, 0, 1, 0;
    Matrix4 oracle = rblab::testing::ptm_oracle({to_raw(pulse_unitary(Axis::X, kPi / 2))});
    expect_close(oracle, expected, 1e-15);
    expect_close(pulse_ptm(Axis::X, kPi / 2).matrix(), expected, 1e-15);
}

TEST(ptm_from_unitary, rejects_non_unitary) {
    Matrix2c m;
    m << 1, 0.1, 0, 1;
    EXPECT_THROW(Unitary2{m}, std::invalid_argument);
}

TEST(compose, examples) {
    Ptm lambda = Ptm::diagonal(0.9, 0.8, 0.7);
    expect_close(compose(Ptm::identity(), lambda).matrix(), lambda.matrix(), 0);
    Ptm x90 = pulse_ptm(Axis::X, kPi / 2);
    expect_close(compose(x90, x90).matrix(), pulse_ptm(Axis::X, kPi).matrix(), 1e-15);
    expect_close(compose(pulse_ptm(Axis::X, kPi), pulse_ptm(Axis::Y, kPi)).matrix(), pulse_ptm(Axis::Z, kPi).matrix(),
                 1e-15);
}

TEST(compose, later_is_applied_after_earlier) {
    // X90 then Y90 sends Z -> -Y -> -Y; Y90 then X90 sends Z -> X -> X.
    State z{Vector4(1, 0, 0, 1)};
    State a = apply(compose(pulse_ptm(Axis::Y, kPi / 2), pulse_ptm(Axis::X, kPi / 2)), z);
    EXPECT_NEAR(a.bloch(2), -1, 1e-15);
    State b = apply(compose(pulse_ptm(Axis::X, kPi / 2), pulse_ptm(Axis::Y, kPi / 2)), z);
    EXPECT_NEAR(b.bloch(1), 1, 1e-15);
}

TEST(infidelity, examples) {
    EXPECT_NEAR(infidelity(Ptm::identity()), 0, 1e-16);
    EXPECT_NEAR(infidelity(Ptm::depolarizing(0.99)), 0.005, 1e-15);
    EXPECT_NEAR(infidelity(Ptm::dephasing(0.99)), 0.5 - 2.98 / 6, 1e-15);
    EXPECT_NEAR(infidelity(Ptm::dephasing(0.99)), 1.0 / 300, 1e-15);
}

TEST(ptm_properties, unitary_channels_have_rotation_block) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        Ptm r = ptm_from_unitary(Unitary2(rblab::testing::haar_unitary(rng)));
        Eigen::Matrix3d block = r.matrix().bottomRightCorner<3, 3>();
        EXPECT_LE((block.transpose() * block - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(block.determinant(), 1, 1e-12);
        EXPECT_TRUE(r.is_trace_preserving());
        EXPECT_GE(infidelity(r), -1e-12);
    }
}

TEST(ptm_properties, compose_is_associative) {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 100; ++t) {
        Ptm a = rblab::testing::random_channel(rng), b = rblab::testing::random_channel(rng),
            c = rblab::testing::random_channel(rng);
        expect_close(compose(compose(a, b), c).matrix(), compose(a, compose(b, c)).matrix(), 1e-12);
    }
}

TEST(ptm_properties, representation_is_a_homomorphism) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 100; ++t) {
        Unitary2 u(rblab::testing::haar_unitary(rng)), v(rblab::testing::haar_unitary(rng));
        expect_close(ptm_from_unitary(u * v).matrix(), compose(ptm_from_unitary(u), ptm_from_unitary(v)).matrix(),
                     1e-10);
    }
}

TEST(ptm_properties, pauli_sandwich_preserves_infidelity_of_pauli_diagonal_channels) {
    // P L P is a conjugation because every Pauli is its own inverse.
    Ptm lambda = Ptm::diagonal(0.97, 0.95, 0.99);
    for (GateLabel p : pauli_labels()) {
        const Ptm &pp = CliffordGroup::instance().ptm(p);
        EXPECT_NEAR(infidelity(compose(pp, compose(lambda, pp))), infidelity(lambda), 1e-15);
    }
    Ptm u = pulse_ptm(Axis::X, 0.3);
    EXPECT_GT(std::abs(infidelity(compose(u, compose(lambda, u))) - infidelity(lambda)), 1e-3);
}

TEST(ptm_properties, random_channels_are_trace_preserving) {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 20; ++t) {
        EXPECT_TRUE(rblab::testing::random_channel(rng).is_trace_preserving(1e-12));
    }
}

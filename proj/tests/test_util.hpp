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

// Random channel generators and reference implementations that deliberately avoid the
// library's own code paths, so they can serve as oracles.

#include <array>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "rblab/engine.hpp"
#include "rblab/ptm.hpp"

namespace rblab::testing {

using C = std::complex<double>;
using M2 = std::array<std::array<C, 2>, 2>;

inline M2 mat_mul(const M2 &a, const M2 &b) {
    M2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

inline M2 dagger(const M2 &a) {
    M2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = std::conj(a[j][i]);
    return r;
}

inline const std::array<M2, 4> &raw_paulis() {
    static const std::array<M2, 4> p{{
        {{{1, 0}, {0, 1}}},
        {{{0, 1}, {1, 0}}},
        {{{0, C(0, -1)}, {C(0, 1), 0}}},
        {{{1, 0}, {0, -1}}},
    }};
    return p;
}

/// Truncated Taylor series of exp(A); converges to machine precision for |A| ~ 1.
inline M2 expm_taylor(const M2 &a) {
    M2 result{{{1, 0}, {0, 1}}};
    M2 term = result;
    for (int n = 1; n < 40; ++n) {
        term = mat_mul(term, a);
        for (auto &row : term)
            for (auto &x : row) x /= static_cast<double>(n);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) result[i][j] += term[i][j];
    }
    return result;
}

/// Pauli transfer matrix of the channel rho -> sum_k K rho K^dagger, computed by conjugating
/// each basis element and reading off coefficients.
inline Matrix4 ptm_oracle(const std::vector<M2> &kraus) {
    const auto &s = raw_paulis();
    Matrix4 r = Matrix4::Zero();
    for (int j = 0; j < 4; ++j) {
        M2 image{};
        for (const auto &k : kraus) {
            M2 t = mat_mul(mat_mul(k, s[j]), dagger(k));
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) image[a][b] += t[a][b];
        }
        for (int i = 0; i < 4; ++i) {
            M2 prod = mat_mul(s[i], image);
            r(i, j) = 0.5 * (prod[0][0] + prod[1][1]).real();
        }
    }
    return r;
}

inline Matrix2c haar_unitary(std::mt19937_64 &rng) {
    std::normal_distribution<double> n(0, 1);
    Matrix2c g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = Complex(n(rng), n(rng));
    Eigen::HouseholderQR<Matrix2c> qr(g);
    Matrix2c q = qr.householderQ();
    Matrix2c r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < 2; ++k) q.col(k) *= r(k, k) / std::abs(r(k, k));
    return q;
}

/// Random CPTP channel from a random Stinespring isometry with `rank` Kraus operators.
inline Ptm random_channel(std::mt19937_64 &rng, int rank = 3) {
    std::normal_distribution<double> n(0, 1);
    Eigen::MatrixXcd g(2 * rank, 2);
    for (int i = 0; i < 2 * rank; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = Complex(n(rng), n(rng));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd v = qr.householderQ() * Eigen::MatrixXcd::Identity(2 * rank, 2);
    std::vector<M2> kraus;
    for (int k = 0; k < rank; ++k) {
        M2 km{};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) km[a][b] = v(2 * k + a, b);
        kraus.push_back(km);
    }
    return Ptm(ptm_oracle(kraus));
}

/// Random Pauli channel with total error probability `error`.
inline Ptm random_pauli_channel(std::mt19937_64 &rng, double error) {
    std::gamma_distribution<double> gam(1.0, 1.0);
    double w[3] = {gam(rng), gam(rng), gam(rng)};
    double tot = w[0] + w[1] + w[2];
    double px = error * w[0] / tot, py = error * w[1] / tot, pz = error * w[2] / tot, pi = 1 - error;
    return Ptm::diagonal(pi + px - py - pz, pi - px + py - pz, pi - px - py + pz);
}

/// Brute-force average over every sequence in gates^m of f(sequence).
inline void for_each_sequence(const std::vector<GateLabel> &gates, int m,
                              const std::function<void(const std::vector<GateLabel> &)> &f) {
    std::vector<GateLabel> seq(m, gates[0]);
    std::vector<size_t> idx(m, 0);
    while (true) {
        for (int i = 0; i < m; ++i) seq[i] = gates[idx[i]];
        f(seq);
        int pos = 0;
        while (pos < m && ++idx[pos] == gates.size()) {
            idx[pos] = 0;
            ++pos;
        }
        if (pos == m) break;
    }
}

}  // namespace rblab::testing

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

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rblab/ptm.hpp"

namespace rblab {

inline constexpr int kCliffordOrder = 24;

/// Index of a single-qubit Clifford. Canonical order: label = 4 * s + p where s indexes
/// the coset representatives (I, X90, Y90, Z90, Z90.X90, X-90.Z-90) and p indexes the
/// Paulis (I, Xpi, Ypi, Zpi); the element is the coset representative applied after the Pauli.
struct GateLabel {
    int index = 0;

    constexpr auto operator<=>(const GateLabel &) const = default;
};

inline constexpr GateLabel kIdentityLabel{0};
inline constexpr GateLabel kXpiLabel{1};
inline constexpr GateLabel kYpiLabel{2};
inline constexpr GateLabel kZpiLabel{3};
inline constexpr GateLabel kX90Label{4};
inline constexpr GateLabel kY90Label{8};
inline constexpr GateLabel kZ90Label{12};

/// A named factor used to build gatesets (coset representatives, Paulis, NIST pi/2 pulses).
struct NamedGate {
    std::string_view name;
    Unitary2 unitary;
};

namespace detail {

inline std::vector<NamedGate> coset_representatives() {
    const double h = kPi / 2;
    return {
        {"I", Unitary2()},
        {"X90", pulse_unitary(Axis::X, h)},
        {"Y90", pulse_unitary(Axis::Y, h)},
        {"Z90", pulse_unitary(Axis::Z, h)},
        {"Z90.X90", pulse_unitary(Axis::Z, h) * pulse_unitary(Axis::X, h)},
        {"X-90.Z-90", pulse_unitary(Axis::X, -h) * pulse_unitary(Axis::Z, -h)},
    };
}

inline std::vector<NamedGate> pauli_factors() {
    return {
        {"I", Unitary2()},
        {"Xpi", pulse_unitary(Axis::X, kPi)},
        {"Ypi", pulse_unitary(Axis::Y, kPi)},
        {"Zpi", pulse_unitary(Axis::Z, kPi)},
    };
}

inline std::vector<NamedGate> nist_quarter_turns() {
    const double h = kPi / 2;
    return {
        {"X90", pulse_unitary(Axis::X, h)},
        {"X-90", pulse_unitary(Axis::X, -h)},
        {"Y90", pulse_unitary(Axis::Y, h)},
        {"Y-90", pulse_unitary(Axis::Y, -h)},
    };
}

}  // namespace detail

/// The 24-element single-qubit Clifford group with its multiplication and inverse tables.
class CliffordGroup {
   public:
    static const CliffordGroup &instance() {
        static const CliffordGroup group;
        return group;
    }

    const Ptm &ptm(GateLabel g) const { return elements_.at(g.index); }
    const Unitary2 &unitary(GateLabel g) const { return unitaries_.at(g.index); }
    std::string_view name(GateLabel g) const { return names_.at(g.index); }

    /// Label of a.b (b applied first).
    GateLabel mul(GateLabel a, GateLabel b) const { return GateLabel{mul_[a.index][b.index]}; }
    GateLabel inv(GateLabel a) const { return GateLabel{inv_[a.index]}; }

    /// Composition of a gate list, first element applied first.
    GateLabel compose_sequence(std::span<const GateLabel> gates) const {
        GateLabel acc = kIdentityLabel;
        for (GateLabel g : gates) {
            acc = mul(g, acc);
        }
        return acc;
    }

    /// Nearest Clifford to `channel`; nullopt when no element is within `threshold` entrywise.
    std::optional<GateLabel> identify(const Ptm &channel, double threshold = 1e-6) const {
        int best = -1;
        double best_diff = threshold;
        for (int k = 0; k < kCliffordOrder; ++k) {
            double d = elements_[k].max_abs_diff(channel);
            if (d <= best_diff) {
                best = k;
                best_diff = d;
            }
        }
        if (best < 0) {
            return std::nullopt;
        }
        return GateLabel{best};
    }

    GateLabel identify_or_throw(const Ptm &channel) const {
        auto g = identify(channel);
        if (!g) {
            throw std::invalid_argument("channel is not a Clifford");
        }
        return *g;
    }

    static std::vector<GateLabel> all_labels() {
        std::vector<GateLabel> out;
        for (int k = 0; k < kCliffordOrder; ++k) {
            out.push_back(GateLabel{k});
        }
        return out;
    }

   private:
    CliffordGroup() {
        auto cosets = detail::coset_representatives();
        auto paulis = detail::pauli_factors();
        for (const auto &s : cosets) {
            for (const auto &p : paulis) {
                Unitary2 u = s.unitary * p.unitary;
                Ptm r = ptm_from_unitary(u);
                for (const auto &e : elements_) {
                    if (e.approx_equal(r, 1e-6)) {
                        throw std::logic_error("Clifford construction produced a duplicate channel");
                    }
                }
                unitaries_.push_back(u);
                elements_.push_back(r);
                names_.push_back(std::string(s.name) + "." + std::string(p.name));
            }
        }
        if (elements_.size() != static_cast<size_t>(kCliffordOrder)) {
            throw std::logic_error("Clifford construction did not yield 24 elements");
        }
        for (int a = 0; a < kCliffordOrder; ++a) {
            for (int b = 0; b < kCliffordOrder; ++b) {
                auto g = identify(elements_[a] * elements_[b]);
                if (!g) {
                    throw std::logic_error("Clifford set is not closed under composition");
                }
                mul_[a][b] = g->index;
                if (g->index == 0) {
                    inv_[a] = b;
                }
            }
        }
    }

    std::vector<Ptm> elements_;
    std::vector<Unitary2> unitaries_;
    std::vector<std::string> names_;
    std::array<std::array<int, kCliffordOrder>, kCliffordOrder> mul_{};
    std::array<int, kCliffordOrder> inv_{};
};

inline std::vector<std::pair<GateLabel, Ptm>> clifford_elements() {
    const auto &c = CliffordGroup::instance();
    std::vector<std::pair<GateLabel, Ptm>> out;
    for (GateLabel g : CliffordGroup::all_labels()) {
        out.emplace_back(g, c.ptm(g));
    }
    return out;
}

/// One (pi/2 pulse, Pauli) factorisation of a NIST gate: the Pauli is applied first.
struct NistFactorPair {
    int quarter_turn = 0;  ///< index into (X90, X-90, Y90, Y-90)
    int pauli = 0;         ///< index into (I, Xpi, Ypi, Zpi)
    GateLabel gate;
};

/// All 16 (Q, P) factor pairs, Q-major. Each NIST gate appears exactly twice.
inline const std::vector<NistFactorPair> &nist_factor_pairs() {
    static const std::vector<NistFactorPair> pairs = [] {
        const auto &c = CliffordGroup::instance();
        auto qs = detail::nist_quarter_turns();
        auto ps = detail::pauli_factors();
        std::vector<NistFactorPair> out;
        for (int q = 0; q < static_cast<int>(qs.size()); ++q) {
            for (int p = 0; p < static_cast<int>(ps.size()); ++p) {
                out.push_back({q, p, c.identify_or_throw(ptm_from_unitary(qs[q].unitary * ps[p].unitary))});
            }
        }
        return out;
    }();
    return pairs;
}

inline std::vector<GateLabel> nist_labels() {
    std::vector<GateLabel> out;
    for (const auto &fp : nist_factor_pairs()) {
        out.push_back(fp.gate);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::vector<std::pair<GateLabel, Ptm>> nist_elements() {
    std::vector<std::pair<GateLabel, Ptm>> out;
    for (GateLabel g : nist_labels()) {
        out.emplace_back(g, CliffordGroup::instance().ptm(g));
    }
    return out;
}

inline std::vector<GateLabel> pauli_labels() { return {kIdentityLabel, kXpiLabel, kYpiLabel, kZpiLabel}; }

struct DesignSubsets {
    std::vector<GateLabel> c12;
    std::vector<GateLabel> sqrt_z_c12;
};

/// C12 = T.P with T = {I, Z90.X90, X-90.Z-90}, and Z90.C12.
inline DesignSubsets design_subsets() {
    const auto &c = CliffordGroup::instance();
    const std::array<GateLabel, 3> cyclic{kIdentityLabel, GateLabel{16}, GateLabel{20}};
    DesignSubsets out;
    for (GateLabel t : cyclic) {
        for (GateLabel p : pauli_labels()) {
            out.c12.push_back(c.mul(t, p));
        }
    }
    for (GateLabel g : out.c12) {
        out.sqrt_z_c12.push_back(c.mul(kZ90Label, g));
    }
    std::sort(out.c12.begin(), out.c12.end());
    std::sort(out.sqrt_z_c12.begin(), out.sqrt_z_c12.end());
    return out;
}

enum class Gateset { pauli, clifford, nist, c12, sqrt_z_c12 };

inline std::string_view gateset_name(Gateset g) {
    switch (g) {
        case Gateset::pauli: return "P";
        case Gateset::clifford: return "C";
        case Gateset::nist: return "N";
        case Gateset::c12: return "C12";
        case Gateset::sqrt_z_c12: return "sqrtZ_C12";
    }
    return "?";
}

inline Gateset parse_gateset(std::string_view s) {
    for (Gateset g : {Gateset::pauli, Gateset::clifford, Gateset::nist, Gateset::c12, Gateset::sqrt_z_c12}) {
        if (s == gateset_name(g)) {
            return g;
        }
    }
    throw std::invalid_argument("unknown gateset '" + std::string(s) + "' (expected P, C, N, C12 or sqrtZ_C12)");
}

inline std::vector<GateLabel> gateset_labels(Gateset g) {
    switch (g) {
        case Gateset::pauli: return pauli_labels();
        case Gateset::clifford: return CliffordGroup::all_labels();
        case Gateset::nist: return nist_labels();
        case Gateset::c12: return design_subsets().c12;
        case Gateset::sqrt_z_c12: return design_subsets().sqrt_z_c12;
    }
    return {};
}

/// Probability distribution of the aggregate circuit G_m...G_1 over the 24 Cliffords.
struct CircuitDistribution {
    int length = 0;
    std::array<double, kCliffordOrder> probs{};

    double total_variation(const CircuitDistribution &other) const {
        double s = 0;
        for (int k = 0; k < kCliffordOrder; ++k) {
            s += std::abs(probs[k] - other.probs[k]);
        }
        return 0.5 * s;
    }

    static CircuitDistribution uniform_over(std::span<const GateLabel> labels, int length = 0) {
        CircuitDistribution d;
        d.length = length;
        for (GateLabel g : labels) {
            d.probs[g.index] += 1.0 / static_cast<double>(labels.size());
        }
        return d;
    }
};

/// Row-stochastic 24x24 transition operator of C_m = G C_{m-1} for G uniform over `gates`.
inline Eigen::Matrix<double, kCliffordOrder, kCliffordOrder> transition_operator(std::span<const GateLabel> gates) {
    const auto &c = CliffordGroup::instance();
    Eigen::Matrix<double, kCliffordOrder, kCliffordOrder> t = Eigen::Matrix<double, kCliffordOrder, kCliffordOrder>::Zero();
    const double w = 1.0 / static_cast<double>(gates.size());
    for (int a = 0; a < kCliffordOrder; ++a) {
        for (GateLabel g : gates) {
            t(a, c.mul(g, GateLabel{a}).index) += w;
        }
    }
    return t;
}

/// Exact distribution after m uniform draws from `gates` (m-1 applications of the transition operator).
inline CircuitDistribution circuit_distribution(int m, std::span<const GateLabel> gates) {
    if (m < 1) {
        throw std::invalid_argument("circuit length must be >= 1");
    }
    auto t = transition_operator(gates);
    Eigen::Matrix<double, 1, kCliffordOrder> row = Eigen::Matrix<double, 1, kCliffordOrder>::Zero();
    for (GateLabel g : gates) {
        row(g.index) += 1.0 / static_cast<double>(gates.size());
    }
    for (int k = 1; k < m; ++k) {
        row = row * t;
    }
    CircuitDistribution d;
    d.length = m;
    for (int k = 0; k < kCliffordOrder; ++k) {
        d.probs[k] = row(k);
    }
    return d;
}

inline CircuitDistribution circuit_distribution(int m) {
    auto n = nist_labels();
    return circuit_distribution(m, n);
}

}  // namespace rblab

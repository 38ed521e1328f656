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

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rblab/gatesets.hpp"
#include "rblab/random.hpp"

namespace rblab {

class CompileError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A primitive pulse. `quarter_turns` is the rotation angle in units of pi/2 (0, +-1 or 2);
/// the sign of a pi pulse is not fixed here because it is randomised at execution time.
struct Pulse {
    Axis axis = Axis::I;
    int quarter_turns = 0;
    bool noisy = false;

    double angle() const { return quarter_turns * (kPi / 2); }
    bool is_pi() const { return std::abs(quarter_turns) == 2; }

    std::string name() const {
        std::string s = noisy ? "~" : "";
        s += axis_char(axis);
        switch (quarter_turns) {
            case 0: break;
            case 1: s += "90"; break;
            case -1: s += "-90"; break;
            default: s += "pi"; break;
        }
        return s;
    }

    bool operator==(const Pulse &) const = default;
};

namespace pulses {
inline Pulse ideal_identity() { return {Axis::I, 0, false}; }
inline Pulse noisy_identity() { return {Axis::I, 0, true}; }
inline Pulse pi(Axis a, bool noisy) { return {a, 2, noisy}; }
inline Pulse quarter(Axis a, int sign) { return {a, sign, true}; }
}  // namespace pulses

/// One row of the pulse-set table: an alphabet and the reference average number of noisy
/// pulses per gate for the Clifford (n_C) and NIST (n_N) gatesets, as printed.
struct PulseSet {
    int index = 0;
    std::vector<Pulse> alphabet;
    std::string n_clifford_printed;
    std::string n_nist_printed;

    double n_clifford() const { return std::stod(n_clifford_printed); }
    double n_nist() const { return std::stod(n_nist_printed); }
    std::string target_printed(Gateset g) const { return g == Gateset::nist ? n_nist_printed : n_clifford_printed; }

    bool has_ideal_identity() const {
        for (const Pulse &p : alphabet) {
            if (p.axis == Axis::I && !p.noisy) {
                return true;
            }
        }
        return false;
    }
};

/// True when `value` rounds to the printed decimal `printed` at its printed precision.
inline bool matches_printed(double value, const std::string &printed) {
    auto dot = printed.find('.');
    int decimals = dot == std::string::npos ? 0 : static_cast<int>(printed.size() - dot - 1);
    return std::abs(value - std::stod(printed)) <= 0.5 * std::pow(10.0, -decimals) + 1e-12;
}

inline constexpr int kPulseSetCount = 9;

inline PulseSet pulse_set(int index) {
    using namespace pulses;
    const Pulse I = ideal_identity(), nI = noisy_identity();
    const Pulse xp = quarter(Axis::X, 1), xm = quarter(Axis::X, -1);
    const Pulse yp = quarter(Axis::Y, 1), ym = quarter(Axis::Y, -1);
    const Pulse nX = pi(Axis::X, true), nY = pi(Axis::Y, true), nZ = pi(Axis::Z, true), Z = pi(Axis::Z, false);
    switch (index) {
        case 1: return {1, {I, xp, yp}, "3.08333", "4.0"};
        case 2: return {2, {xp, xm, yp, ym}, "2.25", "3.5"};
        case 3: return {3, {I, xp, xm, yp, ym}, "2.16667", "3.0"};
        case 4: return {4, {nX, nY, xp, xm, yp, ym}, "1.91667", "2.5"};
        case 5: return {5, {nI, nZ, xp, xm, yp, ym}, "1.91667", "2.5"};
        case 6: return {6, {nI, nX, nY, xp, xm, yp, ym}, "1.875", "2.25"};
        case 7: return {7, {nI, nX, nY, nZ, xp, xm, yp, ym}, "1.8333", "2.0"};
        case 8: return {8, {I, Z, xp, xm, yp, ym}, "1.66667", "2.0"};
        case 9: return {9, {I, nX, nY, Z, xp, xm, yp, ym}, "1.58333", "1.5"};
        default: break;
    }
    throw std::out_of_range("pulse set index must be in 1..9, got " + std::to_string(index));
}

enum class CompilationConvention { global_min, pauli_first, global_min_nonempty };

inline std::string_view convention_name(CompilationConvention c) {
    switch (c) {
        case CompilationConvention::global_min: return "global-min";
        case CompilationConvention::pauli_first: return "pauli-first";
        case CompilationConvention::global_min_nonempty: return "global-min-nonempty";
    }
    return "?";
}

inline CompilationConvention parse_convention(std::string_view s) {
    for (auto c : {CompilationConvention::global_min, CompilationConvention::pauli_first,
                   CompilationConvention::global_min_nonempty}) {
        if (s == convention_name(c)) {
            return c;
        }
    }
    throw std::invalid_argument("unknown compilation convention '" + std::string(s) + "'");
}

struct Decomposition {
    GateLabel gate;
    std::vector<Pulse> pulses;  ///< application order, first element applied first
    int noisy_count = 0;

    std::string pulse_string() const {
        std::string s;
        for (const Pulse &p : pulses) {
            if (!s.empty()) {
                s += ' ';
            }
            s += p.name();
        }
        return s;
    }

    Ptm ideal_ptm() const {
        Ptm acc;
        for (const Pulse &p : pulses) {
            acc = pulse_ptm(p.axis, p.angle()) * acc;
        }
        return acc;
    }
};

/// Every realisation of a gateset under one pulse set and convention. The Clifford gateset
/// has one realisation per gate; the NIST gateset has one per (pi/2, Pauli) factor pair, so
/// each of its 8 gates appears twice, with equal weight.
struct GatesetDecomposition {
    Gateset gateset = Gateset::clifford;
    int row = 0;
    CompilationConvention convention = CompilationConvention::global_min;
    std::vector<Decomposition> realizations;

    double mean_noisy_count() const {
        double s = 0;
        for (const auto &d : realizations) {
            s += d.noisy_count;
        }
        return s / static_cast<double>(realizations.size());
    }

    std::vector<const Decomposition *> for_label(GateLabel g) const {
        std::vector<const Decomposition *> out;
        for (const auto &d : realizations) {
            if (d.gate == g) {
                out.push_back(&d);
            }
        }
        return out;
    }
};

inline constexpr int kMaxDecompositionDepth = 6;

namespace detail {

struct BestString {
    std::vector<int> symbols;
    int cost = 0;
};

/// Cheapest non-empty pulse string for every Clifford, ordered by (noisy count, length,
/// lexicographic order over the alphabet).
inline std::array<std::optional<BestString>, kCliffordOrder> search_best_strings(const PulseSet &ps) {
    const auto &group = CliffordGroup::instance();
    std::vector<GateLabel> symbol_gate;
    for (const Pulse &p : ps.alphabet) {
        symbol_gate.push_back(group.identify_or_throw(pulse_ptm(p.axis, p.angle())));
    }
    const int n = static_cast<int>(ps.alphabet.size());
    std::array<std::optional<BestString>, kCliffordOrder> best;
    std::vector<int> stack;

    // Depth-first enumeration of all strings of exactly `length` symbols in lexicographic order.
    std::function<void(int, GateLabel, int)> visit = [&](int length, GateLabel acc, int cost) {
        if (static_cast<int>(stack.size()) == length) {
            auto &slot = best[acc.index];
            if (!slot || cost < slot->cost) {
                slot = BestString{stack, cost};
            }
            return;
        }
        for (int s = 0; s < n; ++s) {
            stack.push_back(s);
            visit(length, group.mul(symbol_gate[s], acc), cost + (ps.alphabet[s].noisy ? 1 : 0));
            stack.pop_back();
        }
    };
    for (int length = 1; length <= kMaxDecompositionDepth; ++length) {
        visit(length, kIdentityLabel, 0);
    }
    return best;
}

inline const std::array<std::optional<BestString>, kCliffordOrder> &best_strings(const PulseSet &ps) {
    static std::mutex mu;
    static std::map<int, std::array<std::optional<BestString>, kCliffordOrder>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(ps.index);
    if (it == cache.end()) {
        it = cache.emplace(ps.index, search_best_strings(ps)).first;
    }
    return it->second;
}

inline Decomposition make_decomposition(GateLabel gate, const PulseSet &ps, const std::vector<int> &symbols) {
    Decomposition d;
    d.gate = gate;
    for (int s : symbols) {
        d.pulses.push_back(ps.alphabet[s]);
        d.noisy_count += ps.alphabet[s].noisy ? 1 : 0;
    }
    return d;
}

inline std::vector<int> cheapest_symbols(GateLabel gate, const PulseSet &ps, bool allow_empty_identity) {
    if (allow_empty_identity && gate == kIdentityLabel) {
        return {};
    }
    const auto &best = best_strings(ps)[gate.index];
    if (!best) {
        throw CompileError("pulse set " + std::to_string(ps.index) + " cannot reach gate " +
                           std::to_string(gate.index) + " within " + std::to_string(kMaxDecompositionDepth) +
                           " pulses");
    }
    return best->symbols;
}

inline Decomposition factorised(GateLabel gate, GateLabel first, GateLabel second, const PulseSet &ps) {
    auto symbols = cheapest_symbols(first, ps, false);
    auto tail = cheapest_symbols(second, ps, false);
    symbols.insert(symbols.end(), tail.begin(), tail.end());
    return make_decomposition(gate, ps, symbols);
}

}  // namespace detail

/// Compiles the Clifford (C) or NIST (N) gateset into pulses of `ps`.
inline GatesetDecomposition decompose_gateset(Gateset gateset, const PulseSet &ps, CompilationConvention convention) {
    if (gateset != Gateset::clifford && gateset != Gateset::nist) {
        throw std::invalid_argument("only the C and N gatesets are compiled to pulses");
    }
    const auto &group = CliffordGroup::instance();
    GatesetDecomposition out{gateset, ps.index, convention, {}};
    const bool global = convention != CompilationConvention::pauli_first;
    const bool allow_empty = convention == CompilationConvention::global_min;

    if (gateset == Gateset::clifford) {
        for (GateLabel g : CliffordGroup::all_labels()) {
            if (global) {
                out.realizations.push_back(detail::make_decomposition(g, ps, detail::cheapest_symbols(g, ps, allow_empty)));
            } else {
                // Coset representative applied after the Pauli.
                GateLabel coset{4 * (g.index / 4)}, pauli{g.index % 4};
                out.realizations.push_back(detail::factorised(g, pauli, coset, ps));
            }
        }
    } else {
        const std::array<GateLabel, 4> quarter_turns{
            group.identify_or_throw(pulse_ptm(Axis::X, kPi / 2)), group.identify_or_throw(pulse_ptm(Axis::X, -kPi / 2)),
            group.identify_or_throw(pulse_ptm(Axis::Y, kPi / 2)), group.identify_or_throw(pulse_ptm(Axis::Y, -kPi / 2))};
        for (const auto &fp : nist_factor_pairs()) {
            if (global) {
                out.realizations.push_back(
                    detail::make_decomposition(fp.gate, ps, detail::cheapest_symbols(fp.gate, ps, allow_empty)));
            } else {
                out.realizations.push_back(detail::factorised(fp.gate, GateLabel{fp.pauli}, quarter_turns[fp.quarter_turn], ps));
            }
        }
    }

    for (const auto &d : out.realizations) {
        if (!d.ideal_ptm().approx_equal(group.ptm(d.gate))) {
            throw CompileError("decomposition '" + d.pulse_string() + "' does not reproduce gate " +
                               std::to_string(d.gate.index));
        }
    }
    return out;
}

struct CalibrationEntry {
    CompilationConvention convention;
    double mean_noisy_count;
    bool matches;
};

struct Calibration {
    int row = 0;
    Gateset gateset = Gateset::clifford;
    std::string target_printed;
    std::vector<CalibrationEntry> candidates;
    std::optional<CompilationConvention> selected;
};

/// Tries every convention against the printed reference average and selects the first
/// match in the order global-min, global-min-nonempty, pauli-first.
inline Calibration calibrate(int row, Gateset gateset) {
    PulseSet ps = pulse_set(row);
    Calibration cal{row, gateset, ps.target_printed(gateset), {}, std::nullopt};
    for (auto c : {CompilationConvention::global_min, CompilationConvention::global_min_nonempty,
                   CompilationConvention::pauli_first}) {
        double mean = decompose_gateset(gateset, ps, c).mean_noisy_count();
        bool ok = matches_printed(mean, cal.target_printed);
        cal.candidates.push_back({c, mean, ok});
        if (ok && !cal.selected) {
            cal.selected = c;
        }
    }
    return cal;
}

inline CompilationConvention calibrated_convention(int row, Gateset gateset) {
    auto cal = calibrate(row, gateset);
    if (!cal.selected) {
        throw CompileError("no compilation convention reproduces the reference average for row " + std::to_string(row) +
                           " gateset " + std::string(gateset_name(gateset)));
    }
    return *cal.selected;
}

/// Per-pulse noisy implementations.
struct ErrorModel {
    enum class Kind { ideal, over_rotation, z_rotation, dephasing, custom };

    Kind kind = Kind::ideal;
    double rotation_offset = 0.1;
    double dephasing_alpha = 0.99;
    /// Used when kind == custom: noisy PTM of a noisy pulse whose signed angle is given.
    std::function<Ptm(const Pulse &, double signed_angle)> custom;

    static ErrorModel ideal() { return {}; }
    static ErrorModel over_rotation(double offset = 0.1) { return {Kind::over_rotation, offset, 0.99, {}}; }
    static ErrorModel z_rotation(double offset = 0.1) { return {Kind::z_rotation, offset, 0.99, {}}; }
    static ErrorModel dephasing(double alpha = 0.99) { return {Kind::dephasing, 0.1, alpha, {}}; }

    std::string name() const {
        switch (kind) {
            case Kind::ideal: return "ideal";
            case Kind::over_rotation: return "over_rotation";
            case Kind::z_rotation: return "z_rotation";
            case Kind::dephasing: return "dephasing";
            case Kind::custom: return "custom";
        }
        return "?";
    }

    static ErrorModel parse(std::string_view s) {
        if (s == "ideal") return ideal();
        if (s == "over_rotation") return over_rotation();
        if (s == "z_rotation") return z_rotation();
        if (s == "dephasing") return dephasing();
        throw std::invalid_argument("unknown error model '" + std::string(s) +
                                    "' (expected ideal, over_rotation, z_rotation or dephasing)");
    }

    /// Implementation of `p` executed with rotation angle `signed_angle`. Ideal pulses are exact.
    Ptm pulse(const Pulse &p, double signed_angle) const {
        const Ptm exact = pulse_ptm(p.axis, signed_angle);
        if (!p.noisy) {
            return exact;
        }
        const double d = rotation_offset;
        switch (kind) {
            case Kind::ideal:
                return exact;
            case Kind::over_rotation:
                if (p.axis == Axis::I) {
                    return exact;
                }
                return pulse_ptm(p.axis, signed_angle + std::copysign(d, signed_angle));
            case Kind::z_rotation:
                if (p.axis == Axis::Z || p.axis == Axis::I) {
                    return pulse_ptm(Axis::Z, signed_angle + d);
                }
                return pulse_ptm(Axis::Z, d) * exact;
            case Kind::dephasing:
                return Ptm::dephasing(dephasing_alpha) * exact;
            case Kind::custom:
                return custom(p, signed_angle);
        }
        return exact;
    }

    /// Average over the random direction of pi pulses.
    Ptm expected_pulse(const Pulse &p) const {
        if (!p.is_pi()) {
            return pulse(p, p.angle());
        }
        return 0.5 * (pulse(p, kPi) + pulse(p, -kPi));
    }

    Ptm sampled_pulse(const Pulse &p, Rng &rng) const {
        if (!p.is_pi()) {
            return pulse(p, p.angle());
        }
        return pulse(p, fair_coin(rng) ? kPi : -kPi);
    }
};

inline Ptm expected_gate_ptm(const Decomposition &d, const ErrorModel &em) {
    Ptm acc;
    for (const Pulse &p : d.pulses) {
        acc = em.expected_pulse(p) * acc;
    }
    return acc;
}

inline Ptm sampled_gate_ptm(const Decomposition &d, const ErrorModel &em, Rng &rng) {
    Ptm acc;
    for (const Pulse &p : d.pulses) {
        acc = em.sampled_pulse(p, rng) * acc;
    }
    return acc;
}

/// Noisy implementation of `gate` from a compiled gateset. With no generator, the result is
/// the expectation over the gate's realisations and pi-pulse directions; with one, a single
/// realisation and direction pattern is drawn.
inline Ptm noisy_gate_ptm(GateLabel gate, const GatesetDecomposition &dec, const ErrorModel &em, Rng *rng = nullptr) {
    auto options = dec.for_label(gate);
    if (options.empty()) {
        throw std::invalid_argument("gate " + std::to_string(gate.index) + " is not in the compiled gateset");
    }
    if (rng != nullptr) {
        const Decomposition *d = options[uniform_index(*rng, static_cast<int>(options.size()))];
        return sampled_gate_ptm(*d, em, *rng);
    }
    Matrix4 sum = Matrix4::Zero();
    for (const Decomposition *d : options) {
        sum += expected_gate_ptm(*d, em).matrix();
    }
    return Ptm(sum / static_cast<double>(options.size()));
}

}  // namespace rblab

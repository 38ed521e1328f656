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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rblab/compile.hpp"
#include "rblab/fit.hpp"
#include "rblab/gatesets.hpp"
#include "rblab/random.hpp"

namespace rblab {

enum class Protocol { srb, nist };

inline std::string_view protocol_name(Protocol p) { return p == Protocol::srb ? "SRB" : "NIST"; }

inline Protocol parse_protocol(std::string_view s) {
    if (s == "SRB" || s == "srb") return Protocol::srb;
    if (s == "NIST" || s == "nist") return Protocol::nist;
    throw std::invalid_argument("unknown protocol '" + std::string(s) + "' (expected SRB or NIST)");
}

inline Gateset protocol_gateset(Protocol p) { return p == Protocol::srb ? Gateset::clifford : Gateset::nist; }

/// State-preparation and measurement errors: `prep` acts on |0><0|, `meas` acts right
/// before an ideal measurement of the recovery projector.
struct Spam {
    Ptm prep;
    Ptm meas;
};

/// How each gate is implemented. Gate-level noise applies one channel after every ideal
/// gate; pulse-level noise compiles gates into a pulse set and applies an error model per
/// pulse. Recovery gates are always compiled as Cliffords.
class GateNoise {
   public:
    static GateNoise ideal() { return gate_level(Ptm::identity()); }

    static GateNoise gate_level(const Ptm &lambda) {
        GateNoise n;
        n.lambda_ = lambda;
        n.description_ = "gate_level";
        const auto &group = CliffordGroup::instance();
        for (int k = 0; k < kCliffordOrder; ++k) {
            n.expected_clifford_[k] = lambda * group.ptm(GateLabel{k});
        }
        n.expected_nist_ = n.expected_clifford_;
        return n;
    }

    /// Conventions default to the calibrated ones for `row`.
    static GateNoise pulse_level(int row, const ErrorModel &em,
                                 std::optional<CompilationConvention> clifford_convention = std::nullopt,
                                 std::optional<CompilationConvention> nist_convention = std::nullopt) {
        GateNoise n;
        PulseSet ps = pulse_set(row);
        auto compiled = std::make_shared<Compiled>();
        compiled->clifford = decompose_gateset(Gateset::clifford, ps,
                                               clifford_convention.value_or(calibrated_convention(row, Gateset::clifford)));
        compiled->nist =
            decompose_gateset(Gateset::nist, ps, nist_convention.value_or(calibrated_convention(row, Gateset::nist)));
        compiled->model = em;
        n.compiled_ = compiled;
        n.description_ = em.name();
        for (int k = 0; k < kCliffordOrder; ++k) {
            n.expected_clifford_[k] = noisy_gate_ptm(GateLabel{k}, compiled->clifford, em);
        }
        for (GateLabel g : nist_labels()) {
            n.expected_nist_[g.index] = noisy_gate_ptm(g, compiled->nist, em);
        }
        return n;
    }

    bool is_gate_level() const { return lambda_.has_value(); }
    const std::string &description() const { return description_; }
    const GatesetDecomposition *clifford_decomposition() const { return compiled_ ? &compiled_->clifford : nullptr; }
    const GatesetDecomposition *nist_decomposition() const { return compiled_ ? &compiled_->nist : nullptr; }

    /// Noisy sequence gate for `protocol`; drawn from its realisations when `rng` is given.
    Ptm gate(Protocol protocol, GateLabel g, Rng *rng = nullptr) const {
        if (rng == nullptr || !compiled_) {
            return expected_gate(protocol, g);
        }
        const auto &dec = protocol == Protocol::nist ? compiled_->nist : compiled_->clifford;
        return noisy_gate_ptm(g, dec, compiled_->model, rng);
    }

    Ptm recovery(GateLabel g, Rng *rng = nullptr) const {
        if (rng == nullptr || !compiled_) {
            return expected_clifford_[g.index];
        }
        return noisy_gate_ptm(g, compiled_->clifford, compiled_->model, rng);
    }

    const Ptm &expected_gate(Protocol protocol, GateLabel g) const {
        return protocol == Protocol::nist ? expected_nist_[g.index] : expected_clifford_[g.index];
    }

   private:
    struct Compiled {
        GatesetDecomposition clifford;
        GatesetDecomposition nist;
        ErrorModel model;
    };

    std::optional<Ptm> lambda_;
    std::shared_ptr<const Compiled> compiled_;
    std::array<Ptm, kCliffordOrder> expected_clifford_{};
    std::array<Ptm, kCliffordOrder> expected_nist_{};
    std::string description_;
};

struct SequenceRecord {
    Protocol protocol = Protocol::srb;
    std::vector<GateLabel> gates;
    GateLabel recovery;
    int flip = 0;
    double survival = 0;
};

inline SequenceRecord sample_sequence(Protocol protocol, int m, bool randomized_recovery, Rng &rng) {
    if (m < 1) {
        throw std::invalid_argument("sequence length must be >= 1");
    }
    static const std::vector<GateLabel> cliffords = CliffordGroup::all_labels();
    static const std::vector<GateLabel> nist = nist_labels();
    const auto &pool = protocol == Protocol::srb ? cliffords : nist;
    const auto &group = CliffordGroup::instance();
    SequenceRecord rec;
    rec.protocol = protocol;
    rec.gates.reserve(m);
    for (int i = 0; i < m; ++i) {
        rec.gates.push_back(pool[uniform_index(rng, static_cast<int>(pool.size()))]);
    }
    rec.flip = randomized_recovery && fair_coin(rng) ? 1 : 0;
    GateLabel inverse = group.inv(group.compose_sequence(rec.gates));
    rec.recovery = rec.flip ? group.mul(kXpiLabel, inverse) : inverse;
    return rec;
}

/// Recovery projector X_pi^b |0><0| X_pi^b in Bloch coordinates.
inline State recovery_effect(int flip) { return flip ? State::excited() : State::ground(); }

namespace detail {
inline double checked_probability(double p) {
    if (!(p >= -1e-9 && p <= 1 + 1e-9)) {
        std::ostringstream os;
        os << "survival probability " << p << " outside [0, 1]: non-physical noise configuration";
        throw std::domain_error(os.str());
    }
    return std::clamp(p, 0.0, 1.0);
}
}  // namespace detail

/// tr(Q G~_{m+1} ... G~_1 (rho)). With `rng`, each gate's pulse realisation and pi-pulse
/// directions are drawn; otherwise their expectation is used.
inline double survival_probability(const SequenceRecord &rec, const GateNoise &noise, const Spam &spam = {},
                                   Rng *rng = nullptr) {
    State s = apply(spam.prep, State::ground());
    for (GateLabel g : rec.gates) {
        s = apply(noise.gate(rec.protocol, g, rng), s);
    }
    s = apply(noise.recovery(rec.recovery, rng), s);
    s = apply(spam.meas, s);
    return detail::checked_probability(s.expectation(recovery_effect(rec.flip)));
}

struct RBConfig {
    Protocol protocol = Protocol::srb;
    std::vector<int> lengths{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
    int sequences_per_length = 30;
    std::optional<int> shots;  ///< nullopt: exact survival probabilities
    /// Replace sampling by the exact expectation over all sequences.
    bool exact_average = false;
    bool randomized_recovery = true;
    /// Draw pulse realisations and pi-pulse directions per sequence instead of averaging.
    bool sample_pulses = false;
    std::uint64_t seed = 0;
    int threads = 1;
    Spam spam;

    void validate() const {
        if (lengths.empty()) {
            throw std::invalid_argument("at least one sequence length is required");
        }
        for (size_t i = 0; i < lengths.size(); ++i) {
            if (lengths[i] < 1 || (i > 0 && lengths[i] <= lengths[i - 1])) {
                throw std::invalid_argument("lengths must be >= 1 and strictly increasing");
            }
        }
        if (sequences_per_length < 1) {
            throw std::invalid_argument("sequences per length must be >= 1");
        }
        if (shots && *shots < 1) {
            throw std::invalid_argument("shots must be >= 1");
        }
        if (exact_average && shots) {
            throw std::invalid_argument("exact sequence averaging requires exact shots");
        }
    }
};

/// Sum in a fixed binary-tree order, independent of how the terms were produced.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 2) {
        double s = 0;
        for (double x : v) s += x;
        return s;
    }
    size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

/// Runs `task(i)` for i in [0, n) on `threads` workers.
template <typename Fn>
void parallel_for(int n, int threads, Fn &&task) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = next++; i < n; i = next++) task(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto &th : pool) th.join();
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// Exact expectation of the survival probability over all sequences of each length,
/// obtained by propagating the state conditioned on the aggregate Clifford.
inline DecayDataset exact_average_survival(Protocol protocol, std::span<const int> lengths, const GateNoise &noise,
                                           const Spam &spam = {}, bool randomized_recovery = true) {
    const auto &group = CliffordGroup::instance();
    const auto pool = gateset_labels(protocol_gateset(protocol));
    const double w = 1.0 / static_cast<double>(pool.size());
    std::array<Vector4, kCliffordOrder> states;
    for (auto &v : states) v.setZero();
    states[0] = apply(spam.prep, State::ground()).bloch;

    DecayDataset ds;
    int m = 0;
    for (int target : lengths) {
        while (m < target) {
            std::array<Vector4, kCliffordOrder> next;
            for (auto &v : next) v.setZero();
            for (int c = 0; c < kCliffordOrder; ++c) {
                if (states[c].isZero(0)) continue;
                for (GateLabel g : pool) {
                    next[group.mul(g, GateLabel{c}).index] += w * (noise.expected_gate(protocol, g).matrix() * states[c]);
                }
            }
            states = next;
            ++m;
        }
        double total = 0;
        const int flips = randomized_recovery ? 2 : 1;
        for (int c = 0; c < kCliffordOrder; ++c) {
            for (int b = 0; b < flips; ++b) {
                GateLabel inverse = group.inv(GateLabel{c});
                GateLabel rec = b ? group.mul(kXpiLabel, inverse) : inverse;
                State s{(spam.meas * noise.recovery(rec)).matrix() * states[c]};
                total += s.expectation(recovery_effect(b)) / flips;
            }
        }
        ds.points.push_back({target, detail::checked_probability(total), 0.0, 0});
    }
    return ds;
}

/// Protocol simulation: for each length, `sequences_per_length` random sequences, each with
/// its exact survival probability or a binomial estimate from `shots` repetitions. Sequence k
/// of length index j draws from derive_rng(seed, j, k), so results do not depend on `threads`.
inline DecayDataset run_experiment(const RBConfig &cfg, const GateNoise &noise) {
    cfg.validate();
    if (cfg.exact_average) {
        return exact_average_survival(cfg.protocol, cfg.lengths, noise, cfg.spam, cfg.randomized_recovery);
    }
    const int nl = static_cast<int>(cfg.lengths.size());
    const int s = cfg.sequences_per_length;
    std::vector<double> values(static_cast<size_t>(nl) * s);
    parallel_for(nl * s, cfg.threads, [&](int task) {
        const int j = task / s, k = task % s;
        Rng rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k));
        SequenceRecord rec = sample_sequence(cfg.protocol, cfg.lengths[j], cfg.randomized_recovery, rng);
        double p = survival_probability(rec, noise, cfg.spam, cfg.sample_pulses ? &rng : nullptr);
        if (cfg.shots) {
            p = static_cast<double>(binomial(rng, *cfg.shots, p)) / *cfg.shots;
        }
        values[task] = p;
    });

    DecayDataset ds;
    for (int j = 0; j < nl; ++j) {
        std::span<const double> row(values.data() + static_cast<size_t>(j) * s, s);
        const double mean = pairwise_sum(row) / s;
        std::vector<double> sq(row.size());
        for (size_t i = 0; i < row.size(); ++i) sq[i] = (row[i] - mean) * (row[i] - mean);
        const double se = s > 1 ? std::sqrt(pairwise_sum(sq) / (s - 1) / s) : 0.0;
        ds.points.push_back({cfg.lengths[j], mean, se, s});
    }
    return ds;
}

}  // namespace rblab

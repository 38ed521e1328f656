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
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rblab {

class FitError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Mean survival per sequence length. `n_sequences == 0` marks an exact expectation over
/// all sequences rather than a sample.
struct DecayDataset {
    struct Point {
        int length = 0;
        double mean = 0;
        double stderr_ = 0;
        int n_sequences = 0;
    };
    std::vector<Point> points;
};

/// Least-squares fit of A p^m + B.
struct DecayFit {
    double A = 0;
    double B = 0;
    double p = 1;
    double r = 0;
    double residual = 0;  ///< residual sum of squares
    double ci_halfwidth = 0;
    bool fixed_b = false;
    int n_points = 0;
};

inline double estimate_infidelity(const DecayFit &fit) { return (1 - fit.p) / 2; }

namespace detail {

struct FitData {
    std::vector<double> m, y;
    std::optional<double> fixed_b;
};

struct LinearSolution {
    double a = 0, b = 0, rss = 0;
};

/// Best (A, B) for fixed p.
inline LinearSolution solve_amplitudes(const FitData &d, double p) {
    const size_t n = d.m.size();
    LinearSolution s;
    if (d.fixed_b) {
        double num = 0, den = 0;
        for (size_t i = 0; i < n; ++i) {
            double f = std::pow(p, d.m[i]);
            num += f * (d.y[i] - *d.fixed_b);
            den += f * f;
        }
        s.a = den > 0 ? num / den : 0;
        s.b = *d.fixed_b;
    } else {
        double sf = 0, sff = 0, sy = 0, sfy = 0;
        for (size_t i = 0; i < n; ++i) {
            double f = std::pow(p, d.m[i]);
            sf += f;
            sff += f * f;
            sy += d.y[i];
            sfy += f * d.y[i];
        }
        const double nn = static_cast<double>(n);
        const double det = nn * sff - sf * sf;
        if (std::abs(det) < 1e-300) {
            s.a = 0;
            s.b = sy / nn;
        } else {
            s.a = (nn * sfy - sf * sy) / det;
            s.b = (sff * sy - sf * sfy) / det;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        double r = s.a * std::pow(p, d.m[i]) + s.b - d.y[i];
        s.rss += r * r;
    }
    return s;
}

// Search variable t = -log2(1 - p), so that p close to 1 gets fine resolution.
inline double p_of(double t) { return 1 - std::exp2(-t); }

}  // namespace detail

/// Separable least squares: for each trial p the amplitudes are solved linearly; p is
/// located by golden-section search around the best of 64 coarse seeds and then polished
/// with Gauss-Newton on (A, B, p). Only points with length >= `min_length` are used.
inline DecayFit fit_decay(const DecayDataset &ds, std::optional<double> fix_b = std::nullopt, int min_length = 1) {
    detail::FitData d;
    d.fixed_b = fix_b;
    double max_stderr = 0;
    for (const auto &pt : ds.points) {
        if (pt.length >= min_length) {
            d.m.push_back(pt.length);
            d.y.push_back(pt.mean);
            max_stderr = std::max(max_stderr, pt.stderr_);
        }
    }
    std::vector<double> distinct = d.m;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const size_t needed = fix_b ? 2 : 3;
    if (distinct.size() < needed) {
        throw FitError("insufficient lengths: need at least " + std::to_string(needed) + " distinct sequence lengths");
    }
    auto [lo, hi] = std::minmax_element(d.y.begin(), d.y.end());
    if (*hi - *lo <= std::max(1e-12, 2 * max_stderr)) {
        throw FitError("unidentifiable: survival data are constant to within noise");
    }

    auto objective = [&](double t) { return detail::solve_amplitudes(d, detail::p_of(t)).rss; };

    constexpr int kSeeds = 64;
    constexpr double kTmin = 0.05, kTmax = 30;
    const double step = (kTmax - kTmin) / (kSeeds - 1);
    int best = 0;
    double best_val = objective(kTmin);
    for (int k = 1; k < kSeeds; ++k) {
        double v = objective(kTmin + k * step);
        if (v < best_val) {
            best_val = v;
            best = k;
        }
    }
    double a = kTmin + std::max(0, best - 1) * step;
    double b = kTmin + std::min(kSeeds - 1, best + 1) * step;
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), e = a + g * (b - a);
    double fc = objective(c), fe = objective(e);
    while (b - a > 1e-12 * std::max(1.0, std::abs(b))) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = objective(e);
        }
    }
    double p = detail::p_of((a + b) / 2);
    auto sol = detail::solve_amplitudes(d, p);

    // Gauss-Newton polish on the full parameter vector.
    const bool free_b = !fix_b;
    const int k = free_b ? 3 : 2;
    auto jacobian_step = [&](double amp, double off, double pp, Eigen::MatrixXd &jtj, Eigen::VectorXd &jtr) {
        jtj = Eigen::MatrixXd::Zero(k, k);
        jtr = Eigen::VectorXd::Zero(k);
        for (size_t i = 0; i < d.m.size(); ++i) {
            double f = std::pow(pp, d.m[i]);
            double res = amp * f + off - d.y[i];
            Eigen::VectorXd row(k);
            row(0) = f;
            row(1) = amp * d.m[i] * std::pow(pp, d.m[i] - 1);
            if (free_b) {
                row(2) = 1;
            }
            jtj += row * row.transpose();
            jtr += row * res;
        }
    };
    Eigen::MatrixXd jtj;
    Eigen::VectorXd jtr;
    for (int it = 0; it < 20; ++it) {
        jacobian_step(sol.a, sol.b, p, jtj, jtr);
        Eigen::VectorXd delta = jtj.ldlt().solve(-jtr);
        if (!delta.allFinite()) {
            break;
        }
        double np = p + delta(1);
        if (!(np > 0 && np <= 1)) {
            break;
        }
        double na = sol.a + delta(0), nb = free_b ? sol.b + delta(2) : sol.b;
        double rss = 0;
        for (size_t i = 0; i < d.m.size(); ++i) {
            double r = na * std::pow(np, d.m[i]) + nb - d.y[i];
            rss += r * r;
        }
        if (!(rss < sol.rss)) {
            break;
        }
        p = np;
        sol = {na, nb, rss};
    }

    DecayFit fit;
    fit.A = sol.a;
    fit.B = sol.b;
    fit.p = p;
    fit.r = estimate_infidelity(fit);
    fit.residual = sol.rss;
    fit.fixed_b = fix_b.has_value();
    fit.n_points = static_cast<int>(d.m.size());
    const int dof = fit.n_points - k;
    jacobian_step(sol.a, sol.b, p, jtj, jtr);
    if (dof > 0) {
        Eigen::MatrixXd cov = jtj.inverse() * (sol.rss / dof);
        if (cov.allFinite() && cov(1, 1) >= 0) {
            fit.ci_halfwidth = 1.96 * std::sqrt(cov(1, 1));
        }
    }
    return fit;
}

}  // namespace rblab

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

// Command-line front end. Each command is its own CLI11 app so that a flat key = value
// config file maps directly onto the command's options.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rblab/compile.hpp"
#include "rblab/engine.hpp"
#include "rblab/fit.hpp"
#include "rblab/gatesets.hpp"
#include "rblab/theory.hpp"

namespace rblab::cli {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr const char *kOutputDirEnv = "RBLAB_OUTPUT_DIR";

enum ExitCode { kOk = 0, kUsage = 2, kAnalysis = 3 };

/// Bad flags, config values or output paths.
class UsageError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------------------
// Tables

using Cell = std::variant<long long, double, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

/// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_cell(const Cell &c) {
    if (const auto *i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (const auto *d = std::get_if<double>(&c)) return format_double(*d);
    const std::string &s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

inline void write_csv(std::ostream &os, const Table &t) {
    for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto &row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
        os << '\n';
    }
}

inline nlohmann::ordered_json to_json(const Table &t) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto &row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (size_t i = 0; i < row.size(); ++i) {
            std::visit([&](const auto &v) { obj[t.columns[i]] = v; }, row[i]);
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

// ---------------------------------------------------------------------------------------
// Common options and output

struct CommonOptions {
    std::uint64_t seed = 0;
    std::string output;
    std::string format = "csv";
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

inline void add_common_options(CLI::App &app, CommonOptions &c) {
    app.add_option("--seed", c.seed, "Random seed");
    app.add_option("--output,-o", c.output,
                   std::string("Output file; '-' for stdout. Defaults to $") + kOutputDirEnv + "/<command>.<format> "
                   "when that variable is set, else stdout");
    app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1, 4096));
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Resolved option values of `app`, excluding help and config.
inline nlohmann::ordered_json resolved_config(const CLI::App &app) {
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const CLI::Option *opt : app.get_options()) {
        std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config" || name == "version") continue;
        if (opt->count() > 0) {
            const auto &res = opt->results();
            std::string joined;
            for (size_t i = 0; i < res.size(); ++i) joined += (i ? "," : "") + res[i];
            cfg[name] = joined;
        } else {
            cfg[name] = opt->get_default_str();
        }
    }
    return cfg;
}

/// Where a command's tables go. The first table is the primary output; further tables are
/// written next to it as <stem>.<table name><ext>.
class Sink {
   public:
    Sink(std::string command, const CommonOptions &common, std::ostream &out)
        : command_(std::move(command)), format_(common.format), out_(out) {
        std::string path = common.output;
        if (path.empty()) {
            const char *dir = std::getenv(kOutputDirEnv);
            if (dir != nullptr && *dir != '\0') {
                path = (std::filesystem::path(dir) / (command_ + "." + format_)).string();
            }
        }
        if (!path.empty() && path != "-") {
            path_ = path;
            check_writable(*path_);
        }
    }

    bool to_stdout() const { return !path_.has_value(); }

    std::string path_for(size_t index, const Table &t) const {
        if (index == 0) return path_->string();
        std::filesystem::path p = *path_;
        std::string ext = p.extension().string();
        p.replace_extension();
        return p.string() + "." + t.name + ext;
    }

    void emit(const std::vector<Table> &tables) {
        if (to_stdout()) {
            if (format_ == "json") {
                if (tables.size() == 1) {
                    out_ << to_json(tables[0]).dump(2) << '\n';
                } else {
                    nlohmann::ordered_json all = nlohmann::ordered_json::object();
                    for (const auto &t : tables) all[t.name] = to_json(t);
                    out_ << all.dump(2) << '\n';
                }
            } else {
                for (size_t i = 0; i < tables.size(); ++i) {
                    if (i) out_ << '\n';
                    write_csv(out_, tables[i]);
                }
            }
            return;
        }
        for (size_t i = 0; i < tables.size(); ++i) {
            std::string p = path_for(i, tables[i]);
            if (i > 0) check_writable(p);
            std::ofstream f(p, std::ios::binary | std::ios::trunc);
            if (format_ == "json") {
                f << to_json(tables[i]).dump(2) << '\n';
            } else {
                write_csv(f, tables[i]);
            }
            if (!f) throw UsageError("failed writing " + p);
            written_.push_back(p);
        }
    }

    void write_manifest(const CLI::App &app, std::uint64_t seed, std::chrono::system_clock::time_point start) {
        if (to_stdout()) return;
        nlohmann::ordered_json m;
        m["command"] = command_;
        m["config"] = resolved_config(app);
        m["seed"] = seed;
        m["version"] = std::string(kVersion);
        m["started"] = utc_timestamp(start);
        m["finished"] = utc_timestamp(std::chrono::system_clock::now());
        m["outputs"] = written_;
        std::string p = path_->string() + ".manifest.json";
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        f << m.dump(2) << '\n';
        if (!f) throw UsageError("failed writing " + p);
    }

   private:
    static void check_writable(const std::filesystem::path &p) {
        std::ofstream f(p, std::ios::binary | std::ios::app);
        if (!f) throw UsageError("cannot write output file " + p.string());
    }

    std::string command_;
    std::string format_;
    std::ostream &out_;
    std::optional<std::filesystem::path> path_;
    std::vector<std::string> written_;
};

// ---------------------------------------------------------------------------------------
// Parsing helpers

/// "1-9", "1,4,7", "2-4,9" or "" (empty selection).
inline std::vector<int> parse_rows(const std::string &spec) {
    std::vector<int> rows;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto dash = item.find('-');
        try {
            int lo = std::stoi(item.substr(0, dash));
            int hi = dash == std::string::npos ? lo : std::stoi(item.substr(dash + 1));
            for (int r = lo; r <= hi; ++r) {
                if (r < 1 || r > kPulseSetCount) throw UsageError("pulse row out of range: " + std::to_string(r));
                rows.push_back(r);
            }
        } catch (const std::logic_error &) {
            throw UsageError("bad row selection '" + item + "'");
        }
    }
    return rows;
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

inline double parse_number(const std::string &s, const std::string &what) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::logic_error &) {
    }
    throw UsageError("bad number '" + s + "' in " + what);
}

/// A noise description: gate-level ("ideal", "depolarizing:P", "pauli:X,Y,Z") or a pulse-level
/// error model ("over_rotation[:offset]", "z_rotation[:offset]", "dephasing[:alpha]").
struct NoiseSpec {
    std::string text;
    std::optional<Ptm> gate_level;
    std::optional<ErrorModel> model;

    static NoiseSpec parse(const std::string &text) {
        NoiseSpec n;
        n.text = text;
        auto colon = text.find(':');
        std::string kind = text.substr(0, colon);
        std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
        if (kind == "ideal") {
            n.gate_level = Ptm::identity();
        } else if (kind == "depolarizing") {
            n.gate_level = Ptm::depolarizing(parse_number(arg, "noise"));
        } else if (kind == "pauli") {
            auto parts = split(arg, ',');
            if (parts.size() != 3) throw UsageError("pauli noise needs three values, e.g. pauli:0.99,0.98,0.985");
            n.gate_level = Ptm::diagonal(parse_number(parts[0], "noise"), parse_number(parts[1], "noise"),
                                         parse_number(parts[2], "noise"));
        } else if (kind == "over_rotation" || kind == "z_rotation" || kind == "dephasing") {
            ErrorModel em = ErrorModel::parse(kind);
            if (!arg.empty()) {
                double v = parse_number(arg, "noise");
                if (kind == "dephasing") {
                    em.dephasing_alpha = v;
                } else {
                    em.rotation_offset = v;
                }
            }
            n.model = em;
        } else {
            throw UsageError("unknown noise '" + text +
                             "' (expected ideal, depolarizing:P, pauli:X,Y,Z, over_rotation, z_rotation or dephasing)");
        }
        return n;
    }

    GateNoise build(std::optional<int> row) const {
        if (gate_level) return GateNoise::gate_level(*gate_level);
        if (!row) throw UsageError("pulse_row is required for pulse-level noise '" + text + "'");
        return GateNoise::pulse_level(*row, *model);
    }
};

inline std::vector<int> default_lengths() { return RBConfig{}.lengths; }

// ---------------------------------------------------------------------------------------
// Commands. Each returns the tables to emit; diagnostics go to `log`.

inline std::vector<Table> cmd_markov(int max_m) {
    Table t{"markov", {"m", "label", "probability", "tv_c12", "tv_sqrt_z_c12"}, {}};
    auto subsets = design_subsets();
    auto c12 = CircuitDistribution::uniform_over(subsets.c12);
    auto sz = CircuitDistribution::uniform_over(subsets.sqrt_z_c12);
    for (int m = 1; m <= max_m; ++m) {
        auto d = circuit_distribution(m);
        double tv_a = d.total_variation(c12), tv_b = d.total_variation(sz);
        for (int k = 0; k < kCliffordOrder; ++k) {
            t.add({static_cast<long long>(m), static_cast<long long>(k), d.probs[k], tv_a, tv_b});
        }
    }
    return {t};
}

inline std::string fixed_like(double value, const std::string &printed) {
    auto dot = printed.find('.');
    int decimals = dot == std::string::npos ? 0 : static_cast<int>(printed.size() - dot - 1);
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::fixed << std::setprecision(decimals) << value;
    return os.str();
}

inline std::vector<Table> cmd_decompose(const std::vector<int> &rows, const std::vector<std::string> &gatesets,
                                        const std::string &convention, std::ostream &log) {
    Table dec{"decompositions", {"row", "gateset", "gate_label", "pulse_string", "noisy_count"}, {}};
    Table avg{"averages", {"row", "gateset", "convention", "mean_noisy_count", "target", "pass"}, {}};
    for (int row : rows) {
        PulseSet ps = pulse_set(row);
        for (const std::string &gname : gatesets) {
            Gateset gs = parse_gateset(gname);
            if (gs != Gateset::clifford && gs != Gateset::nist) throw UsageError("decompose supports gatesets C and N");
            CompilationConvention conv =
                convention == "calibrated" ? calibrated_convention(row, gs) : parse_convention(convention);
            auto d = decompose_gateset(gs, ps, conv);
            for (const auto &r : d.realizations) {
                dec.add({static_cast<long long>(row), std::string(gname), static_cast<long long>(r.gate.index),
                         r.pulse_string(), static_cast<long long>(r.noisy_count)});
            }
            const std::string target = ps.target_printed(gs);
            const double mean = d.mean_noisy_count();
            const bool pass = matches_printed(mean, target);
            avg.add({static_cast<long long>(row), std::string(gname), std::string(convention_name(conv)), mean, target,
                     std::string(pass ? "PASS" : "FAIL")});
            log << "row " << row << " " << gname << " " << convention_name(conv) << ": mean " << fixed_like(mean, target)
                << " target " << target << " " << (pass ? "PASS" : "FAIL") << '\n';
        }
    }
    return {dec, avg};
}

struct SimulateOptions {
    std::string protocol;
    std::string noise;
    std::optional<int> pulse_row;
    std::vector<int> lengths = default_lengths();
    int sequences = 30;
    std::string shots = "exact";
    bool exact_average = false;
    bool randomized_recovery = true;
    bool sample_pulses = false;
    std::string fix_b = "auto";
    std::optional<int> min_fit_length;
};

inline std::vector<Table> cmd_simulate(const SimulateOptions &o, const CommonOptions &common) {
    NoiseSpec spec = NoiseSpec::parse(o.noise);
    if (spec.gate_level && o.pulse_row) throw UsageError("pulse_row only applies to pulse-level noise");
    GateNoise noise = spec.build(o.pulse_row);

    RBConfig cfg;
    cfg.protocol = parse_protocol(o.protocol);
    cfg.lengths = o.lengths;
    cfg.sequences_per_length = o.sequences;
    if (o.shots != "exact") {
        cfg.shots = static_cast<int>(parse_number(o.shots, "shots"));
    }
    cfg.exact_average = o.exact_average;
    cfg.randomized_recovery = o.randomized_recovery;
    cfg.sample_pulses = o.sample_pulses;
    cfg.seed = common.seed;
    cfg.threads = common.threads;
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }

    DecayDataset ds = run_experiment(cfg, noise);

    std::optional<double> fix_b;
    if (o.fix_b == "auto") {
        if (cfg.randomized_recovery) fix_b = 0.5;
    } else if (o.fix_b != "none") {
        fix_b = parse_number(o.fix_b, "fix_b");
    }
    const int min_len = o.min_fit_length.value_or(cfg.protocol == Protocol::nist ? 8 : 1);
    DecayFit fit = fit_decay(ds, fix_b, min_len);

    const std::string proto(protocol_name(cfg.protocol));
    const std::string row = o.pulse_row ? std::to_string(*o.pulse_row) : "abstract";
    const std::string shots = cfg.shots ? std::to_string(*cfg.shots) : "exact";
    Table data{"dataset",
               {"protocol", "pulse_row", "error_model", "m", "mean_survival", "stderr", "n_sequences", "shots"},
               {}};
    for (const auto &pt : ds.points) {
        data.add({proto, row, o.noise, static_cast<long long>(pt.length), pt.mean, pt.stderr_,
                  static_cast<long long>(pt.n_sequences), shots});
    }
    Table f{"fit", {"protocol", "pulse_row", "error_model", "A", "B", "p", "r", "residual", "ci_halfwidth"}, {}};
    f.add({proto, row, o.noise, fit.A, fit.B, fit.p, fit.r, fit.residual, fit.ci_halfwidth});
    return {data, f};
}

struct SweepOptions {
    std::vector<std::string> models{"over_rotation", "z_rotation", "dephasing"};
    std::string rows = "1-9";
    std::vector<int> lengths = default_lengths();
    bool sampled = false;
    int sequences = 30;
    std::optional<int> shots;
    bool sample_pulses = false;
    int nist_min_length = 8;
};

inline std::vector<Table> cmd_sweep(const SweepOptions &o, const CommonOptions &common) {
    std::vector<ErrorModel> models;
    for (const auto &m : o.models) {
        if (m != "over_rotation" && m != "z_rotation" && m != "dephasing") {
            throw UsageError("sweep models are over_rotation, z_rotation and dephasing, got '" + m + "'");
        }
        models.push_back(ErrorModel::parse(m));
    }
    const std::vector<int> rows = parse_rows(o.rows);

    struct Task {
        size_t model;
        int row;
    };
    std::vector<Task> tasks;
    for (size_t mi = 0; mi < models.size(); ++mi)
        for (int r : rows) tasks.push_back({mi, r});

    struct Result {
        double n_c = 0, n_n = 0, r_c = 0, r_n = 0;
    };
    std::vector<Result> results(tasks.size());

    auto run_task = [&](size_t i, int inner_threads) {
        const Task &t = tasks[i];
        GateNoise noise = GateNoise::pulse_level(t.row, models[t.model]);
        auto estimate = [&](Protocol proto) {
            DecayDataset ds;
            if (o.sampled) {
                RBConfig cfg;
                cfg.protocol = proto;
                cfg.lengths = o.lengths;
                cfg.sequences_per_length = o.sequences;
                cfg.shots = o.shots;
                cfg.sample_pulses = o.sample_pulses;
                cfg.threads = inner_threads;
                cfg.seed = derive_rng(common.seed, i, proto == Protocol::nist)();
                ds = run_experiment(cfg, noise);
            } else {
                ds = exact_average_survival(proto, o.lengths, noise);
            }
            return fit_decay(ds, 0.5, proto == Protocol::nist ? o.nist_min_length : 1).r;
        };
        Result &res = results[i];
        res.n_c = noise.clifford_decomposition()->mean_noisy_count();
        res.n_n = noise.nist_decomposition()->mean_noisy_count();
        res.r_c = estimate(Protocol::srb);
        res.r_n = estimate(Protocol::nist);
    };
    if (o.sampled) {
        for (size_t i = 0; i < tasks.size(); ++i) run_task(i, common.threads);
    } else {
        parallel_for(static_cast<int>(tasks.size()), common.threads, [&](int i) { run_task(i, 1); });
    }

    Table t{"sweep", {"model", "row", "n_C", "n_N", "r_C", "r_N", "r_C_over_n_C", "r_N_over_n_N", "ratio"}, {}};
    for (size_t i = 0; i < tasks.size(); ++i) {
        const Result &r = results[i];
        t.add({models[tasks[i].model].name(), static_cast<long long>(tasks[i].row), r.n_c, r.n_n, r.r_c, r.r_n,
               r.r_c / r.n_c, r.r_n / r.n_n, std::max(r.r_c, r.r_n) / std::min(r.r_c, r.r_n)});
    }
    return {t};
}

inline std::vector<Table> cmd_spectral(const std::string &gateset_text, const std::string &noise_text,
                                       std::optional<int> row) {
    Gateset gs = parse_gateset(gateset_text);
    NoiseSpec spec = NoiseSpec::parse(noise_text);
    GateNoise noise = spec.build(row);
    const Protocol proto = gs == Gateset::nist ? Protocol::nist : Protocol::srb;
    const auto gates = gateset_labels(gs);
    NoisyImplementation impl = [&](GateLabel g) { return noise.expected_gate(proto, g); };

    Table t{"spectral", {"context", "eigenvalue_index", "real", "imag"}, {}};
    Superop avg = averaged_superop(gates, impl);
    auto ev = spectrum(avg);
    for (size_t k = 0; k < ev.size(); ++k) {
        t.add({std::string("averaged_superop"), static_cast<long long>(k), ev[k].real(), ev[k].imag()});
    }
    if (gs == Gateset::nist && spec.gate_level) {
        const Matrix4 &l = spec.gate_level->matrix();
        auto m = recursion_spectrum(recursion_matrix(l(1, 1), l(2, 2), l(3, 3)));
        for (size_t k = 0; k < m.size(); ++k) {
            t.add({std::string("recursion_matrix"), static_cast<long long>(k), m[k].real(), m[k].imag()});
        }
    }
    const double p = decay_eigenvalue(avg);
    LAnalysis la = compute_L(gates, impl, std::min(p, 1.0));
    for (int k = 0; k < 3; ++k) {
        t.add({std::string("L_singular_values"), static_cast<long long>(k), la.singular_values(k), 0.0});
    }
    t.add({std::string("L_singular_spread"), 0LL, la.singular_spread, 0.0});
    return {t};
}

// ---------------------------------------------------------------------------------------
// Entry point

inline void print_usage(std::ostream &os) {
    os << "rblab " << kVersion << ": single-qubit randomized benchmarking lab\n\n"
       << "usage: rblab <command> [options]\n\n"
       << "commands:\n"
       << "  markov     distribution of aggregate NIST circuits over the Cliffords\n"
       << "  decompose  pulse decompositions and average noisy-pulse counts\n"
       << "  simulate   run one benchmarking experiment and fit its decay\n"
       << "  sweep      compare SRB and NIST infidelities across error models and pulse sets\n"
       << "  spectral   spectra of averaged superoperators and the L fixed point\n\n"
       << "run 'rblab <command> --help' for options. Exit codes: 0 ok, 2 usage, 3 analysis failure.\n";
}

/// Runs the CLI; returns the process exit code.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    if (argc < 2) {
        print_usage(err);
        return kUsage;
    }
    const std::string command = argv[1];
    if (command == "--help" || command == "-h" || command == "help") {
        print_usage(out);
        return kOk;
    }
    if (command == "--version") {
        out << "rblab " << kVersion << '\n';
        return kOk;
    }

    CLI::App app{"rblab " + command, "rblab " + command};
    app.option_defaults()->always_capture_default();
    CommonOptions common;
    add_common_options(app, common);

    int max_m = 40;
    std::vector<int> rows;
    std::vector<std::string> gatesets{"C", "N"};
    std::string convention = "calibrated";
    SimulateOptions sim;
    SweepOptions sweep;
    std::string spectral_gateset = "N", spectral_noise = "ideal";
    std::optional<int> spectral_row;

    if (command == "markov") {
        app.description("Exact distribution of the aggregate NIST circuit for m = 1..max_m");
        app.add_option("--max-m", max_m, "Largest sequence length")->check(CLI::Range(1, 100000));
    } else if (command == "decompose") {
        app.description("Pulse decompositions of the Clifford and NIST gatesets");
        rows.clear();
        for (int r = 1; r <= kPulseSetCount; ++r) rows.push_back(r);
        app.add_option("--row", rows, "Pulse set rows")->delimiter(',')->check(CLI::Range(1, kPulseSetCount));
        app.add_option("--gateset", gatesets, "Gatesets (C, N)")->delimiter(',')->check(CLI::IsMember({"C", "N"}));
        app.add_option("--convention", convention, "calibrated, global-min, pauli-first or global-min-nonempty")
            ->check(CLI::IsMember({"calibrated", "global-min", "pauli-first", "global-min-nonempty"}));
    } else if (command == "simulate") {
        app.description("Simulate one protocol and fit its decay");
        app.set_config("--config", "", "Flat key = value config file; flags override it");
        app.allow_config_extras(CLI::config_extras_mode::error);
        app.add_option("--protocol", sim.protocol, "SRB or NIST")->required()->check(CLI::IsMember({"SRB", "NIST"}));
        app.add_option("--noise", sim.noise, "ideal, depolarizing:P, pauli:X,Y,Z, over_rotation, z_rotation, dephasing")
            ->required();
        app.add_option("--pulse_row", sim.pulse_row, "Pulse set row for pulse-level noise")
            ->check(CLI::Range(1, kPulseSetCount));
        app.add_option("--lengths", sim.lengths, "Sequence lengths")->delimiter(',');
        app.add_option("--sequences", sim.sequences, "Sequences per length");
        app.add_option("--shots", sim.shots, "Shots per sequence or 'exact'");
        app.add_option("--exact_average", sim.exact_average, "Exact expectation over all sequences");
        app.add_option("--randomized_recovery", sim.randomized_recovery, "Random X flip in the recovery gate");
        app.add_option("--sample_pulses", sim.sample_pulses, "Draw pulse realisations and pi directions");
        app.add_option("--fix_b", sim.fix_b, "auto, none or a value for the fit offset");
        app.add_option("--min_fit_length", sim.min_fit_length, "Shortest length used by the fit");
    } else if (command == "sweep") {
        app.description("SRB versus NIST infidelities for each error model and pulse set");
        app.add_option("--models", sweep.models, "Error models")->delimiter(',');
        app.add_option("--rows", sweep.rows, "Pulse set rows, e.g. 1-9 or 2,4,7; empty for none");
        app.add_option("--lengths", sweep.lengths, "Sequence lengths")->delimiter(',');
        app.add_flag("--sampled", sweep.sampled, "Sample sequences instead of averaging exactly");
        app.add_option("--sequences", sweep.sequences, "Sequences per length when sampling");
        app.add_option("--shots", sweep.shots, "Shots per sequence when sampling");
        app.add_flag("--sample-pulses", sweep.sample_pulses, "Draw pulse realisations when sampling");
        app.add_option("--nist-min-length", sweep.nist_min_length, "Shortest length in NIST fits");
    } else if (command == "spectral") {
        app.description("Eigenvalues of the averaged superoperator, the recursion matrix and L");
        app.add_option("--gateset", spectral_gateset, "P, C, N, C12 or sqrtZ_C12")
            ->check(CLI::IsMember({"P", "C", "N", "C12", "sqrtZ_C12"}));
        app.add_option("--noise", spectral_noise, "Noise description as for simulate");
        app.add_option("--pulse_row,--row", spectral_row, "Pulse set row for pulse-level noise")
            ->check(CLI::Range(1, kPulseSetCount));
    } else {
        err << "rblab: unknown command '" << command << "'\n\n";
        print_usage(err);
        return kUsage;
    }

    try {
        app.parse(argc - 1, argv + 1);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "rblab " << command << ": " << e.what() << '\n';
        return kUsage;
    }

    const auto start = std::chrono::system_clock::now();
    try {
        Sink sink(command, common, out);
        std::vector<Table> tables;
        if (command == "markov") {
            tables = cmd_markov(max_m);
        } else if (command == "decompose") {
            tables = cmd_decompose(rows, gatesets, convention, err);
        } else if (command == "simulate") {
            tables = cmd_simulate(sim, common);
        } else if (command == "sweep") {
            tables = cmd_sweep(sweep, common);
        } else {
            tables = cmd_spectral(spectral_gateset, spectral_noise, spectral_row);
        }
        sink.emit(tables);
        sink.write_manifest(app, common.seed, start);
    } catch (const UsageError &e) {
        err << "rblab " << command << ": " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument &e) {
        err << "rblab " << command << ": " << e.what() << '\n';
        return kUsage;
    } catch (const std::out_of_range &e) {
        err << "rblab " << command << ": " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception &e) {
        err << "rblab " << command << ": analysis failed: " << e.what() << '\n';
        return kAnalysis;
    }
    return kOk;
}

}  // namespace rblab::cli

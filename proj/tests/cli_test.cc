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

// End-to-end runs of the rblab binary.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

#include "json.hpp"
#include "rblab/theory.hpp"

namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("rblab_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Invocation run(const std::string &args, const std::string &env = "env -u RBLAB_OUTPUT_DIR") {
        const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
        std::string cmd = env + " " + RBLAB_CLI_PATH + " " + args + " > " + out.string() + " 2> " + err.string();
        int status = std::system(cmd.c_str());
        Invocation r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path write(const std::string &name, const std::string &text) {
        fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir_;
};

std::vector<std::vector<std::string>> parse_csv(const std::string &text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) break;
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (char c : line) {
            if (c == '"') {
                quoted = !quoted;
            } else if (c == ',' && !quoted) {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell += c;
            }
        }
        cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

int column(const std::vector<std::string> &header, const std::string &name) {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    ADD_FAILURE() << "no column " << name;
    return 0;
}

}  // namespace

TEST_F(CliTest, usage_and_unknown_commands) {
    EXPECT_EQ(run("").code, 2);
    auto help = run("--help");
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("simulate"), std::string::npos);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("sweep --bogus").code, 2);
    EXPECT_EQ(run("simulate --help").code, 0);
}

TEST_F(CliTest, markov_length_one) {
    auto r = run("markov --max-m 1");
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 25u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"m", "label", "probability", "tv_c12", "tv_sqrt_z_c12"}));
    int eighths = 0;
    for (size_t i = 1; i < rows.size(); ++i) {
        double p = std::stod(rows[i][2]);
        eighths += p == 0.125;
        EXPECT_TRUE(p == 0.125 || p == 0) << p;
    }
    EXPECT_EQ(eighths, 8);
}

TEST_F(CliTest, markov_converges_and_rejects_zero) {
    auto r = run("markov");
    ASSERT_EQ(r.code, 0);
    auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 1u + 40 * 24);
    EXPECT_LT(std::stod(rows.back()[3]), 1e-10);
    EXPECT_EQ(run("markov --max-m 0").code, 2);
}

TEST_F(CliTest, decompose_reports_averages) {
    auto r = run("decompose --row 7,9 --gateset N");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("row 7 N pauli-first: mean 2.0 target 2.0 PASS"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("row 9 N pauli-first: mean 1.5 target 1.5 PASS"), std::string::npos) << r.err;
    auto c = run("decompose --row 1 --gateset C");
    EXPECT_NE(c.err.find("mean 3.08333 target 3.08333 PASS"), std::string::npos) << c.err;

    // Decompositions first, averages after a blank line.
    auto blank = r.out.find("\n\n");
    ASSERT_NE(blank, std::string::npos);
    auto dec = parse_csv(r.out.substr(0, blank + 1));
    EXPECT_EQ(dec.size(), 1u + 2 * 16);
    auto avg = parse_csv(r.out.substr(blank + 2));
    ASSERT_EQ(avg.size(), 3u);
    EXPECT_EQ(avg[1][5], "PASS");
}

TEST_F(CliTest, decompose_writes_sibling_file) {
    auto r = run("decompose --output " + (dir_ / "dec.csv").string());
    ASSERT_EQ(r.code, 0) << r.err;
    auto avg = parse_csv(slurp(dir_ / "dec.averages.csv"));
    ASSERT_EQ(avg.size(), 1u + 9 * 2);
    for (size_t i = 1; i < avg.size(); ++i) EXPECT_EQ(avg[i][5], "PASS") << avg[i][0] << " " << avg[i][1];
    EXPECT_TRUE(fs::exists(dir_ / "dec.csv.manifest.json"));
}

TEST_F(CliTest, simulate_depolarizing_from_config) {
    auto cfg = write("srb.cfg", "protocol = SRB\nnoise = depolarizing:0.99\nexact_average = true\n");
    auto r = run("simulate --config " + cfg.string());
    ASSERT_EQ(r.code, 0) << r.err;
    auto blank = r.out.find("\n\n");
    ASSERT_NE(blank, std::string::npos);
    auto fit = parse_csv(r.out.substr(blank + 2));
    ASSERT_EQ(fit.size(), 2u);
    EXPECT_NEAR(std::stod(fit[1][column(fit[0], "p")]), 0.99, 1e-6);
    EXPECT_NEAR(std::stod(fit[1][column(fit[0], "r")]), 0.005, 1e-6);

    // Flags override the file.
    auto nist = run("simulate --config " + cfg.string() + " --protocol NIST --noise pauli:0.99,0.98,0.985");
    ASSERT_EQ(nist.code, 0) << nist.err;
    auto nfit = parse_csv(nist.out.substr(nist.out.find("\n\n") + 2));
    EXPECT_EQ(nfit[1][0], "NIST");
    EXPECT_NEAR(std::stod(nfit[1][column(nfit[0], "p")]), rblab::nist_decay_parameter(0.99, 0.98, 0.985).p_nist, 1e-6);
}

TEST_F(CliTest, simulate_config_errors) {
    auto missing = run("simulate --config " + write("a.cfg", "noise = ideal\n").string());
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("protocol"), std::string::npos) << missing.err;
    auto extra = run("simulate --config " + write("b.cfg", "protocol = SRB\nnoise = ideal\ncolour = red\n").string());
    EXPECT_EQ(extra.code, 2);
    EXPECT_EQ(run("simulate --config " + (dir_ / "absent.cfg").string()).code, 2);
    auto row = run("simulate --protocol SRB --noise dephasing");
    EXPECT_EQ(row.code, 2);
    EXPECT_NE(row.err.find("pulse_row"), std::string::npos);
    EXPECT_EQ(run("simulate --protocol SRB --noise gaussian").code, 2);
    EXPECT_EQ(run("simulate --protocol SRB --noise ideal --sequences 0").code, 2);
}

TEST_F(CliTest, unidentifiable_fit_is_an_analysis_failure) {
    auto r = run("simulate --protocol SRB --noise ideal --exact_average true --fix_b none");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("unidentifiable"), std::string::npos) << r.err;
}

TEST_F(CliTest, unwritable_output_is_a_usage_error) {
    auto r = run("markov --max-m 1 --output " + (dir_ / "no" / "such" / "dir.csv").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("cannot write"), std::string::npos);
}

TEST_F(CliTest, sweep_with_no_rows_prints_header_only) {
    auto r = run("sweep --rows ''");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "model,row,n_C,n_N,r_C,r_N,r_C_over_n_C,r_N_over_n_N,ratio\n");
    EXPECT_EQ(run("sweep --rows 10").code, 2);
    EXPECT_EQ(run("sweep --models depolarizing").code, 2);
}

TEST_F(CliTest, sweep_is_byte_identical_across_runs_and_threads) {
    const std::string args = "sweep --sampled --sequences 20 --shots 100 --rows 2,7 --seed 11 --output ";
    ASSERT_EQ(run(args + (dir_ / "a.csv").string() + " --threads 1").code, 0);
    ASSERT_EQ(run(args + (dir_ / "b.csv").string() + " --threads 3").code, 0);
    ASSERT_EQ(run(args + (dir_ / "c.csv").string() + " --threads 3").code, 0);
    EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
    EXPECT_EQ(slurp(dir_ / "b.csv"), slurp(dir_ / "c.csv"));
    ASSERT_EQ(run("sweep --sampled --sequences 20 --shots 100 --rows 2,7 --seed 12 --output " + (dir_ / "d.csv").string())
                  .code,
              0);
    EXPECT_NE(slurp(dir_ / "a.csv"), slurp(dir_ / "d.csv"));
}

TEST_F(CliTest, spectral_ideal_nist) {
    auto r = run("spectral --gateset N --noise ideal");
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = parse_csv(r.out);
    std::vector<double> nonzero, recursion;
    for (size_t i = 1; i < rows.size(); ++i) {
        double re = std::stod(rows[i][2]), im = std::stod(rows[i][3]);
        if (rows[i][0] == "averaged_superop" && std::hypot(re, im) > 1e-8) nonzero.push_back(re);
        if (rows[i][0] == "recursion_matrix") recursion.push_back(re);
        if (rows[i][0] == "L_singular_spread") {
            EXPECT_NEAR(re, 1, 1e-12);
        }
    }
    ASSERT_EQ(nonzero.size(), 4u);
    EXPECT_NEAR(nonzero[0], 1, 1e-10);
    EXPECT_NEAR(nonzero[1], 1, 1e-10);
    EXPECT_NEAR(nonzero[2], 0.5, 1e-10);
    EXPECT_NEAR(nonzero[3], -0.5, 1e-10);
    EXPECT_EQ(recursion.size(), 3u);
    EXPECT_EQ(run("spectral --gateset N --noise dephasing").code, 2);
    EXPECT_EQ(run("spectral --gateset C --noise dephasing --row 4").code, 0);
}

TEST_F(CliTest, json_output_mirrors_csv) {
    auto csv = run("markov --max-m 2");
    auto js = run("markov --max-m 2 --format json");
    ASSERT_EQ(js.code, 0) << js.err;
    auto rows = parse_csv(csv.out);
    auto doc = nlohmann::json::parse(js.out);
    ASSERT_EQ(doc.size(), rows.size() - 1);
    for (size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(doc[i - 1]["m"].get<int>(), std::stoi(rows[i][0]));
        EXPECT_EQ(doc[i - 1]["probability"].get<double>(), std::stod(rows[i][2]));
    }
}

TEST_F(CliTest, output_directory_from_environment_and_manifest) {
    auto r = run("markov --max-m 3 --seed 5", "RBLAB_OUTPUT_DIR=" + dir_.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    ASSERT_TRUE(fs::exists(dir_ / "markov.csv"));
    auto manifest = nlohmann::json::parse(slurp(dir_ / "markov.csv.manifest.json"));
    EXPECT_EQ(manifest["command"], "markov");
    EXPECT_EQ(manifest["seed"], 5);
    EXPECT_EQ(manifest["config"]["max-m"], "3");
    EXPECT_EQ(manifest["config"]["threads"].get<std::string>().empty(), false);
    EXPECT_FALSE(manifest["version"].get<std::string>().empty());
    EXPECT_EQ(manifest["started"].get<std::string>().back(), 'Z');
    EXPECT_EQ(parse_csv(slurp(dir_ / "markov.csv")).size(), 1u + 3 * 24);
}

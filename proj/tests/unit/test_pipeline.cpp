// Copyright 2026 The squeezemag Authors
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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "squeezemag/io.hpp"
#include "squeezemag/pipeline.hpp"

namespace squeezemag {
namespace {

namespace fs = std::filesystem;

RunConfig small_config(int workers) {
    RunConfig c;
    c.lattice.n_sites = 5;
    c.lattice.atom_number_law = {AtomNumberLaw::Kind::Uniform, 40, 70, {}};
    c.sequence = make_oat_sequence(10e-3, 0.1);
    c.loss.enabled = true;
    c.loss.n_trajectories = 1;
    c.noise.longterm_enabled = true;
    c.noise.longterm_block_size = 3;
    c.n_shots = 10;
    c.master_seed = 42;
    c.workers = workers;
    return c;
}

std::string csv_of(const RunConfig &c) {
    std::ostringstream out;
    write_shots_csv(out, simulate(c).records[0]);
    return out.str();
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string &args) {
    const std::string cmd = std::string("\"") + SQUEEZEMAG_CLI + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Pipeline, WorkerCountDoesNotChangeRecords) {
    EXPECT_EQ(csv_of(small_config(1)), csv_of(small_config(8)));
}

TEST(Pipeline, SeedSelectsTheRun) {
    auto c = small_config(1);
    const auto a = csv_of(c);
    EXPECT_EQ(a, csv_of(c));
    c.master_seed = 43;
    EXPECT_NE(a, csv_of(c));
}

TEST(Pipeline, NoiselessUnrotatedRecordIsDeterministic) {
    RunConfig c;
    c.lattice.n_sites = 3;
    c.lattice.atom_number_law = {AtomNumberLaw::Kind::Fixed, 0, 0, {310, 420, 599}};
    c.noise = NoiseConfig::none();
    c.sequence = Sequence{"readout", {step::Readout::tomography(0.0)}};
    c.n_shots = 1;
    const auto rec = simulate(c).records[0].at(0);
    ASSERT_EQ(rec.sites.size(), 3u);
    const int n[3] = {310, 420, 599};
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(rec.sites[i].n_a_true, n[i]);
        EXPECT_EQ(rec.sites[i].n_b_true, 0);
        EXPECT_EQ(rec.sites[i].n_a_det, n[i]);
        EXPECT_EQ(rec.sites[i].n_b_det, 0.0);
    }
}

TEST(Pipeline, ShotInvariantShortcutMatchesFullRun) {
    RunConfig c;
    c.lattice.n_sites = 3;
    c.lattice.atom_number_law = {AtomNumberLaw::Kind::Uniform, 50, 80, {}};
    c.noise = NoiseConfig::none();
    c.noise.detection_sigma = 2.0;
    c.sequence = make_oat_sequence(10e-3, 0.3);
    c.n_shots = 5;
    ASSERT_TRUE(shot_invariant(c));
    const auto fast = simulate(c);
    // A vanishing pulse detuning disables the shortcut without changing any amplitude.
    c.noise.pulse_detuning_sigma = 1e-300;
    ASSERT_FALSE(shot_invariant(c));
    const auto slow = simulate(c);
    std::ostringstream a, b;
    write_shots_csv(a, fast.records[0]);
    write_shots_csv(b, slow.records[0]);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Cli, WorkerCountDoesNotChangeOutput) {
    const auto dir = fs::temp_directory_path() / "squeezemag_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << config_to_json(small_config(1)).dump(2);
    const std::string cfg = "--config \"" + (dir / "config.json").string() + "\"";
    ASSERT_EQ(run_cli("simulate " + cfg + " --workers 1 --out \"" + (dir / "w1").string() + "\""), 0);
    ASSERT_EQ(run_cli("simulate " + cfg + " --workers 8 --out \"" + (dir / "w8").string() + "\""), 0);
    const auto w1 = slurp(dir / "w1" / "shots.csv");
    EXPECT_FALSE(w1.empty());
    EXPECT_EQ(w1, slurp(dir / "w8" / "shots.csv"));
    EXPECT_EQ(w1, csv_of(small_config(1)));
    const auto manifest = nlohmann::json::parse(slurp(dir / "w1" / "manifest.json"));
    EXPECT_EQ(manifest["files"].size(), 3u);
    EXPECT_EQ(manifest["seed"], 42);

    ASSERT_EQ(run_cli("analyze \"" + (dir / "w1" / "shots.csv").string() + "\" --out \"" + (dir / "an").string() +
                      "\""),
              0);
    EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "an" / "results.json")).contains("xi2_rel"));
}

TEST(Cli, BadInputsExitWithTwo) {
    const auto dir = fs::temp_directory_path() / "squeezemag_cli_bad";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << R"({"lattice": {"n_sites": 25, "sites": 3}})";
    std::ofstream(dir / "bad.csv") << "not,a,shot,file\n";
    const std::string out = " --out \"" + (dir / "o").string() + "\"";
    EXPECT_EQ(run_cli("simulate --config \"" + (dir / "bad.json").string() + "\"" + out), 2);
    EXPECT_EQ(run_cli("analyze \"" + (dir / "bad.csv").string() + "\"" + out), 2);
    EXPECT_EQ(run_cli("reproduce no_such_target" + out), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("--help"), 0);
}

}  // namespace
}  // namespace squeezemag

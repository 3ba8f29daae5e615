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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "squeezemag/error.hpp"
#include "squeezemag/estimators.hpp"
#include "squeezemag/io.hpp"

namespace squeezemag {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("squeezemag_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Numbers equal to relative 1e-12; everything else exactly.
void expect_json_close(const json &a, const json &b, const std::string &path = "") {
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>(), y = b.get<double>();
        EXPECT_NEAR(x, y, 1e-12 * std::max(1.0, std::abs(x))) << path;
        return;
    }
    ASSERT_EQ(a.type(), b.type()) << path;
    if (a.is_object()) {
        ASSERT_EQ(a.size(), b.size()) << path;
        for (auto it = a.begin(); it != a.end(); ++it) {
            ASSERT_TRUE(b.contains(it.key())) << path << "/" << it.key();
            expect_json_close(it.value(), b[it.key()], path + "/" + it.key());
        }
    } else if (a.is_array()) {
        ASSERT_EQ(a.size(), b.size()) << path;
        for (std::size_t i = 0; i < a.size(); ++i) expect_json_close(a[i], b[i], path + "/" + std::to_string(i));
    } else {
        EXPECT_EQ(a, b) << path;
    }
}

ShotRecord golden_record() {
    ShotRecord r;
    r.run_id = 7;
    r.shot_index = 3;
    r.sites = {{212, 188, 215.03125, 184.5}, {0, 450, -2.25, 451.0000000000001}};
    return r;
}

TEST(Config, RoundTrip) {
    RunConfig c = reference_run_config();
    c.protocol.field_gradient = 19.6e-12;
    c.noise.gen_mode = GenDetuningMode::FieldDerived;
    c.sequence = make_ramsey_sequence(200e-6, step::Readout::ramsey(0.3));
    const auto j = config_to_json(c);
    const auto back = config_to_json(config_from_json(j));
    expect_json_close(j, back);
    expect_json_close(j, config_to_json(parse_config(j.dump())));
}

TEST(Config, SequencePresets) {
    const auto oat = sequence_from_json(json{{"preset", "oat"}, {"evolution_total_s", 0.02}, {"tomography_angle_deg", 10.0}});
    EXPECT_EQ(oat.steps.size(), 5u);
    EXPECT_NEAR(std::get<step::Readout>(oat.steps.back()).angle, units::deg_to_rad(10.0), 1e-15);
}

TEST(Config, UnknownKeyNamesThePath) {
    auto j = config_to_json(reference_run_config());
    j["noise"]["field_sigma_shot"] = 1.0;
    try {
        config_from_json(j);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.where()).find("noise"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("field_sigma_shot"), std::string::npos) << e.what();
    }
}

TEST(Config, WrongTypeNamesThePath) {
    auto j = config_to_json(reference_run_config());
    j["lattice"]["n_sites"] = "many";
    try {
        config_from_json(j);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("lattice.n_sites"), std::string::npos) << e.what();
    }
}

TEST(Config, InvalidValuesAreConfigErrors) {
    auto j = config_to_json(reference_run_config());
    j["n_shots"] = 0;
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = config_to_json(reference_run_config());
    j["noise"]["detection_sigma"] = -1.0;
    EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, SyntaxErrorReportsLine) {
    try {
        parse_config("{\n  \"n_shots\": 10,\n  \"workers\": ,\n}");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(ShotCsv, GoldenFile) {
    std::ostringstream out;
    write_shots_csv(out, {golden_record()});
    EXPECT_EQ(out.str(), slurp(fs::path(SQUEEZEMAG_TEST_DATA) / "golden_shot.csv"));
    std::ifstream in(fs::path(SQUEEZEMAG_TEST_DATA) / "golden_shot.csv");
    const auto shots = read_shots_csv(in);
    ASSERT_EQ(shots.size(), 1u);
    EXPECT_EQ(shots[0].run_id, 7u);
    EXPECT_EQ(shots[0].shot_index, 3);
    EXPECT_EQ(shots[0].sites[1].n_b_det, 451.0000000000001);
}

TEST(ShotCsv, RoundTripIsByteExact) {
    RunConfig c;
    c.lattice.n_sites = 4;
    c.lattice.atom_number_law = {AtomNumberLaw::Kind::Uniform, 30, 60, {}};
    c.sequence = make_oat_sequence(5e-3, 0.2);
    c.n_shots = 6;
    const auto batch = simulate(c);
    std::ostringstream a;
    write_shots_csv(a, batch.records[0]);
    std::istringstream in(a.str());
    const auto back = read_shots_csv(in);
    std::ostringstream b;
    write_shots_csv(b, back);
    EXPECT_EQ(a.str(), b.str());
}

TEST(ShotCsv, FormatDoubleIsShortestRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 451.0000000000001, 12.0})
        EXPECT_EQ(std::stod(format_double(x)), x);
    EXPECT_EQ(format_double(12.0), "12");
}

TEST(ShotCsv, MalformedRowsReportTheLine) {
    const std::string header = std::string(kShotCsvHeader) + "\n";
    auto row_of = [](const std::string &text) {
        std::istringstream in(text);
        try {
            read_shots_csv(in);
        } catch (const SchemaError &e) {
            return e.row();
        }
        return -1L;
    };
    EXPECT_EQ(row_of("a,b\n"), 1);
    EXPECT_EQ(row_of(header + "0,0,0,1,2,1,2\n0,0,1,1,2,1\n"), 3);
    EXPECT_EQ(row_of(header + "0,0,0,1,2,1,2\n0,0,1,x,2,1,2\n"), 3);
    EXPECT_EQ(row_of(header + "0,0,0,1,2,1,2\n0,0,2,1,2,1,2\n"), 3);
    EXPECT_EQ(row_of(header + "0,0,0,-1,2,1,2\n"), 2);
}

TEST(Analyze, MatchesInProcessEstimators) {
    auto r = testing::rng(140);
    std::vector<ShotRecord> shots;
    for (int s = 0; s < 80; ++s) {
        std::vector<std::pair<double, double>> ab;
        for (int i = 0; i < 6; ++i) {
            const int b = testing::binomial(300, 0.5, r);
            ab.push_back({300.0 - b + 4 * r.normal(), b + 4 * r.normal()});
        }
        shots.push_back(testing::make_shot(s, ab));
    }
    const json spec{{"bootstrap", {{"resamples", 150}, {"seed", 11}}}};
    const auto out = analyze_shots(shots, spec);
    const BootstrapOptions boot{150, 11, 1};
    const auto d = xi2_direct(shots, {0, 1, 2, 3, 4, 5}, 4.0, boot);
    const auto rel = xi2_rel(shots, {0, 1, 2}, {3, 4, 5}, 4.0, boot);
    EXPECT_NEAR(out["xi2_direct"]["value"].get<double>(), d.value, 1e-12);
    EXPECT_NEAR(out["xi2_direct"]["std_error"].get<double>(), d.std_error, 1e-12);
    EXPECT_NEAR(out["xi2_rel"]["value"].get<double>(), rel.value, 1e-12);
    EXPECT_NEAR(out["xi2_rel"]["std_error"].get<double>(), rel.std_error, 1e-12);
    EXPECT_EQ(out["n_shots"].get<int>(), 80);
    EXPECT_THROW(analyze_shots(shots, json{{"estimators", {"nope"}}}), ConfigError);
    EXPECT_THROW(analyze_shots(shots, json{{"left", {0, 9}}}), ConfigError);
}

TEST(Hash, KnownDigest) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto dir = scratch("hash");
    std::ofstream(dir / "f.txt") << "abc";
    EXPECT_EQ(sha256_file(dir / "f.txt"), sha256_hex("abc"));
}

TEST(Manifest, ListsFilesWithHashes) {
    const auto dir = scratch("manifest");
    std::ofstream(dir / "a.csv") << "x,y\n1,2\n";
    Manifest m;
    m.command = "simulate";
    m.seed = 9;
    m.add(dir, "a.csv");
    const auto j = m.to_json();
    EXPECT_EQ(j["version"], kVersion);
    EXPECT_EQ(j["seed"], 9);
    ASSERT_EQ(j["files"].size(), 1u);
    EXPECT_EQ(j["files"][0]["sha256"], sha256_hex("x,y\n1,2\n"));
    EXPECT_EQ(j["files"][0]["bytes"], 8);
    EXPECT_EQ(utc_timestamp().back(), 'Z');
}

TEST(Figure, TablesPlotsAndSummary) {
    const auto dir = scratch("figure");
    FigureResult f{"demo", {}, {}, json{{"k", 1}}};
    f.tables.push_back({"t", {"x", "y"}, {{1, 2}, {10, std::nan("")}, {100, 8}}});
    f.plots.push_back({"t.svg", "t", "x", {"y"}, "demo & test", "x", "y", true, true});
    const auto files = write_figure(dir, f);
    EXPECT_EQ(files.size(), 3u);
    EXPECT_EQ(slurp(dir / "t.csv").substr(0, 4), "x,y\n");
    const auto svg = slurp(dir / "t.svg");
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("demo &amp; test"), std::string::npos);
    EXPECT_EQ(json::parse(slurp(dir / "summary.json"))["k"], 1);
}

}  // namespace
}  // namespace squeezemag

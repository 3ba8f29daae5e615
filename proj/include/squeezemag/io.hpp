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

// Files in and out: JSON run configs, the shot-record CSV, manifests, tables
// and SVG plots.
//
// Config units follow the interface convention: Hz, seconds, Tesla and
// degrees for angles. Keys that would be ambiguous carry a unit suffix.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "squeezemag/pipeline.hpp"
#include "squeezemag/reproduce.hpp"

namespace squeezemag {

inline constexpr const char *kVersion = "0.1.0";
inline constexpr const char *kShotCsvHeader = "run_id,shot,site,n_a_true,n_b_true,n_a_det,n_b_det";

// --- config ---------------------------------------------------------------

nlohmann::json config_to_json(const RunConfig &config);
/// Missing keys keep their defaults; unknown keys and wrong types throw
/// ConfigError naming the field path.
RunConfig config_from_json(const nlohmann::json &j);
/// Parses and validates; syntax errors report line and column.
RunConfig load_config(const std::filesystem::path &path);
RunConfig parse_config(const std::string &text);

nlohmann::json sequence_to_json(const Sequence &seq);
Sequence sequence_from_json(const nlohmann::json &j, const std::string &where = "sequence");

// --- shot records ---------------------------------------------------------

/// Shortest round-trip decimal form.
std::string format_double(double x);

void write_shots_csv(std::ostream &out, const std::vector<ShotRecord> &shots);
/// Throws SchemaError with the 1-based line number (the header is line 1).
std::vector<ShotRecord> read_shots_csv(std::istream &in);

/// Per-shot technical noise draws: shot, field_offset_T, drift_offset_T, gen_detuning_hz, pulse_detuning_hz.
void write_noise_csv(std::ostream &out, const std::vector<ShotRecord> &shots);

// --- analysis of stored records -------------------------------------------

/// Analysis spec keys (all optional): estimators (subset of xi2_direct,
/// xi2_rel, dz), left / right site lists (default: halves), region (default:
/// all sites), detection_sigma (default 4), bootstrap {resamples, seed}.
nlohmann::json analyze_shots(const std::vector<ShotRecord> &shots, const nlohmann::json &spec);

// --- hashes and manifest --------------------------------------------------

std::string sha256_hex(const std::string &data);
std::string sha256_file(const std::filesystem::path &path);

struct ManifestEntry {
    std::string file;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct Manifest {
    std::string command;
    std::string config_hash;
    std::string version = kVersion;
    std::string started;
    std::string finished;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> files;

    nlohmann::json to_json() const;
    /// Hashes `file` (relative to dir) and appends it.
    void add(const std::filesystem::path &dir, const std::string &file);
};

/// UTC, ISO 8601.
std::string utc_timestamp();

void write_json(const std::filesystem::path &path, const nlohmann::json &j);

// --- tables and plots -----------------------------------------------------

void write_table_csv(std::ostream &out, const Table &table);
/// Line/scatter rendering of selected columns; NaN points are skipped.
std::string render_svg(const PlotSpec &spec, const Table &table);

/// Writes <table>.csv for every table, the SVG plots and summary.json into
/// dir; returns the file names written.
std::vector<std::string> write_figure(const std::filesystem::path &dir, const FigureResult &result);

}  // namespace squeezemag

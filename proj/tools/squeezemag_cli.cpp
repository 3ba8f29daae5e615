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

// squeezemag command line: simulate, analyze, scan, reproduce, loss-floor.
// Exit codes: 0 ok, 2 config / usage error, 3 runtime or numerical error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "squeezemag/error.hpp"
#include "squeezemag/io.hpp"
#include "squeezemag/magnetometry.hpp"
#include "squeezemag/reproduce.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace squeezemag;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> shots;
    std::optional<int> workers;
    std::string out;
};

void add_common(CLI::App *app, Common &c, bool with_config = true) {
    if (with_config) app->add_option("--config", c.config, "Run config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--shots", c.shots, "Number of shots")->check(CLI::PositiveNumber);
    app->add_option("--workers", c.workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    app->add_option("--out", c.out, "Output directory (default: $SQUEEZEMAG_OUT/<command>)");
}

fs::path out_dir(const Common &c, const std::string &command) {
    fs::path dir;
    if (!c.out.empty()) {
        dir = c.out;
    } else if (const char *root = std::getenv("SQUEEZEMAG_OUT"); root && *root) {
        dir = fs::path(root) / command;
    } else {
        dir = fs::path("squeezemag_out") / command;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create output directory " + dir.string());
    return dir;
}

RunConfig resolve_config(const Common &c) {
    RunConfig config = c.config.empty() ? reference_run_config() : load_config(c.config);
    if (c.config.empty()) config.n_shots = 100;
    if (c.seed) config.master_seed = *c.seed;
    if (c.shots) config.n_shots = *c.shots;
    if (c.workers) config.workers = *c.workers;
    return config;
}

Manifest start_manifest(const std::string &command, const json &config, std::uint64_t seed) {
    Manifest m;
    m.command = command;
    m.config_hash = sha256_hex(config.dump());
    m.seed = seed;
    m.started = utc_timestamp();
    return m;
}

void finish_manifest(Manifest &m, const fs::path &dir, const std::vector<std::string> &files) {
    for (const auto &f : files) m.add(dir, f);
    m.finished = utc_timestamp();
    write_json(dir / "manifest.json", m.to_json());
}

std::ofstream open_out(const fs::path &p) {
    std::ofstream out(p);
    if (!out) throw InvalidArgument("cannot write " + p.string());
    return out;
}

int run_simulate(const Common &c) {
    const auto config = resolve_config(c);
    const auto dir = out_dir(c, "simulate");
    const auto cj = config_to_json(config);
    auto m = start_manifest("simulate", cj, config.master_seed);
    write_json(dir / "manifest.json", m.to_json());
    write_json(dir / "config.json", cj);
    const auto batch = simulate(config);
    {
        auto out = open_out(dir / "shots.csv");
        write_shots_csv(out, batch.records[0]);
        auto noise = open_out(dir / "noise.csv");
        write_noise_csv(noise, batch.records[0]);
    }
    finish_manifest(m, dir, {"config.json", "shots.csv", "noise.csv"});
    std::cout << "wrote " << batch.records[0].size() << " shots to " << (dir / "shots.csv").string() << "\n";
    return 0;
}

int run_analyze(const Common &c, const std::string &csv, const std::string &spec_path) {
    std::ifstream in(csv);
    if (!in) throw ConfigError(csv, "cannot open shot CSV");
    std::stringstream ss;
    ss << in.rdbuf();
    std::istringstream body(ss.str());
    const auto shots = read_shots_csv(body);
    json spec = json::object();
    if (!spec_path.empty()) {
        std::ifstream sp(spec_path);
        if (!sp) throw ConfigError(spec_path, "cannot open analysis spec");
        try {
            spec = json::parse(sp);
        } catch (const json::parse_error &e) {
            throw ConfigError(spec_path, e.what());
        }
    }
    if (c.seed) spec["bootstrap"]["seed"] = *c.seed;
    if (c.workers) spec["bootstrap"]["workers"] = *c.workers;
    auto result = analyze_shots(shots, spec);
    result["input"] = {{"file", csv}, {"sha256", sha256_hex(ss.str())}};
    result["spec"] = spec;
    const auto dir = out_dir(c, "analyze");
    write_json(dir / "results.json", result);
    std::cout << result.dump(2) << "\n";
    return 0;
}

int run_scan(const Common &c, const std::vector<double> &t_int_us, int fringe_phases) {
    const auto config = resolve_config(c);
    const auto dir = out_dir(c, "scan");
    const auto cj = config_to_json(config);
    auto m = start_manifest("scan", cj, config.master_seed);
    write_json(dir / "manifest.json", m.to_json());
    RamseyScanOptions so;
    for (double t : t_int_us) {
        const double hold = t * 1e-6 - 2.0 * so.ramsey.t_pi;
        if (!(hold >= 0)) throw ConfigError("--t-int", "interrogation time shorter than the two swap pulses");
        so.t_hold.push_back(hold);
    }
    so.fringe_phases = fringe_phases;
    so.bootstrap = {200, config.master_seed, config.workers};
    const auto rows = sensitivity_scan(config, so);
    FigureResult fig{"scan", {}, {}, json::object()};
    Table t{"sensitivity", {"x_value", "sigma_b_T", "ci_T", "sql_T", "sql_det_T", "enhancement"}, {}};
    for (const auto &r : rows) t.rows.push_back({r.x_value, r.sigma_b, r.ci, r.sql, r.sql_det, r.enhancement});
    fig.tables.push_back(t);
    fig.plots.push_back({"sensitivity.svg", "sensitivity", "x_value", {"sigma_b_T", "sql_T", "sql_det_T"},
                         "Field sensitivity", "t_int (s)", "sigma_B (T)", true, true});
    fig.summary = {{"rows", rows.size()}};
    write_json(dir / "config.json", cj);
    auto files = write_figure(dir, fig);
    files.push_back("config.json");
    finish_manifest(m, dir, files);
    std::cout << "wrote " << (dir / "sensitivity.csv").string() << "\n";
    return 0;
}

int run_reproduce(const Common &c, const std::string &target, int resamples) {
    ReproduceOptions o;
    if (c.seed) o.seed = *c.seed;
    if (c.shots) o.shots = *c.shots;
    if (c.workers) o.workers = *c.workers;
    o.bootstrap_resamples = resamples;
    const auto &targets = reproduce_targets();
    if (std::find(targets.begin(), targets.end(), target) == targets.end()) {
        std::string list;
        for (const auto &t : targets) list += " " + t;
        throw ConfigError("target", "unknown target '" + target + "'; available:" + list);
    }
    const auto dir = out_dir(c, target);
    const json opts = {{"target", target}, {"seed", o.seed}, {"shots", o.shots}, {"resamples", resamples}};
    auto m = start_manifest("reproduce " + target, opts, o.seed);
    write_json(dir / "manifest.json", m.to_json());
    const auto result = reproduce(target, o);
    finish_manifest(m, dir, write_figure(dir, result));
    std::cout << result.summary.dump(2) << "\n";
    return 0;
}

int run_loss_floor(const Common &c, LossFloorOptions o) {
    if (c.seed) o.seed = *c.seed;
    if (c.shots) o.trajectories = *c.shots;
    if (c.workers) o.workers = *c.workers;
    const auto dir = out_dir(c, "loss-floor");
    const json opts = {{"n_atoms", o.n_atoms}, {"t_max", o.t_max}, {"dt", o.dt}, {"trajectories", o.trajectories}};
    auto m = start_manifest("loss-floor", opts, o.seed);
    write_json(dir / "manifest.json", m.to_json());
    const auto result = loss_floor_scan(o);
    finish_manifest(m, dir, write_figure(dir, result));
    std::cout << result.summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"squeezemag: squeezed-state magnetometry simulator"};
    app.require_subcommand(1);

    Common sim, ana, scn, rep, lf;
    auto *s = app.add_subcommand("simulate", "Run shots of a config and write the shot CSV");
    add_common(s, sim);

    auto *a = app.add_subcommand("analyze", "Estimators on a shot CSV");
    std::string csv, spec;
    a->add_option("csv", csv, "Shot CSV")->required();
    a->add_option("--spec", spec, "Analysis spec (JSON)");
    add_common(a, ana, false);

    auto *sc = app.add_subcommand("scan", "Sensitivity vs interrogation time");
    std::vector<double> t_int{143.9, 342.0, 1000.0, 2000.0};
    int phases = 8;
    sc->add_option("--t-int", t_int, "Interrogation times in us")->delimiter(',');
    sc->add_option("--fringe-phases", phases, "Fringe phases per point")->check(CLI::Range(4, 1000));
    add_common(sc, scn);

    auto *r = app.add_subcommand("reproduce", "Preset run behind one figure");
    std::string target;
    int resamples = 200;
    r->add_option("target", target, "Target name")->required();
    r->add_option("--resamples", resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);
    add_common(r, rep, false);

    auto *l = app.add_subcommand("loss-floor", "Quantum-trajectory squeezing scan with atom loss");
    LossFloorOptions lo;
    double t_max_ms = 60.0, dt_ms = 2.5;
    l->add_option("--atoms", lo.n_atoms, "Atom number")->check(CLI::Range(2, 5000));
    l->add_option("--t-max-ms", t_max_ms, "Last time in ms");
    l->add_option("--step-ms", dt_ms, "Time step in ms");
    add_common(l, lf, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*s) return run_simulate(sim);
        if (*a) return run_analyze(ana, csv, spec);
        if (*sc) return run_scan(scn, t_int, phases);
        if (*r) return run_reproduce(rep, target, resamples);
        if (*l) {
            lo.t_max = t_max_ms * 1e-3;
            lo.dt = dt_ms * 1e-3;
            return run_loss_floor(lf, lo);
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError &e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidArgument &e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

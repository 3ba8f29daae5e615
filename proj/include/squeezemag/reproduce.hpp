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

// Preset runs behind `squeezemag reproduce <target>`.
//
// Each target returns plain tables plus a JSON summary; writing CSV/SVG is
// left to io.hpp. Shot counts default to values that keep a target within a
// few minutes on one core and can be overridden.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "squeezemag/estimators.hpp"
#include "squeezemag/magnetometry.hpp"
#include "squeezemag/pipeline.hpp"

namespace squeezemag {

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// Column index by name; throws InvalidArgument.
    std::size_t column(const std::string &name) const;
    std::vector<double> values(const std::string &name) const;
};

struct PlotSpec {
    std::string file;  // SVG file name
    std::string table;
    std::string x;
    std::vector<std::string> ys;
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

struct FigureResult {
    std::string target;
    std::vector<Table> tables;
    std::vector<PlotSpec> plots;
    nlohmann::json summary;

    const Table &table(const std::string &name) const;
};

struct ReproduceOptions {
    int shots = 0;  // 0: the target's default
    std::uint64_t seed = 1;
    int workers = 1;
    int bootstrap_resamples = 200;
};

/// fig1b fig1c fig2b fig2c fig3b fig4a fig4b supp2 supp4 supp5 loss-floor
const std::vector<std::string> &reproduce_targets();

/// Throws InvalidArgument listing the targets when `target` is unknown.
FigureResult reproduce(const std::string &target, const ReproduceOptions &options);

// ---------------------------------------------------------------------------
// Presets and building blocks shared with the CLI and tests.

/// 25 sites with stratified atom numbers on [384, 600] (12300 atoms in total),
/// reference noise defaults, loss on, 20 ms echoed OAT with a calibrated readout.
RunConfig reference_run_config();

/// pi/2 pulse followed by a zero-angle readout.
Sequence make_css_sequence(const OatOptions &options = {});

/// 10 log10 and its first-order error.
double db_error(double value, double err);

/// Variance-vs-angle scan of one generation.
struct TomographyPoint {
    double alpha = 0.0;  // rad
    EstimateResult direct;
    EstimateResult rel;
};

struct TomographyScan {
    std::vector<TomographyPoint> points;
    FringeFit direct_fit;  // xi2(alpha) = C + A sin 2alpha + B cos 2alpha
    FringeFit rel_fit;
    double direct_min_alpha = 0.0;
    double rel_min_alpha = 0.0;
};

/// Minimising angle of a sinusoid fitted in 2alpha, in (-pi/2, pi/2].
double sinusoid_min_angle(const FringeFit &fit);

/// Runs the prefix once per shot and one tomography readout per angle.
TomographyScan tomography_scan(const RunConfig &config, const Sequence &prefix, const std::vector<double> &alphas,
                               const BootstrapOptions &boot);

/// Same analysis on existing records (records[k] read out at alphas[k]).
TomographyScan analyse_tomography(const std::vector<std::vector<ShotRecord>> &records, const std::vector<double> &alphas,
                                  int n_sites, double detection_sigma, const BootstrapOptions &boot);

/// beta^2 of Var(N_b - N_a) = a N + beta^2 N^2 over site subsets, with a
/// bootstrap over shots.
struct TechnicalNoise {
    double beta2 = 0.0;
    double beta2_err = 0.0;
    double linear = 0.0;
    /// beta^2 * 1e4: the technical contribution at 10^4 atoms in units of the
    /// coherent-state variance.
    double at_1e4 = 0.0;
    double at_1e4_err = 0.0;
};

TechnicalNoise technical_noise(const std::vector<ShotRecord> &shots, const std::vector<SiteParams> &sites,
                               const std::vector<long> &targets, double detection_sigma,
                               const CombinationOptions &combos, const BootstrapOptions &boot);

/// Trajectory scan from a coherent state with the echoed (delta = 0) twisting law.
struct LossFloorOptions {
    int n_atoms = units::kReferenceAtoms;
    double t_max = 60e-3;  // s
    double dt = 2.5e-3;    // s
    int trajectories = 500;
    std::uint64_t seed = 1;
    int workers = 1;
    LossConfig loss = [] {
        LossConfig l;
        l.enabled = true;
        return l;
    }();
};

FigureResult loss_floor_scan(const LossFloorOptions &options);

// Individual targets.
FigureResult reproduce_fig1b(const ReproduceOptions &o);
FigureResult reproduce_fig1c(const ReproduceOptions &o);
FigureResult reproduce_fig2b(const ReproduceOptions &o);
FigureResult reproduce_fig2c(const ReproduceOptions &o);
FigureResult reproduce_fig3b(const ReproduceOptions &o);
FigureResult reproduce_fig4a(const ReproduceOptions &o);
FigureResult reproduce_fig4b(const ReproduceOptions &o);
FigureResult reproduce_supp2(const ReproduceOptions &o);
FigureResult reproduce_supp4(const ReproduceOptions &o);
FigureResult reproduce_supp5(const ReproduceOptions &o);
FigureResult reproduce_loss_floor(const ReproduceOptions &o);

}  // namespace squeezemag

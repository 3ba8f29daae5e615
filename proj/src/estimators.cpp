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

#include "squeezemag/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "squeezemag/error.hpp"
#include "squeezemag/parallel.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

double sample_mean(const std::vector<double> &x, const std::vector<std::size_t> &idx) {
    if (idx.empty()) throw InsufficientData("sample_mean: no data");
    double s = 0.0;
    for (auto i : idx) s += x[i];
    return s / static_cast<double>(idx.size());
}

double sample_variance(const std::vector<double> &x, const std::vector<std::size_t> &idx) {
    if (idx.size() < 2) throw InsufficientData("sample_variance: need at least 2 values");
    const double m = sample_mean(x, idx);
    double s = 0.0;
    for (auto i : idx) s += (x[i] - m) * (x[i] - m);
    return s / static_cast<double>(idx.size() - 1);
}

EstimateResult bootstrap(const std::function<double(const std::vector<std::size_t> &)> &statistic, std::size_t n_items,
                         const BootstrapOptions &options, const std::string &name) {
    if (n_items < 2) throw InsufficientData("bootstrap: need at least 2 shots");
    if (options.n_resamples < 100) throw InvalidArgument("bootstrap: n_resamples must be >= 100");
    EstimateResult r;
    r.estimator = name;
    r.n_shots = static_cast<int>(n_items);
    r.n_resamples = options.n_resamples;
    r.value = statistic(all_indices(n_items));

    std::vector<double> values(options.n_resamples);
    parallel_for(values.size(), options.workers, [&](std::size_t k) {
        Stream rng = substream(options.seed, StreamPurpose::Bootstrap, {k});
        std::vector<std::size_t> idx(n_items);
        for (auto &i : idx) i = rng.below(n_items);
        values[k] = statistic(idx);
    });
    r.std_error = std::sqrt(sample_variance(values, all_indices(values.size())));
    r.ci_low = r.value - r.std_error;
    r.ci_high = r.value + r.std_error;
    return r;
}

EstimateResult bootstrap(const std::function<double(const std::vector<std::size_t> &)> &statistic, std::size_t n_items,
                         int n_resamples, Stream &rng, const std::string &name) {
    BootstrapOptions o;
    o.n_resamples = n_resamples;
    o.seed = rng();
    return bootstrap(statistic, n_items, o, name);
}

std::vector<SitePopulation> region_series(const std::vector<ShotRecord> &shots, const Region &region) {
    std::vector<SitePopulation> out;
    out.reserve(shots.size());
    for (const auto &s : shots) {
        SitePopulation p;
        for (int i : region) {
            if (i < 0 || i >= static_cast<int>(s.sites.size())) throw InvalidArgument("region index outside shot");
            p.n_a += s.sites[i].n_a_det;
            p.n_b += s.sites[i].n_b_det;
        }
        out.push_back(p);
    }
    return out;
}

double xi2_direct_value(const std::vector<SitePopulation> &series, const std::vector<std::size_t> &idx,
                        double det_variance) {
    if (idx.size() < 2) throw InsufficientData("xi2_direct: need at least 2 shots");
    std::vector<double> diff(series.size()), tot(series.size());
    for (auto i : idx) {
        diff[i] = series[i].n_b - series[i].n_a;
        tot[i] = series[i].n_b + series[i].n_a;
    }
    const double n_tot = sample_mean(tot, idx);
    if (!(n_tot > 0)) throw DegenerateInput("xi2_direct: zero mean total");
    const double p = 0.5 + sample_mean(diff, idx) / (2.0 * n_tot);
    const double binom = 4.0 * p * (1.0 - p);
    if (!(binom > 0)) throw DegenerateInput("xi2_direct: fully polarised region");
    return (sample_variance(diff, idx) - det_variance) / (binom * n_tot);
}

namespace {

struct RegionStats {
    double n = 0.0;  // mean total
    double p = 0.0;  // mean fraction in b
};

RegionStats region_stats(const std::vector<SitePopulation> &series, const std::vector<std::size_t> &idx) {
    std::vector<double> diff(series.size()), tot(series.size());
    for (auto i : idx) {
        diff[i] = series[i].n_b - series[i].n_a;
        tot[i] = series[i].n_b + series[i].n_a;
    }
    RegionStats s;
    s.n = sample_mean(tot, idx);
    if (!(s.n > 0)) throw DegenerateInput("xi2_rel: zero region total");
    s.p = 0.5 + sample_mean(diff, idx) / (2.0 * s.n);
    return s;
}

std::vector<double> dz_series(const std::vector<SitePopulation> &left, const std::vector<SitePopulation> &right,
                              const std::vector<std::size_t> &idx) {
    if (left.size() != right.size()) throw InvalidArgument("xi2_rel: region series differ in length");
    std::vector<double> dz(left.size());
    for (auto i : idx) dz[i] = imbalance(left[i]) - imbalance(right[i]);
    return dz;
}

}  // namespace

double xi2_rel_value(const std::vector<SitePopulation> &left, const std::vector<SitePopulation> &right,
                     const std::vector<std::size_t> &idx, double det_sigma_left2, double det_sigma_right2) {
    if (idx.size() < 2) throw InsufficientData("xi2_rel: need at least 2 shots");
    const auto dz = dz_series(left, right, idx);
    const RegionStats l = region_stats(left, idx), r = region_stats(right, idx);
    // First-order propagation of independent cloud noise into z = (Nb - Na)/(Nb + Na):
    // dz/dNb = 2 Na / N^2, dz/dNa = -2 Nb / N^2.
    auto det = [](const RegionStats &s, double sigma2) {
        return 4.0 * sigma2 * (s.p * s.p + (1.0 - s.p) * (1.0 - s.p)) / (s.n * s.n);
    };
    const double classical = 4.0 * l.p * (1.0 - l.p) / l.n + 4.0 * r.p * (1.0 - r.p) / r.n;
    if (!(classical > 0)) throw DegenerateInput("xi2_rel: zero classical reference");
    return (sample_variance(dz, idx) - det(l, det_sigma_left2) - det(r, det_sigma_right2)) / classical;
}

double xi2_rel_simplified_value(const std::vector<SitePopulation> &left, const std::vector<SitePopulation> &right,
                                const std::vector<std::size_t> &idx) {
    if (idx.size() < 2) throw InsufficientData("xi2_rel: need at least 2 shots");
    const auto dz = dz_series(left, right, idx);
    const double n_tot = region_stats(left, idx).n + region_stats(right, idx).n;
    return 0.25 * n_tot * sample_variance(dz, idx);
}

EstimateResult xi2_direct(const std::vector<ShotRecord> &shots, const Region &region, double detection_sigma,
                          const BootstrapOptions &options) {
    if (shots.size() < 2) throw InsufficientData("xi2_direct: need at least 2 shots");
    if (region.empty()) throw InvalidArgument("xi2_direct: empty region");
    const auto series = region_series(shots, region);
    const double det = 2.0 * static_cast<double>(region.size()) * detection_sigma * detection_sigma;
    auto r = bootstrap([&](const std::vector<std::size_t> &idx) { return xi2_direct_value(series, idx, det); },
                       shots.size(), options, "xi2_direct");
    r.negative_variance = r.value < 0;
    return r;
}

EstimateResult xi2_rel(const std::vector<ShotRecord> &shots, const Region &left, const Region &right,
                       double detection_sigma, const BootstrapOptions &options) {
    if (shots.size() < 2) throw InsufficientData("xi2_rel: need at least 2 shots");
    if (left.empty() || right.empty()) throw InvalidArgument("xi2_rel: regions must be non-empty");
    const auto ls = region_series(shots, left);
    const auto rs = region_series(shots, right);
    const double s2 = detection_sigma * detection_sigma;
    const double dl = static_cast<double>(left.size()) * s2, dr = static_cast<double>(right.size()) * s2;
    auto r = bootstrap([&](const std::vector<std::size_t> &idx) { return xi2_rel_value(ls, rs, idx, dl, dr); },
                       shots.size(), options, "xi2_rel");
    r.negative_variance = r.value < 0;
    return r;
}

double xi2_metrological(double xi2_n, double visibility) {
    if (!(visibility > 0) || visibility > 1 || !std::isfinite(visibility)) {
        throw InvalidArgument("xi2_metrological: visibility must lie in (0, 1]");
    }
    return xi2_n / (visibility * visibility);
}

namespace {

int count_distinct_phases(const std::vector<double> &phases) {
    std::vector<double> w;
    for (double p : phases) {
        double x = std::fmod(p, units::kTwoPi);
        if (x < 0) x += units::kTwoPi;
        w.push_back(x);
    }
    std::sort(w.begin(), w.end());
    int distinct = 0;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i == 0 || w[i] - w[i - 1] > 1e-9) ++distinct;
    }
    if (distinct > 1 && units::kTwoPi - w.back() + w.front() <= 1e-9) --distinct;
    return distinct;
}

}  // namespace

FringeFit fit_fringe(const std::vector<double> &phases, const std::vector<double> &imbalances) {
    if (phases.size() != imbalances.size()) throw InvalidArgument("fit_fringe: length mismatch");
    const int n = static_cast<int>(phases.size());
    if (n < 3) throw InsufficientData("fit_fringe: need at least 4 distinct phases");
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(phases[i]) || !std::isfinite(imbalances[i])) throw InvalidArgument("fit_fringe: non-finite input");
        x(i, 0) = std::sin(phases[i]);
        x(i, 1) = std::cos(phases[i]);
        x(i, 2) = 1.0;
        z[i] = imbalances[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
    const auto &sv = svd.singularValues();
    if (sv[2] <= 1e-10 * sv[0]) throw DegenerateInput("fit_fringe: rank-deficient design (phases equal mod pi)");
    if (count_distinct_phases(phases) < 4) throw InsufficientData("fit_fringe: need at least 4 distinct phases");

    const Eigen::Matrix3d xtx_inv = (x.transpose() * x).inverse();
    const Eigen::Vector3d c = xtx_inv * (x.transpose() * z);
    const Eigen::VectorXd resid = z - x * c;
    const double rss = resid.squaredNorm();
    const double s2 = n > 3 ? rss / (n - 3) : 0.0;
    const Eigen::Matrix3d cov = s2 * xtx_inv;

    FringeFit f;
    const double a = c[0], b = c[1];
    f.visibility = std::hypot(a, b);
    f.phase_offset = std::atan2(b, a);
    f.offset = c[2];
    f.offset_err = std::sqrt(cov(2, 2));
    if (f.visibility > 0) {
        const double v2 = f.visibility * f.visibility;
        f.visibility_err = std::sqrt(std::max(0.0, (a * a * cov(0, 0) + b * b * cov(1, 1) + 2 * a * b * cov(0, 1)) / v2));
        f.phase_offset_err =
            std::sqrt(std::max(0.0, (b * b * cov(0, 0) + a * a * cov(1, 1) - 2 * a * b * cov(0, 1)) / (v2 * v2)));
    }
    f.residual_std = std::sqrt(rss / n);
    const double zm = z.mean();
    const double tss = (z.array() - zm).square().sum();
    f.r_squared = tss > 0 ? 1.0 - rss / tss : 1.0;
    return f;
}

QuadraticNoiseFit fit_quadratic_noise(const std::vector<double> &ensemble_sizes, const std::vector<double> &variances) {
    if (ensemble_sizes.size() != variances.size()) throw InvalidArgument("fit_quadratic_noise: length mismatch");
    std::set<double> distinct(ensemble_sizes.begin(), ensemble_sizes.end());
    if (distinct.size() < 3) throw InsufficientData("fit_quadratic_noise: need at least 3 distinct sizes");
    const int n = static_cast<int>(ensemble_sizes.size());
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = ensemble_sizes[i];
        x(i, 1) = ensemble_sizes[i] * ensemble_sizes[i];
        y[i] = variances[i];
    }
    const Eigen::Matrix2d xtx_inv = (x.transpose() * x).inverse();
    const Eigen::Vector2d c = xtx_inv * (x.transpose() * y);
    const double rss = (y - x * c).squaredNorm();
    const Eigen::Matrix2d cov = (rss / (n - 2)) * xtx_inv;
    QuadraticNoiseFit f;
    f.linear_term = c[0];
    f.beta2 = c[1];
    f.linear_err = std::sqrt(cov(0, 0));
    f.beta2_err = std::sqrt(cov(1, 1));
    return f;
}

std::vector<VariancePoint> combination_variance_curve(const std::vector<ShotRecord> &shots,
                                                      const std::vector<SiteParams> &sites,
                                                      const std::vector<long> &targets, double detection_sigma,
                                                      const CombinationOptions &options, Stream &rng) {
    if (shots.size() < 2) throw InsufficientData("combination_variance_curve: need at least 2 shots");
    const auto idx = all_indices(shots.size());
    const double s2 = detection_sigma * detection_sigma;
    std::vector<VariancePoint> out;
    for (long target : targets) {
        const auto subsets = enumerate_combinations(sites, target, options, rng);
        VariancePoint pt;
        pt.target = static_cast<double>(target);
        pt.n_subsets = subsets.size();
        if (subsets.empty()) {
            out.push_back(pt);
            continue;
        }
        double var_sum = 0.0, n_sum = 0.0;
        for (const auto &region : subsets) {
            const auto series = region_series(shots, region);
            std::vector<double> diff(series.size()), tot(series.size());
            for (size_t i = 0; i < series.size(); ++i) {
                diff[i] = series[i].n_b - series[i].n_a;
                tot[i] = series[i].n_b + series[i].n_a;
            }
            var_sum += sample_variance(diff, idx) - 2.0 * static_cast<double>(region.size()) * s2;
            n_sum += sample_mean(tot, idx);
        }
        pt.variance = var_sum / static_cast<double>(subsets.size());
        pt.n_mean = n_sum / static_cast<double>(subsets.size());
        out.push_back(pt);
    }
    return out;
}

}  // namespace squeezemag

/*
   Copyright 2026 The hsep Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "hsep/she.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "hsep/random.hpp"

namespace hsep {

std::size_t SHEGridSpec::cells() const {
    return static_cast<std::size_t>(std::llround(2.0 * half_width / dx)) + 1;
}

double SHEGridSpec::x(std::size_t j) const { return -half_width + static_cast<double>(j) * dx; }

void SHEGridSpec::validate() const {
    if (!(dx > 0.0) || !(dt > 0.0) || !(half_width > dx)) throw std::invalid_argument("SHE grid: degenerate spacing");
    if (dt > 0.5 * dx * dx * (1.0 + 1e-12)) throw std::invalid_argument("SHE grid: dt exceeds dx^2/2 (unstable)");
}

double SHEGrid::at(std::size_t i, double r) const {
    const auto& row = values.at(i);
    const double pos = (r + spec.half_width) / spec.dx;
    if (pos < 0.0 || pos > static_cast<double>(row.size() - 1)) throw std::out_of_range("SHE grid: r outside domain");
    const auto j = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(j);
    if (j + 1 >= row.size()) return row[j];
    return (1.0 - frac) * row[j] + frac * row[j + 1];
}

double heat_density(double tau, double r) {
    return std::exp(-r * r / (2.0 * tau)) / std::sqrt(2.0 * std::numbers::pi * tau);
}

SHEGrid solve_she(const SHEInitial& ic, const std::vector<double>& snapshot_taus, const SHEGridSpec& spec,
                  std::uint64_t key) {
    spec.validate();
    SHEGrid out;
    out.spec = spec;
    out.key = key;
    out.taus = snapshot_taus;
    if (!std::is_sorted(out.taus.begin(), out.taus.end())) throw std::invalid_argument("SHE snapshots must be sorted");

    const std::size_t n = spec.cells();
    std::vector<double> z(n, 0.0), next(n, 0.0);
    const bool delta = std::holds_alternative<DeltaInitial>(ic);
    if (delta) {
        double mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) mass += (z[j] = heat_density(spec.dt, spec.x(j)));
        for (double& v : z) v /= mass * spec.dx;
    } else {
        const auto& f = std::get<std::function<double(double)>>(ic);
        for (std::size_t j = 1; j + 1 < n; ++j) z[j] = f(spec.x(j));
    }

    const double diff = 0.5 * spec.dt / (spec.dx * spec.dx);
    const double noise_scale = std::sqrt(spec.dt / spec.dx);
    const double ito = 0.5 * spec.dt / spec.dx;
    const Philox4x32 gen(key);

    // Step index of each snapshot: tau = steps * dt.
    std::size_t next_snap = 0;
    auto snapshot = [&](double tau) {
        while (next_snap < out.taus.size() && out.taus[next_snap] <= tau + 0.5 * spec.dt) {
            out.values.push_back(z);
            ++next_snap;
        }
    };

    // For a delta start the first step is the normalised P_dt itself, so the
    // clock begins at dt with noise from that step on.
    std::uint64_t step = 0;
    double tau = delta ? spec.dt : 0.0;
    if (delta && spec.noise) {
        for (std::size_t j = 1; j + 1 < n; j += 2) {
            const auto g = normal_pair(gen, step, j);
            z[j] *= std::exp(g[0] * noise_scale - ito);
            if (j + 1 < n - 1) z[j + 1] *= std::exp(g[1] * noise_scale - ito);
        }
        ++step;
    }
    snapshot(tau);
    const double t_end = out.taus.empty() ? 0.0 : out.taus.back();
    while (next_snap < out.taus.size() && tau < t_end + 0.5 * spec.dt) {
        next[0] = next[n - 1] = 0.0;
        for (std::size_t j = 1; j + 1 < n; ++j) next[j] = z[j] + diff * (z[j + 1] - 2.0 * z[j] + z[j - 1]);
        if (spec.noise) {
            for (std::size_t j = 1; j + 1 < n; j += 2) {
                const auto g = normal_pair(gen, step, j);
                next[j] *= std::exp(g[0] * noise_scale - ito);
                if (j + 1 < n - 1) next[j + 1] *= std::exp(g[1] * noise_scale - ito);
            }
        }
        std::swap(z, next);
        ++step;
        tau += spec.dt;
        snapshot(tau);
    }
    return out;
}

OnePointStats one_point_stats(const std::vector<double>& samples) {
    StatsAccumulator acc;
    for (double v : samples) acc.add(v);
    OnePointStats s;
    s.count = acc.count();
    s.mean = acc.mean();
    s.variance = acc.variance();
    s.skewness = acc.skewness();
    s.mean_se = acc.std_error();
    // Standard error of the sample variance from the fourth central moment.
    if (acc.count() > 1) {
        const double n = static_cast<double>(acc.count());
        const double mu4 = acc.m4() / n;
        const double var = acc.population_variance();
        s.variance_se = std::sqrt(std::max(0.0, (mu4 - var * var * (n - 3.0) / (n - 1.0)) / n));
    }
    return s;
}

OnePointComparison compare_one_point(const std::vector<double>& particle_log, const std::vector<double>& she_log) {
    if (particle_log.size() < 2 || she_log.size() < 2) throw std::invalid_argument("compare_one_point: empty ensemble");
    OnePointComparison c;
    c.particle = one_point_stats(particle_log);
    c.reference = one_point_stats(she_log);
    c.mean_gap = std::abs(c.particle.mean - c.reference.mean);
    c.variance_gap = std::abs(c.particle.variance - c.reference.variance) / c.reference.variance;
    c.skewness_gap = std::abs(c.particle.skewness - c.reference.skewness);
    return c;
}

ControlledMean controlled_log_mean(const std::vector<double>& z, double exact_mean_z) {
    if (z.size() < 3) throw std::invalid_argument("controlled_log_mean: need at least 3 samples");
    StatsAccumulator lz, zz;
    for (double v : z) {
        if (!(v > 0.0)) throw std::invalid_argument("controlled_log_mean: nonpositive sample");
        lz.add(std::log(v));
        zz.add(v);
    }
    double cov = 0.0;
    for (double v : z) cov += (std::log(v) - lz.mean()) * (v - zz.mean());
    const double n = static_cast<double>(z.size());
    cov /= n - 1.0;
    ControlledMean m;
    m.plain_mean = lz.mean();
    m.plain_se = lz.std_error();
    m.beta = zz.variance() > 0.0 ? cov / zz.variance() : 0.0;
    m.mean = lz.mean() - m.beta * (zz.mean() - exact_mean_z);
    const double resid = std::max(0.0, lz.variance() - m.beta * cov);
    m.se = std::sqrt(resid / n);
    return m;
}

bool monotone_decreasing(const std::vector<double>& gaps) {
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        if (!(gaps[i] < gaps[i - 1])) return false;
    }
    return true;
}

nlohmann::json to_json(const OnePointStats& s) {
    return {{"count", s.count},       {"mean", s.mean},         {"variance", s.variance},
            {"skewness", s.skewness}, {"mean_se", s.mean_se}, {"variance_se", s.variance_se}};
}

nlohmann::json to_json(const ControlledMean& m) {
    return {{"mean", m.mean}, {"se", m.se}, {"plain_mean", m.plain_mean}, {"plain_se", m.plain_se}, {"beta", m.beta}};
}

nlohmann::json to_json(const OnePointComparison& c) {
    return {{"particle", to_json(c.particle)},
            {"reference", to_json(c.reference)},
            {"mean_gap", c.mean_gap},
            {"variance_gap", c.variance_gap},
            {"skewness_gap", c.skewness_gap}};
}

void write_she_csv(std::ostream& os, const SHEGrid& g) {
    os << "tau,r,Z\n" << std::setprecision(17);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        for (std::size_t j = 0; j < g.values[i].size(); ++j) {
            os << g.taus[i] << ',' << g.spec.x(j) << ',' << g.values[i][j] << '\n';
        }
    }
}

}  // namespace hsep

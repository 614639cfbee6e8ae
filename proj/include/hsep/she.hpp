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

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <json.hpp>
#include <variant>
#include <vector>

#include "hsep/stats.hpp"

namespace hsep {

/// Discretisation of dZ = (1/2) Z'' dtau + Z eta on [-half_width, half_width]
/// with zero boundary values.
struct SHEGridSpec {
    double dx = 0.05;
    double dt = 0.05 * 0.05 / 4.0;
    double half_width = 6.0;
    bool noise = true;

    std::size_t cells() const;
    double x(std::size_t j) const;
    /// Throws std::invalid_argument if dt > dx^2 / 2 or the grid is degenerate.
    void validate() const;
};

struct DeltaInitial {};
using SHEInitial = std::variant<DeltaInitial, std::function<double(double)>>;

/// Solution snapshots of one noise path.
struct SHEGrid {
    SHEGridSpec spec;
    std::uint64_t key = 0;
    std::vector<double> taus;                // snapshot times
    std::vector<std::vector<double>> values; // values[i][j] = Z(taus[i], x_j)

    /// Linear interpolation in space at snapshot i.
    double at(std::size_t i, double r) const;
};

/// Explicit heat step followed by the multiplicative factor
/// exp(xi sqrt(dt/dx) - dt/(2 dx)), xi standard normal per cell and step.
/// The factor has mean one and keeps Z positive. A delta initial condition
/// is replaced by the normalised heat kernel P_dt on the grid.
SHEGrid solve_she(const SHEInitial& ic, const std::vector<double>& snapshot_taus, const SHEGridSpec& spec,
                  std::uint64_t key);

/// Standard heat kernel P_tau(r).
double heat_density(double tau, double r);

/// Mean, variance and skewness of a sample, with standard errors.
struct OnePointStats {
    std::size_t count = 0;
    double mean = 0;
    double variance = 0;
    double skewness = 0;
    double mean_se = 0;
    double variance_se = 0;
};
OnePointStats one_point_stats(const std::vector<double>& samples);

struct OnePointComparison {
    OnePointStats particle;
    OnePointStats reference;
    double mean_gap = 0;      // |mean_p - mean_ref|
    double variance_gap = 0;  // |var_p - var_ref| / var_ref
    double skewness_gap = 0;  // |skew_p - skew_ref|
};

/// Compares log Z samples from the particle system with SHE samples.
/// Throws std::invalid_argument on empty ensembles.
OnePointComparison compare_one_point(const std::vector<double>& particle_log, const std::vector<double>& she_log);

/// Mean of log Z with Z as a control variate of known expectation:
/// mean(log Z) - beta (mean(Z) - exact_mean_z), beta = Cov(log Z, Z) / Var Z.
struct ControlledMean {
    double mean = 0;
    double se = 0;
    double plain_mean = 0;
    double plain_se = 0;
    double beta = 0;
};
/// Throws std::invalid_argument for fewer than 3 samples or a nonpositive one.
ControlledMean controlled_log_mean(const std::vector<double>& z, double exact_mean_z);

/// True if gaps[0] > gaps[1] > ... (gaps ordered by decreasing eps).
bool monotone_decreasing(const std::vector<double>& gaps);

nlohmann::json to_json(const OnePointStats& s);
nlohmann::json to_json(const OnePointComparison& c);
nlohmann::json to_json(const ControlledMean& m);

/// CSV dump "tau,r,Z" of one path.
void write_she_csv(std::ostream& os, const SHEGrid& g);

}  // namespace hsep

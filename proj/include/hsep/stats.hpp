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
#include <limits>
#include <span>
#include <vector>

namespace hsep {

/// Streaming count, mean, central moments up to the 4th, min and max.
///
/// merge() uses the pairwise update formulas of Chan et al. / Pebay, so
/// partial accumulators can be combined in any grouping.
class StatsAccumulator {
public:
    void add(double x);
    void merge(const StatsAccumulator& other);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance.
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double population_variance() const { return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0; }
    double stddev() const;
    double std_error() const;
    double skewness() const;
    double excess_kurtosis() const;
    double min() const { return min_; }
    double max() const { return max_; }
    double m2() const { return m2_; }
    double m3() const { return m3_; }
    double m4() const { return m4_; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0, m2_ = 0, m3_ = 0, m4_ = 0;
    double min_ = std::numeric_limits<double>::infinity();
    double max_ = -std::numeric_limits<double>::infinity();
};

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Two-sided z threshold for a family of `tests` comparisons whose total
/// false-alarm rate equals that of a single `base_sigma` test.
double bonferroni_z(std::size_t tests, double base_sigma = 4.0);

/// z-score of a sample mean against zero; 0 when the spread is degenerate.
double mean_z_score(const StatsAccumulator& acc);

}  // namespace hsep

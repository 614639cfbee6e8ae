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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "hsep/random.hpp"
#include "hsep/stats.hpp"

using namespace hsep;

TEST_CASE("merged accumulators equal a single pass") {
    const Philox4x32 gen(3);
    std::vector<double> xs;
    for (std::uint64_t i = 0; i < 5000; ++i) {
        const auto z = normal_pair(gen, i, 0);
        xs.push_back(std::exp(z[0]) + 0.1 * z[1]);
    }
    StatsAccumulator all;
    for (double x : xs) all.add(x);
    for (std::size_t split : {std::size_t{1}, std::size_t{17}, std::size_t{2500}, std::size_t{4999}}) {
        StatsAccumulator a, b;
        for (std::size_t i = 0; i < xs.size(); ++i) (i < split ? a : b).add(xs[i]);
        a.merge(b);
        CHECK(a.count() == all.count());
        CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
        CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
        CHECK(a.skewness() == doctest::Approx(all.skewness()).epsilon(1e-12));
        CHECK(a.excess_kurtosis() == doctest::Approx(all.excess_kurtosis()).epsilon(1e-12));
        CHECK(a.min() == all.min());
        CHECK(a.max() == all.max());
    }
    StatsAccumulator empty;
    StatsAccumulator copy = all;
    copy.merge(empty);
    CHECK(copy.mean() == all.mean());
    empty.merge(all);
    CHECK(empty.variance() == all.variance());
}

TEST_CASE("small-sample moments") {
    StatsAccumulator acc;
    for (double x : {1.0, 2.0, 3.0, 4.0}) acc.add(x);
    CHECK(acc.mean() == 2.5);
    CHECK(acc.variance() == doctest::Approx(5.0 / 3.0));
    CHECK(acc.population_variance() == doctest::Approx(1.25));
    CHECK(acc.skewness() == doctest::Approx(0.0));
    CHECK(acc.std_error() == doctest::Approx(std::sqrt(5.0 / 12.0)));
    StatsAccumulator one;
    one.add(7);
    CHECK(one.variance() == 0.0);
}

TEST_CASE("linear fit recovers a line") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    std::vector<double> y;
    for (double v : x) y.push_back(1.5 - 0.25 * v);
    const LinearFit f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Bonferroni threshold") {
    CHECK(bonferroni_z(1) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(bonferroni_z(10) > 4.0);
    CHECK(bonferroni_z(100) > bonferroni_z(10));
}

TEST_CASE("mean z-score") {
    StatsAccumulator acc;
    for (int i = 0; i < 10; ++i) acc.add(1.0);
    CHECK(mean_z_score(acc) == 0.0);
    StatsAccumulator b;
    for (double x : {1.0, 2.0, 3.0}) b.add(x);
    CHECK(mean_z_score(b) == doctest::Approx(2.0 / (1.0 / std::sqrt(3.0))));
}

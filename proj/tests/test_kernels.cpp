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
#include <sstream>
#include <stdexcept>

#include "golden.hpp"
#include "hsep/kernels.hpp"

using namespace hsep;

namespace {

ModelParams golden_params() {
    ModelParams p;
    p.q = 0.9;
    p.nu = 0.5;
    p.alpha = 2.0;
    p.rho = 0.3;
    p.J = 2;
    return p;
}

std::vector<double> read_column(const std::string& name) {
    std::vector<double> out;
    for (const auto& row : testing::read_rows(name)) out.push_back(std::stod(row.at(0)));
    return out;
}

void check_against(const KernelTable& k, const std::vector<double>& golden) {
    CHECK(k.offset == doctest::Approx(golden[0]).epsilon(1e-12));
    REQUIRE(k.shift == 0);
    for (std::size_t i = 1; i < golden.size(); ++i) {
        const Index idx = static_cast<Index>(i - 1);
        CAPTURE(idx);
        CHECK(std::abs(k.at(idx) - golden[i]) <= 1e-12 * golden[i] + 1e-17);
    }
}

}  // namespace

TEST_CASE("tilted kernel matches high-precision weights") {
    check_against(tilted_kernel(1, golden_params()), read_column("tilted_q0.9_nu0.5_a2_rho0.3_J2_s1.txt"));
}

TEST_CASE("five-step heat kernel matches high-precision weights") {
    check_against(heat_kernel(5, 0, golden_params()), read_column("heat_q0.9_nu0.5_a2_rho0.3_J2_t5.txt"));
}

TEST_CASE("base kernel is a probability law") {
    ModelParams p;
    p.q = 0.9;
    p.nu = 0.5;
    p.alpha = 1.0;
    for (Step s : {0, 1}) {
        const KernelTable k = base_kernel(s, p);
        CHECK(std::abs(k.total_mass() - 1.0) <= 1e-14);
        CHECK(k.offset == 0.0);
        CHECK(k.min_index() == 0);
    }
    // Point mass plus geometric tail.
    const KernelTable k = base_kernel(0, p);
    const double a = p.alpha;
    const double jump = a * (1 - p.q) / (1 + a);
    const double ratio = (p.nu + a) / (1 + a);
    CHECK(k.at(0) == doctest::Approx(1 - jump).epsilon(1e-15));
    CHECK(k.at(3) == doctest::Approx(jump * ratio * ratio * (1 - p.nu) / (1 + a)).epsilon(1e-14));
}

TEST_CASE("tilted kernel is centred with the predicted variance") {
    const ModelParams p = golden_params();
    const DerivedConstants c = derive_constants(p);
    for (Step s : {0, 1}) {
        const KernelTable k = tilted_kernel(s, p);
        CHECK(std::abs(k.total_mass() - 1.0) <= 1e-13);
        CHECK(std::abs(k.mean()) <= 1e-13);
        CHECK(k.variance() == doctest::Approx(c.r_star * c.r_star * c.sigma[s]).epsilon(1e-10));
        CHECK(k.offset == doctest::Approx(-c.mu[s]).epsilon(1e-14));
    }
}

TEST_CASE("heat kernels form a semigroup") {
    const ModelParams p = golden_params();
    for (auto [t0, t1, t2] : {std::tuple<Step, Step, Step>{0, 3, 7}, {1, 2, 9}, {4, 4, 6}}) {
        const KernelTable whole = heat_kernel(t2, t0, p);
        const KernelTable parts = convolve(heat_kernel(t2, t1, p), heat_kernel(t1, t0, p));
        CHECK(whole.offset == doctest::Approx(parts.offset).epsilon(1e-13));
        const Index lo = std::min(whole.min_index(), parts.min_index());
        const Index hi = std::max(whole.max_index(), parts.max_index());
        double worst = 0;
        for (Index k = lo; k <= hi; ++k) worst = std::max(worst, std::abs(whole.at(k) - parts.at(k)));
        CHECK(worst <= 1e-12);
    }
    const KernelTable id = heat_kernel(3, 3, p);
    CHECK(id.weights.size() == 1);
    CHECK(id.at(0) == 1.0);
}

TEST_CASE("long-time heat kernel keeps its bulk") {
    const ModelParams p = ModelParams::scaling(0.05, 0.5, 1.0, 1, 0.5);
    const DerivedConstants c = derive_constants(p);
    const KernelTable k = heat_kernel(5000, 0, p);
    CHECK(std::abs(k.total_mass() - 1.0) < 1e-12);
    CHECK(std::abs(k.mean()) < 1e-8);
    CHECK(k.variance() == doctest::Approx(c.r_star * c.r_star * sigma_sum(5000, 0, c)).epsilon(1e-9));
}

TEST_CASE("cached backward kernels equal direct ones") {
    const ModelParams p = golden_params();
    BackwardHeatKernels cache(12, p);
    for (Step s = 12; s >= 0; --s) {
        const KernelTable& a = cache.from(s);
        const KernelTable b = heat_kernel(12, s, p);
        CHECK(a.offset == doctest::Approx(b.offset).epsilon(1e-13));
        double worst = 0;
        for (Index k = std::min(a.min_index(), b.min_index()); k <= std::max(a.max_index(), b.max_index()); ++k) {
            worst = std::max(worst, std::abs(a.at(k) - b.at(k)));
        }
        CHECK(worst <= 1e-13);
    }
}

TEST_CASE("generating function") {
    const ModelParams p = golden_params();
    for (Step s : {0, 1}) {
        const KernelTable k = tilted_kernel(s, p);
        for (double x : {0.5, 0.9, 1.0, 1.1, 1.3}) {
            CHECK(phi(x, s, p) == doctest::Approx(phi_direct(x, k)).epsilon(1e-12));
        }
        CHECK(phi(1.0, s, p) == doctest::Approx(1.0).epsilon(1e-14));
        const double h = 1e-4;
        const double d1 = (phi(1 + h, s, p) - phi(1 - h, s, p)) / (2 * h);
        const double d2 = (phi(1 + h, s, p) - 2 * phi(1.0, s, p) + phi(1 - h, s, p)) / (h * h);
        CHECK(std::abs(d1) < 1e-7);
        // E[X(X-1)] = Var X when E X = 0.
        CHECK(d2 == doctest::Approx(k.variance()).epsilon(1e-5));
    }
    CHECK_THROWS_AS(phi(1e6, 0, p), std::domain_error);
}

TEST_CASE("exponential moment of a point mass") {
    KernelTable k;
    k.offset = 0.5;
    k.shift = -2;
    k.weights = {1.0};
    CHECK(exponential_moment(k, 2.0) == doctest::Approx(std::exp(3.0)).epsilon(1e-15));
}

TEST_CASE("trim keeps the bulk") {
    KernelTable k = heat_kernel(40, 0, golden_params(), 0.0);
    const std::size_t before = k.weights.size();
    trim(k, 1e-12);
    CHECK(k.weights.size() < before);
    CHECK(std::abs(k.total_mass() - 1.0) < 2e-12);
}

TEST_CASE("kernel text round trip") {
    const KernelTable k = tilted_kernel(0, golden_params());
    std::stringstream ss;
    write_kernel(ss, k);
    const KernelTable r = read_kernel(ss);
    CHECK(r.offset == k.offset);
    CHECK(r.shift == k.shift);
    CHECK(r.weights == k.weights);
}

TEST_CASE("scaling probe needs two lags inside the horizon") {
    CHECK_THROWS_AS(kernel_scaling_probe(0.001, {0.4}, 0.5, 1.0, 1, 0.5), std::invalid_argument);
}

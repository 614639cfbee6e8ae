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
#include <stdexcept>

#include "hsep/experiment.hpp"
#include "hsep/suites.hpp"
#include "hsep/transform.hpp"

using namespace hsep;

namespace {

ModelParams reference_params() {
    ModelParams p;
    p.q = 0.5;
    p.nu = 0.25;
    p.alpha = 1.0;
    p.rho = 0.5;
    return p;
}

}  // namespace

TEST_CASE("Q on step data and below the first particle") {
    const ModelParams p = reference_params();
    const ParticleConfig cfg = make_step_ic(30);
    for (Index n = 0; n < 30; ++n) CHECK(q_duality(cfg, n, p) == 1.0);
    CHECK(q_duality(cfg, -1, p) == 0.0);
    CHECK_THROWS_AS(q_duality(cfg, 30, p), std::out_of_range);
}

TEST_CASE("Q shift identity on random configurations") {
    for (std::uint64_t k = 0; k < 500; ++k) {
        const RandomCase rc = random_case(k, 20);
        const ParticleConfig& cfg = rc.config;
        for (Index n = cfg.first() + 1; n <= cfg.last(); ++n) {
            const double lhs = q_duality(cfg, n, rc.params) * q_power(rc.params.q, cfg.gap(n));
            CHECK(lhs == doctest::Approx(q_duality(cfg, n - 1, rc.params)).epsilon(1e-12));
        }
    }
}

TEST_CASE("Z at time zero on step data") {
    const ModelParams p = ModelParams::scaling(0.2, 0.5, 1.0, 1, 0.5);
    const DerivedConstants c = derive_constants(p);
    const ParticleConfig cfg = make_step_ic(400);
    const TransformField z = build_Z(cfg, 0, -5, 399, p, c);
    CHECK(z.mu_hat == 0.0);
    CHECK(z.log_lambda_hat == 0.0);
    CHECK(z.at(-3) == 0.0);
    CHECK(z.at(-200) == 0.0);
    double mass = 0;
    for (Index n = 0; n < 400; ++n) {
        CHECK(z.at(n) == doctest::Approx(std::pow(p.rho, n)).epsilon(1e-13));
        mass += z.at(n);
    }
    // eps/r* times the sum of the unit-mass field.
    CHECK(p.eps_effective() / c.r_star * step_mass_prefactor(p, c) * mass == doctest::Approx(1.0).epsilon(1e-13));
    CHECK_THROWS_AS(build_Z(cfg, 0, 0, 400, p, c), std::out_of_range);
}

TEST_CASE("Z is positive and rho-Lipschitz from the left") {
    for (std::uint64_t k = 0; k < 10000; ++k) {
        const RandomCase rc = random_case(k, 12);
        const DerivedConstants c = derive_constants(rc.params);
        const TransformField z = build_Z(rc.config, rc.s, rc.params, c);
        bool ok = true;
        for (Index n = z.n_lo; n <= z.n_hi(); ++n) {
            ok = ok && z.at(n) > 0.0;
            if (n > z.n_lo) ok = ok && z.at(n) >= rc.params.rho * z.at(n - 1) * (1 - 1e-12);
        }
        CHECK(ok);
    }
}

TEST_CASE("lattice height is log Z") {
    const ModelParams p = ModelParams::scaling(0.2, 0.5, 1.0, 2, 0.4);
    const DerivedConstants c = derive_constants(p);
    const BernoulliEnv env(p, 4);
    const ParticleConfig cfg = run_steps(make_step_ic(200), 0, 50, env, {});
    const TransformField z = build_Z(cfg, 50, p, c);
    for (Index n = 0; n < 200; n += 7) {
        CHECK(lattice_height(cfg, 50, n, p, c) == doctest::Approx(std::log(z.at(n))).epsilon(1e-12));
    }
    const auto h = height_reading(cfg, 50, p);
    REQUIRE(h.size() == cfg.size());
    CHECK(h[10].h == doctest::Approx(std::log(z.at(10))).epsilon(1e-12));
    CHECK(h[10].r == doctest::Approx(p.eps_effective() * z.xi(10) / c.r_star).epsilon(1e-12));
    CHECK_THROWS_AS(height_reading(cfg, 51, p), std::invalid_argument);
    CHECK(step_height_offset(p, c) == doctest::Approx(std::log(step_mass_prefactor(p, c))).epsilon(1e-15));
}

TEST_CASE("noise increment") {
    const ModelParams p = reference_params();
    const DerivedConstants c = derive_constants(p);
    const ParticleConfig cfg(0, {3, 1, 0, -4});
    StepRecord rec;
    rec.first = 0;
    rec.moved = {1, 0, 0, 1};
    const double a = p.alpha_at(0);
    CHECK(noise_increment(cfg, 0, 0, rec, p, c) ==
          doctest::Approx(c.lambda[0] * (p.q - 1) * (1 - a / (1 + a))).epsilon(1e-15));
    const auto field = noise_field(cfg, 0, rec, p, c);
    for (Index n = 0; n < 4; ++n) {
        CHECK(field[static_cast<std::size_t>(n)] == doctest::Approx(noise_increment(cfg, 0, n, rec, p, c)).epsilon(1e-14));
        // Centring: the two outcomes weighted by the conditional probability.
        const double pr = conditional_move_prob(cfg, 0, n, p);
        const double w1 = c.lambda[0] * (p.q - 1) * (1 - pr);
        const double w0 = c.lambda[0] * (p.q - 1) * (0 - pr);
        CHECK(std::abs(pr * w1 + (1 - pr) * w0) < 1e-15);
        CHECK(std::abs(w1) <= c.lambda[0] * (1 - p.q));
        CHECK(std::abs(w0) <= c.lambda[0] * (1 - p.q));
    }
}

TEST_CASE("noise increments average to zero") {
    const ModelParams p = reference_params();
    const DerivedConstants c = derive_constants(p);
    const ParticleConfig cfg(0, {3, 1, 0, -4});
    const auto table = std::make_shared<const JumpTable>(p);
    StatsAccumulator acc;
    for (std::uint64_t r = 0; r < 1'000'000; ++r) {
        const BernoulliEnv env(table, replica_key(23, r));
        StepRecord rec;
        parallel_step(cfg, 0, env, &rec);
        acc.add(noise_increment(cfg, 0, 3, rec, p, c));
    }
    CHECK(std::abs(mean_z_score(acc)) < 4.0);
}

TEST_CASE("scaled field") {
    const ModelParams p = ModelParams::scaling(0.4, 0.5, 1.0, 1, 0.5);
    const DerivedConstants c = derive_constants(p);
    const ParticleConfig cfg0 = make_step_ic(300);
    const BernoulliEnv env(p, 31);
    const std::vector<double> taus{0.0, 0.1, 0.25};
    const std::vector<double> rs{-0.5, 0.0, 0.3, 1.0};
    const Trajectory traj = run_trajectory(cfg0, static_cast<Step>(std::ceil(micro_time(0.25, p, c))) + 1, env);
    const ScaledField a = scale_field(traj, p, taus, rs);
    const ScaledField b = sample_scaled_field(cfg0, env, p, taus, rs);
    CHECK(a.z(0, 1) == doctest::Approx(build_Z(cfg0, 0, p, c).at(0)).epsilon(1e-15));
    for (std::size_t i = 0; i < a.Z.size(); ++i) {
        CHECK(a.Z[i] == doctest::Approx(b.Z[i]).epsilon(1e-12));
        CHECK(std::exp(a.H[i]) == doctest::Approx(a.Z[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(scale_field(traj, p, {1.0}, rs), std::out_of_range);
    CHECK_THROWS_AS(sample_scaled_field(cfg0, env, p, {0.2, 0.1}, rs), std::invalid_argument);
}

TEST_CASE("expected step field") {
    const ModelParams p = ModelParams::scaling(0.4, 0.5, 1.0, 1, 0.5);
    const DerivedConstants c = derive_constants(p);
    // tau = 0: the initial field itself.
    const ScaledField f0 = sample_scaled_field(make_step_ic(50), BernoulliEnv(p, 1), p, {0.0}, {0.0, 0.3});
    CHECK(expected_step_field(0.0, 0.0, p) == doctest::Approx(step_mass_prefactor(p, c) * f0.Z[0]).epsilon(1e-14));
    CHECK(expected_step_field(0.0, 0.3, p) == doctest::Approx(step_mass_prefactor(p, c) * f0.Z[1]).epsilon(1e-14));
    CHECK(expected_step_field(0.0, -1.0, p) == 0.0);

    const auto table = std::make_shared<const JumpTable>(p);
    for (double r : {0.0, 0.4}) {
        StatsAccumulator acc;
        for (std::uint64_t k = 0; k < 20000; ++k) {
            const BernoulliEnv env(table, replica_key(41, k));
            acc.add(step_mass_prefactor(p, c) * sample_scaled_field(make_step_ic(200), env, p, {0.3}, {r}).Z[0]);
        }
        CHECK(std::abs(acc.mean() - expected_step_field(0.3, r, p)) < 4 * acc.std_error());
    }
}

TEST_CASE("index interpolation is linear between sites") {
    const ModelParams p = reference_params();
    const DerivedConstants c = derive_constants(p);
    const ParticleConfig cfg(0, {4, 2, 1, -3});
    const TransformField z = build_Z(cfg, 0, p, c);
    CHECK(interpolate_index(cfg, 0, 2.0, p, c) == doctest::Approx(z.at(2)).epsilon(1e-15));
    CHECK(interpolate_index(cfg, 0, 1.25, p, c) == doctest::Approx(0.75 * z.at(1) + 0.25 * z.at(2)).epsilon(1e-15));
}

TEST_CASE("near-equilibrium gap law") {
    const ModelParams p = ModelParams::scaling(0.2, 0.5, 1.0, 1, 0.5);
    const DerivedConstants c = derive_constants(p);
    const GapLaw law = near_equilibrium_gap_law(p, c);
    double mass = 0, tilt = 0;
    for (Gap k = 0; k < static_cast<Gap>(law.support_size()); ++k) {
        mass += law.pmf(k);
        tilt += law.pmf(k) * std::pow(p.q, -static_cast<double>(k));
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(tilt == doctest::Approx(1.0 / p.rho).epsilon(1e-10));
    CHECK(law.sample(1e-300) == 0);

    // nu = q reduces to the geometric law.
    const GapLaw geo(0.6, 0.6, 0.3);
    for (Gap k = 0; k < 10; ++k) CHECK(geo.pmf(k) == doctest::Approx(0.7 * std::pow(0.3, k)).epsilon(1e-13));
    CHECK(geo.mean() == doctest::Approx(0.3 / 0.7).epsilon(1e-13));
}

TEST_CASE("near-equilibrium data") {
    const ModelParams p = ModelParams::scaling(0.2, 0.5, 1.0, 1, 0.5);
    const DerivedConstants c = derive_constants(p);
    NearEquilibriumSpec spec;
    spec.n_lo = -30;
    spec.n_hi = 30;
    const ParticleConfig a = make_near_equilibrium_ic(spec, p, 9);
    CHECK(a == make_near_equilibrium_ic(spec, p, 9));
    CHECK(a.first() == -30);
    CHECK(a.last() == 30);
    CHECK(a.position(0) == 0);
    CHECK(a.is_valid());
    // A wider window extends the same realisation.
    spec.n_hi = 40;
    const ParticleConfig b = make_near_equilibrium_ic(spec, p, 9);
    CHECK(b.position(30) == a.position(30));
    spec.n_hi = spec.n_lo;
    CHECK_THROWS_AS(make_near_equilibrium_ic(spec, p, 9), std::invalid_argument);

    // E Z(0, n) = 1 at every site.
    spec.n_lo = 0;
    spec.n_hi = 10;
    StatsAccumulator acc;
    for (std::uint64_t r = 0; r < 20000; ++r) {
        acc.add(build_Z(make_near_equilibrium_ic(spec, p, replica_key(5, r)), 0, p, c).at(10));
    }
    CHECK(std::abs(acc.mean() - 1.0) < 4 * acc.std_error());
}

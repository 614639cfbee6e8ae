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

#include "hsep/dynamics.hpp"
#include "hsep/suites.hpp"

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

ParticleConfig step_config(Index count) {
    std::vector<Position> pos(static_cast<std::size_t>(count));
    for (Index n = 0; n < count; ++n) pos[static_cast<std::size_t>(n)] = -n;
    return ParticleConfig(0, pos);
}

}  // namespace

TEST_CASE("configuration basics") {
    const ParticleConfig cfg(2, {5, 3, 2, -4});
    CHECK(cfg.first() == 2);
    CHECK(cfg.last() == 5);
    CHECK(is_infinite(cfg.gap(2)));
    CHECK(cfg.gap(3) == 1);
    CHECK(cfg.gap(4) == 0);
    CHECK(cfg.gap(5) == 5);
    CHECK_THROWS_AS(ParticleConfig(0, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(ParticleConfig(0, {1, 2}), std::invalid_argument);
}

TEST_CASE("step initial data has zero gaps") {
    const ParticleConfig cfg = step_config(50);
    for (Index n = 1; n < 50; ++n) CHECK(cfg.gap(n) == 0);
}

TEST_CASE("sequential and parallel updates agree") {
    const ModelParams p = reference_params();
    const BernoulliEnv env(p, 11);
    ParticleConfig seq = step_config(40);
    ParticleConfig par = seq;
    for (Step s = 0; s < 5; ++s) {
        seq = sequential_step(seq, s, env);
        par = parallel_step(par, s, env);
        CHECK(seq == par);
    }
    for (std::uint64_t k = 0; k < 300; ++k) {
        const RandomCase rc = random_case(k, 30);
        const BernoulliEnv e(rc.params, k + 1000);
        CHECK(sequential_step(rc.config, rc.s, e) == parallel_step(rc.config, rc.s, e));
    }
}

TEST_CASE("recursion matches the explicit series") {
    for (std::uint64_t k = 0; k < 300; ++k) {
        const RandomCase rc = random_case(k, 25);
        const BernoulliEnv env(rc.params, 77 + k);
        StepRecord rec;
        parallel_step(rc.config, rc.s, env, &rec);
        const auto series = move_indicators_by_series(rc.config, rc.s, env);
        for (std::size_t i = 0; i < series.size(); ++i) CHECK(series[i] == rec.moved[i]);
    }
}

TEST_CASE("leftmost particle follows B with infinite gap") {
    const ModelParams p = reference_params();
    const BernoulliEnv env(p, 5);
    const ParticleConfig cfg(0, {0, -1, -3});
    for (Step s = 0; s < 200; ++s) {
        StepRecord rec;
        parallel_step(cfg, s, env, &rec);
        CHECK(rec.moved_at(0) == env.draw(DrawKind::B, s, 0, kInfiniteGap));
    }
    CHECK(conditional_move_prob(cfg, 0, 0, p) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(conditional_move_prob(cfg, 0, -3, p) == 0.0);
    CHECK_THROWS_AS(conditional_move_prob(cfg, 0, 3, p), std::out_of_range);
}

TEST_CASE("single particle drifts at rate alpha/(1+alpha)") {
    ModelParams p = reference_params();
    p.alpha = 1.5;
    const Step steps = 20;
    const int reps = 20000;
    const auto table = std::make_shared<const JumpTable>(p);
    double total = 0;
    for (int r = 0; r < reps; ++r) {
        const BernoulliEnv env(table, replica_key(3, static_cast<std::uint64_t>(r)));
        total += static_cast<double>(run_steps(ParticleConfig(0, {0}), 0, steps, env, {}).position(0));
    }
    const double rate = p.alpha / (1 + p.alpha);
    const double mean = total / reps;
    const double se = std::sqrt(steps * rate * (1 - rate) / reps);
    CHECK(std::abs(mean - steps * rate) < 4 * se);
}

TEST_CASE("a blocked particle only moves with its neighbour") {
    const ModelParams p = reference_params();
    const ParticleConfig cfg(0, {0, -1});
    const auto table = std::make_shared<const JumpTable>(p);
    for (std::uint64_t k = 0; k < 2000; ++k) {
        const BernoulliEnv env(table, k);
        StepRecord rec;
        const ParticleConfig next = parallel_step(cfg, 0, env, &rec);
        if (rec.moved_at(1)) CHECK(rec.moved_at(0));
        CHECK(next.is_valid());
    }
}

TEST_CASE("conditional move probability matches frequencies") {
    ModelParams p = reference_params();
    p.q = 0.7;
    p.nu = 0.4;
    p.alpha = 2.0;
    const ParticleConfig cfg(0, {10, 8, 7, 6, 2, 1, -5});
    const auto probs = conditional_move_probs(cfg, 3, p);
    const int reps = 100000;
    const auto table = std::make_shared<const JumpTable>(p);
    std::vector<int> hits(cfg.size(), 0);
    for (int r = 0; r < reps; ++r) {
        const BernoulliEnv env(table, replica_key(17, static_cast<std::uint64_t>(r)));
        StepRecord rec;
        parallel_step(cfg, 3, env, &rec);
        for (std::size_t i = 0; i < cfg.size(); ++i) hits[i] += rec.moved[i];
    }
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const Index n = static_cast<Index>(i);
        CHECK(probs[i] == doctest::Approx(conditional_move_prob(cfg, 3, n, p)).epsilon(1e-14));
        const double pr = probs[i];
        const double se = std::sqrt(pr * (1 - pr) / reps);
        CHECK(std::abs(hits[i] / double(reps) - pr) < 4 * se + 1e-12);
    }
}

TEST_CASE("trajectory indexing") {
    ModelParams p = reference_params();
    p.J = 2;
    const BernoulliEnv env(p, 8);
    const Trajectory empty = run_trajectory(step_config(5), 0, env);
    CHECK(empty.end() == 0);
    CHECK(empty.y(0) == step_config(5));
    CHECK_THROWS_AS(empty.record(0), std::out_of_range);

    const Trajectory traj = run_trajectory(step_config(5), 6, env);
    CHECK(traj.x(1, 2) == traj.y(2));
    CHECK(traj.x(3, 2) == traj.y(6));
    CHECK(run_steps(step_config(5), 0, 6, env, {}) == traj.y(6));
    CHECK_THROWS_AS(run_trajectory(step_config(5), -1, env), std::invalid_argument);

    std::ostringstream os;
    write_trajectory(os, traj);
    CHECK(os.str().rfind("0 0 -1 -2 -3 -4\n", 0) == 0);
}

TEST_CASE("exclusion holds over a long run") {
    const ModelParams p = ModelParams::scaling(0.2, 0.5, 1.0, 1, 0.5);
    const BernoulliEnv env(p, 2026);
    ParticleConfig cfg = step_config(60);
    std::size_t bad = 0;
    for (Step s = 0; s < 100000; ++s) {
        parallel_step_inplace(cfg, s, env, nullptr);
        bad += !cfg.is_valid();
    }
    CHECK(bad == 0);
}

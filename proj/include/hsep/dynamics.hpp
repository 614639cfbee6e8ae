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
#include <span>
#include <string>
#include <vector>

#include "hsep/model.hpp"
#include "hsep/random.hpp"

namespace hsep {

/// Right-finite particle configuration y_m > y_{m+1} > ... > y_M.
///
/// Particles with index below m sit at +infinity. Indices above M are not
/// tracked: particle n only ever depends on particles with smaller index, so
/// truncating from above is exact for every tracked particle.
class ParticleConfig {
public:
    ParticleConfig() = default;
    /// Throws std::invalid_argument unless positions strictly decrease.
    ParticleConfig(Index first, std::vector<Position> positions);

    Index first() const { return first_; }
    Index last() const { return first_ + static_cast<Index>(positions_.size()) - 1; }
    std::size_t size() const { return positions_.size(); }
    bool empty() const { return positions_.empty(); }
    bool contains(Index n) const { return n >= first_ && n <= last(); }

    Position position(Index n) const { return positions_[static_cast<std::size_t>(n - first_)]; }
    /// y_{n-1} - y_n - 1; infinite for the leftmost finite index.
    Gap gap(Index n) const {
        return n == first_ ? kInfiniteGap : positions_[n - first_ - 1] - positions_[n - first_] - 1;
    }

    std::span<const Position> positions() const { return positions_; }
    std::span<Position> mutable_positions() { return positions_; }

    bool is_valid() const;

    friend bool operator==(const ParticleConfig&, const ParticleConfig&) = default;

private:
    Index first_ = 0;
    std::vector<Position> positions_;
};

/// Move indicators K_n(s) of one update, one byte per tracked particle.
struct StepRecord {
    Step s = 0;
    Index first = 0;
    std::vector<std::uint8_t> moved;

    bool moved_at(Index n) const { return n >= first && moved[static_cast<std::size_t>(n - first)] != 0; }
    std::string bits() const;
};

/// Sequential update: particles are visited from the leftmost finite index,
/// each choosing B or B' according to whether its left neighbour moved.
ParticleConfig sequential_step(const ParticleConfig& cfg, Step s, const BernoulliEnv& env);

/// Parallel update y <- y + K(s, g(y)) with K from the one-sided recursion.
ParticleConfig parallel_step(const ParticleConfig& cfg, Step s, const BernoulliEnv& env, StepRecord* record = nullptr);

/// In-place variant of parallel_step for hot loops; `record` may be null.
void parallel_step_inplace(ParticleConfig& cfg, Step s, const BernoulliEnv& env, StepRecord* record);

/// K_n(s) evaluated from the explicit series of products of (B' - B) and B.
/// Quadratic in the number of particles; used to cross-check the recursion.
std::vector<int> move_indicators_by_series(const ParticleConfig& cfg, Step s, const BernoulliEnv& env);

/// E[K_n(s) | F(s)] as the finite sum over m' <= n of geometric products.
double conditional_move_prob(const ParticleConfig& cfg, Step s, Index n, const ModelParams& p);

/// E[K_n(s) | F(s)] for every tracked n in one left-to-right sweep.
std::vector<double> conditional_move_probs(const ParticleConfig& cfg, Step s, const ModelParams& p);

/// Observer callback: (s, configuration before step s, record of step s).
using StepObserver = std::function<void(Step, const ParticleConfig&, const StepRecord&)>;

/// y(0), ..., y(t_end) of one replica.
class Trajectory {
public:
    Trajectory(ParticleConfig initial, Step t0 = 0);

    Step start() const { return t0_; }
    Step end() const { return t0_ + static_cast<Step>(configs_.size()) - 1; }
    const ParticleConfig& y(Step s) const;
    /// x(t) = y(J t).
    const ParticleConfig& x(Step t, int J) const { return y(t0_ + t * J); }
    const StepRecord& record(Step s) const;

    void push(ParticleConfig next, StepRecord rec);

private:
    Step t0_;
    std::vector<ParticleConfig> configs_;
    std::vector<StepRecord> records_;
};

/// Runs steps t0 .. t0+t_end-1 with the parallel update, showing every step to
/// `observer` (if any). Returns the final configuration.
ParticleConfig run_steps(ParticleConfig cfg, Step t0, Step t_end, const BernoulliEnv& env,
                         const StepObserver& observer);

Trajectory run_trajectory(const ParticleConfig& cfg0, Step t_end, const BernoulliEnv& env,
                          const StepObserver& observer = {});

/// Trajectory dump: "s y_m y_{m+1} ..." per line.
void write_trajectory(std::ostream& os, const Trajectory& traj);
/// StepRecord dump: "s first bits" per line.
void write_records(std::ostream& os, const Trajectory& traj);

}  // namespace hsep

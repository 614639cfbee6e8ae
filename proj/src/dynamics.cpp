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

#include "hsep/dynamics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hsep {

ParticleConfig::ParticleConfig(Index first, std::vector<Position> positions)
    : first_(first), positions_(std::move(positions)) {
    if (!is_valid()) throw std::invalid_argument("particle positions must strictly decrease");
}

bool ParticleConfig::is_valid() const {
    for (std::size_t i = 1; i < positions_.size(); ++i) {
        if (positions_[i] >= positions_[i - 1]) return false;
    }
    return true;
}

std::string StepRecord::bits() const {
    std::string out(moved.size(), '0');
    for (std::size_t i = 0; i < moved.size(); ++i) out[i] = moved[i] ? '1' : '0';
    return out;
}

ParticleConfig sequential_step(const ParticleConfig& cfg, Step s, const BernoulliEnv& env) {
    ParticleConfig next = cfg;
    auto pos = next.mutable_positions();
    const Index m = cfg.first();
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const Index n = m + static_cast<Index>(i);
        bool move;
        if (i == 0) {
            move = env.draw(DrawKind::B, s, n, kInfiniteGap);
        } else {
            const Gap g = cfg.gap(n);
            // Left neighbour's new position exceeds its old one iff it moved.
            const bool neighbour_advanced = pos[i - 1] > cfg.positions()[i - 1];
            move = neighbour_advanced ? env.draw(DrawKind::BPrime, s, n, g) : env.draw(DrawKind::B, s, n, g);
        }
        if (move) pos[i] += 1;
    }
    return next;
}

void parallel_step_inplace(ParticleConfig& cfg, Step s, const BernoulliEnv& env, StepRecord* record) {
    auto pos = cfg.mutable_positions();
    const std::size_t count = pos.size();
    if (record) {
        record->s = s;
        record->first = cfg.first();
        record->moved.assign(count, 0);
    }
    const JumpTable& table = env.table();
    const int phase = env.params().phase(s);
    const Index m = cfg.first();

    // K is computed left to right from the pre-step gaps; the previous
    // particle's old position is carried so the in-place add is safe.
    int k_prev = 0;
    Position prev_old = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const Index n = m + static_cast<Index>(i);
        const Gap g = i == 0 ? kInfiniteGap : prev_old - pos[i] - 1;
        const JumpProbs pr = table.at(phase, g);
        const auto u = env.uniforms(s, n);
        const int k = k_prev ? (u[1] < pr.b_prime) : (u[0] < pr.b);
        prev_old = pos[i];
        pos[i] += k;
        if (record) record->moved[i] = static_cast<std::uint8_t>(k);
        k_prev = k;
    }
}

ParticleConfig parallel_step(const ParticleConfig& cfg, Step s, const BernoulliEnv& env, StepRecord* record) {
    ParticleConfig next = cfg;
    parallel_step_inplace(next, s, env, record);
    return next;
}

std::vector<int> move_indicators_by_series(const ParticleConfig& cfg, Step s, const BernoulliEnv& env) {
    const std::size_t count = cfg.size();
    const Index m = cfg.first();
    std::vector<int> b(count), bp(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Index n = m + static_cast<Index>(i);
        const Gap g = cfg.gap(n);
        b[i] = env.draw(DrawKind::B, s, n, g) ? 1 : 0;
        bp[i] = env.draw(DrawKind::BPrime, s, n, g) ? 1 : 0;
    }
    std::vector<int> k(count, 0);
    for (std::size_t i = 0; i < count; ++i) {
        long total = 0;
        for (std::size_t j = 0; j <= i; ++j) {
            long term = b[j];
            for (std::size_t l = j + 1; l <= i && term != 0; ++l) term *= bp[l] - b[l];
            total += term;
        }
        k[i] = static_cast<int>(total);
    }
    return k;
}

double conditional_move_prob(const ParticleConfig& cfg, Step s, Index n, const ModelParams& p) {
    if (!cfg.contains(n)) {
        if (n < cfg.first()) return 0.0;
        throw std::out_of_range("conditional_move_prob: index beyond the tracked particles");
    }
    const double a = p.alpha_at(s);
    const double ratio = (p.nu + a) / (1.0 + a);
    const double jump = a / (1.0 + a);
    double total = 0.0;
    double product = 1.0;  // prod_{n >= i > m'} ratio * q^{g_i}
    for (Index mp = n; mp >= cfg.first(); --mp) {
        const Gap g = cfg.gap(mp);
        total += product * jump * (1.0 - q_power(p.q, g));
        if (is_infinite(g)) break;
        product *= ratio * q_power(p.q, g);
        if (product == 0.0) break;
    }
    return total;
}

std::vector<double> conditional_move_probs(const ParticleConfig& cfg, Step s, const ModelParams& p) {
    const double a = p.alpha_at(s);
    const double ratio = (p.nu + a) / (1.0 + a);
    const double jump = a / (1.0 + a);
    std::vector<double> out(cfg.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const double qg = q_power(p.q, cfg.gap(cfg.first() + static_cast<Index>(i)));
        prev = jump * (1.0 - qg) + ratio * qg * prev;
        out[i] = prev;
    }
    return out;
}

Trajectory::Trajectory(ParticleConfig initial, Step t0) : t0_(t0) { configs_.push_back(std::move(initial)); }

const ParticleConfig& Trajectory::y(Step s) const {
    if (s < t0_ || s > end()) throw std::out_of_range("trajectory step out of range");
    return configs_[static_cast<std::size_t>(s - t0_)];
}

const StepRecord& Trajectory::record(Step s) const {
    if (s < t0_ || s >= end()) throw std::out_of_range("trajectory record out of range");
    return records_[static_cast<std::size_t>(s - t0_)];
}

void Trajectory::push(ParticleConfig next, StepRecord rec) {
    configs_.push_back(std::move(next));
    records_.push_back(std::move(rec));
}

ParticleConfig run_steps(ParticleConfig cfg, Step t0, Step t_end, const BernoulliEnv& env,
                         const StepObserver& observer) {
    if (t_end < 0) throw std::invalid_argument("t_end must be nonnegative");
    StepRecord rec;
    for (Step s = t0; s < t0 + t_end; ++s) {
        if (observer) {
            ParticleConfig before = cfg;
            parallel_step_inplace(cfg, s, env, &rec);
            observer(s, before, rec);
        } else {
            parallel_step_inplace(cfg, s, env, nullptr);
        }
    }
    return cfg;
}

Trajectory run_trajectory(const ParticleConfig& cfg0, Step t_end, const BernoulliEnv& env,
                          const StepObserver& observer) {
    if (t_end < 0) throw std::invalid_argument("t_end must be nonnegative");
    Trajectory traj(cfg0, 0);
    ParticleConfig cfg = cfg0;
    for (Step s = 0; s < t_end; ++s) {
        StepRecord rec;
        ParticleConfig next = parallel_step(cfg, s, env, &rec);
        if (observer) observer(s, cfg, rec);
        traj.push(next, std::move(rec));
        cfg = std::move(next);
    }
    return traj;
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
    for (Step s = traj.start(); s <= traj.end(); ++s) {
        os << s;
        for (Position y : traj.y(s).positions()) os << ' ' << y;
        os << '\n';
    }
}

void write_records(std::ostream& os, const Trajectory& traj) {
    for (Step s = traj.start(); s < traj.end(); ++s) {
        const StepRecord& r = traj.record(s);
        os << s << ' ' << r.first << ' ' << r.bits() << '\n';
    }
}

}  // namespace hsep

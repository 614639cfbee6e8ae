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

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "hsep/config.hpp"
#include "hsep/random.hpp"
#include "hsep/stats.hpp"
#include "hsep/transform.hpp"

namespace hsep {

unsigned resolve_threads(unsigned requested);

/// Runs fn(replica, key) for replica = first .. first+count-1 across a pool of
/// workers pulling indices from a shared counter. Results come back in
/// replica order, so any ordered reduction over them is deterministic. The
/// exception of the lowest failing replica is rethrown.
template <typename Fn>
auto map_replicas(std::int64_t first, std::int64_t count, std::uint64_t seed, unsigned threads, Fn fn)
    -> std::vector<decltype(fn(std::int64_t{}, std::uint64_t{}))> {
    using Result = decltype(fn(std::int64_t{}, std::uint64_t{}));
    std::vector<std::optional<Result>> slots(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    std::vector<std::exception_ptr> errors(slots.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < slots.size(); i = next++) {
            const std::int64_t replica = first + static_cast<std::int64_t>(i);
            try {
                slots[i].emplace(fn(replica, replica_key(seed, static_cast<std::uint64_t>(replica))));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::size_t>(slots.size(), 1)));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<Result> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Per-epsilon statistics of Z_eps (Z~ for step data) and log Z on the grid.
struct EpsilonResult {
    double eps = 0;
    Step t_end = 0;
    Index n_lo = 0;  // tracked index block of the initial data
    Index n_hi = 0;
    std::vector<StatsAccumulator> z;      // tau-major over (taus x rs)
    std::vector<StatsAccumulator> log_z;  // positive samples only
    std::optional<ScaledField> first_field;  // field of replica 0, if it ran here

    void merge(const EpsilonResult& other);
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<EpsilonResult> rows;

    /// Folds in a run over a disjoint replica range of the same spec.
    /// Throws std::invalid_argument if the grids differ.
    void merge(const ExperimentResult& other);
};

/// Initial data of one replica.
ParticleConfig make_initial(const ExperimentSpec& spec, const ModelParams& p, std::uint64_t key);

/// Samples every replica of `spec` on its (tau, r) grid.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Writes summary.json, stats_eps<e>.csv and, if present, field_eps<e>.csv.
void write_bundle(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace hsep

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

#include <array>
#include <cstdint>
#include <memory>

#include "hsep/model.hpp"

namespace hsep {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: every output block is a pure function of (key, counter).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit constexpr Philox4x32(std::uint64_t key)
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

    Counter operator()(Counter ctr) const {
        Key k = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        return ctr;
    }

    /// Block for a pair of 64-bit counter words.
    Counter block(std::uint64_t c0, std::uint64_t c1) const {
        return (*this)({static_cast<std::uint32_t>(c0), static_cast<std::uint32_t>(c0 >> 32),
                        static_cast<std::uint32_t>(c1), static_cast<std::uint32_t>(c1 >> 32)});
    }

    std::uint64_t key() const { return std::uint64_t{key_[0]} | (std::uint64_t{key_[1]} << 32); }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    Key key_;
};

/// Uniform in (0, 1) on the midpoints of a 2^-52 grid; never returns 0 or 1.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Stream key of replica `replica` under master seed `seed`.
///
/// Depends only on the pair, so adding replicas never reshuffles existing ones.
std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica);

/// Sub-stream key for a named purpose (initial data, SHE noise, ...).
std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag);

/// Standard normal pair from one counter block (Box-Muller).
std::array<double, 2> normal_pair(const Philox4x32& gen, std::uint64_t c0, std::uint64_t c1);

enum class DrawKind { B, BPrime };

/// The Bernoulli environment of one replica: B_n(s,g) and B'_n(s,g) for all
/// (s, n), realised lazily from a counter-based stream keyed by (s, n).
class BernoulliEnv {
public:
    BernoulliEnv(std::shared_ptr<const JumpTable> table, std::uint64_t key)
        : table_(std::move(table)), gen_(key) {}

    BernoulliEnv(const ModelParams& p, std::uint64_t key)
        : BernoulliEnv(std::make_shared<const JumpTable>(p), key) {}

    /// Uniforms (u_B, u_B') attached to site (s, n).
    std::array<double, 2> uniforms(Step s, Index n) const {
        const auto c = gen_.block(static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(n));
        return {to_unit(c[0], c[1]), to_unit(c[2], c[3])};
    }

    bool draw(DrawKind kind, Step s, Index n, Gap g) const {
        const JumpProbs pr = table_->at_step(s, g);
        const auto u = uniforms(s, n);
        return kind == DrawKind::B ? u[0] < pr.b : u[1] < pr.b_prime;
    }

    const JumpTable& table() const { return *table_; }
    const ModelParams& params() const { return table_->params(); }
    std::uint64_t key() const { return gen_.key(); }

private:
    std::shared_ptr<const JumpTable> table_;
    Philox4x32 gen_;
};

}  // namespace hsep

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

#include "hsep/random.hpp"

#include <cmath>
#include <numbers>

namespace hsep {

namespace {

// Counter word reserved for key derivation; simulation counters never reach it.
constexpr std::uint64_t kDerivationLane = 0xFFFF'FFFF'FFFF'FFF1ull;

std::uint64_t fold(const Philox4x32::Counter& c) {
    return (std::uint64_t{c[0]} << 32 | c[1]) ^ (std::uint64_t{c[2]} << 32 | c[3]);
}

}  // namespace

std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica) {
    return fold(Philox4x32(seed).block(replica, kDerivationLane));
}

std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag) {
    return fold(Philox4x32(key).block(kDerivationLane, tag));
}

std::array<double, 2> normal_pair(const Philox4x32& gen, std::uint64_t c0, std::uint64_t c1) {
    const auto c = gen.block(c0, c1);
    const double u1 = to_unit(c[0], c[1]);
    const double u2 = to_unit(c[2], c[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace hsep

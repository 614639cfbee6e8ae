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
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hsep {

using Step = std::int64_t;
using Index = std::int64_t;
using Position = std::int64_t;
using Gap = std::int64_t;

/// Gap of a particle with no finite left neighbour.
inline constexpr Gap kInfiniteGap = std::numeric_limits<Gap>::max();

inline bool is_infinite(Gap g) { return g == kInfiniteGap; }

/// The quadruple (q, nu, alpha, J) plus the tilt density rho.
///
/// In scaling mode `epsilon` is set and q = exp(-epsilon).
struct ModelParams {
    double q = 0.5;
    double nu = 0.0;
    double alpha = 1.0;
    int J = 1;
    double rho = 0.5;
    std::optional<double> epsilon;

    /// Weak-noise parametrisation q = exp(-eps).
    static ModelParams scaling(double eps, double nu, double alpha, int J, double rho);

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    /// -log q, the effective noise strength (infinite for q = 0).
    double eps_effective() const;

    /// alpha(s) = alpha * q^{s mod J}.
    double alpha_at(Step s) const;

    int phase(Step s) const {
        const Step r = s % J;
        return static_cast<int>(r < 0 ? r + J : r);
    }
};

struct DerivedConstants {
    double gamma = 0;
    std::vector<double> a;  // a_j, j = 0..J
    double b = 0;
    double b_prime = 0;
    double r_star = 0;
    double tau_star = 0;
    // One entry per phase j = s mod J.
    std::vector<double> mu;
    std::vector<double> lambda;
    std::vector<double> sigma;
    // Sums over one full period.
    double mu_period = 0;
    double log_lambda_period = 0;
    double sigma_period = 0;
};

DerivedConstants derive_constants(const ModelParams& p);

/// mu_hat(t) = sum_{s<t} mu(s), evaluated as whole periods plus a remainder.
double mu_hat(Step t, const DerivedConstants& c);
/// log lambda_hat(t) = sum_{s<t} log lambda(s).
double log_lambda_hat(Step t, const DerivedConstants& c);
/// sum_{s=t1}^{t2-1} sigma(s).
double sigma_sum(Step t2, Step t1, const DerivedConstants& c);

struct JumpProbs {
    double b;        // P(B_n(s,g) = 1)
    double b_prime;  // P(B'_n(s,g) = 1)
};

/// q^g with q^inf = 0.
double q_power(double q, Gap g);

JumpProbs jump_probs(Step s, Gap g, const ModelParams& p);

/// Precomputed jump probabilities per phase for small gaps; falls back to
/// jump_probs() beyond the table.
class JumpTable {
public:
    explicit JumpTable(const ModelParams& p, Gap table_size = 4096);

    JumpProbs at(int phase, Gap g) const;
    JumpProbs at_step(Step s, Gap g) const { return at(params_.phase(s), g); }
    const ModelParams& params() const { return params_; }

private:
    ModelParams params_;
    Gap size_;
    std::vector<JumpProbs> table_;  // phase-major
    std::vector<JumpProbs> infinite_;
};

}  // namespace hsep

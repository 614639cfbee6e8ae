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

#include "hsep/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hsep {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
    throw std::invalid_argument("invalid parameter '" + field + "': " + what);
}

}  // namespace

ModelParams ModelParams::scaling(double eps, double nu, double alpha, int J, double rho) {
    ModelParams p;
    p.epsilon = eps;
    p.q = std::exp(-eps);
    p.nu = nu;
    p.alpha = alpha;
    p.J = J;
    p.rho = rho;
    p.validate();
    return p;
}

void ModelParams::validate() const {
    if (!(q >= 0.0 && q < 1.0)) bad_field("q", "must lie in [0, 1)");
    if (!(nu >= 0.0 && nu < 1.0)) bad_field("nu", "must lie in [0, 1)");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) bad_field("alpha", "must be a positive finite real");
    if (J < 1) bad_field("J", "must be a positive integer");
    if (!(rho > 0.0 && rho < 1.0)) bad_field("rho", "must lie in (0, 1)");
    if (epsilon) {
        if (!(*epsilon > 0.0) || !std::isfinite(*epsilon)) bad_field("epsilon", "must be a positive finite real");
        if (std::abs(q - std::exp(-*epsilon)) > 4 * std::numeric_limits<double>::epsilon()) {
            bad_field("q", "must equal exp(-epsilon) in scaling mode");
        }
    }
}

double ModelParams::eps_effective() const {
    if (epsilon) return *epsilon;
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(q);
}

double ModelParams::alpha_at(Step s) const { return alpha * std::pow(q, phase(s)); }

DerivedConstants derive_constants(const ModelParams& p) {
    p.validate();
    DerivedConstants c;
    c.gamma = (1.0 - p.rho) / (1.0 - p.nu * p.rho);
    if (p.nu * c.gamma >= 1.0) throw std::domain_error("nu * gamma >= 1");
    c.b = c.gamma / (1.0 - c.gamma);
    c.b_prime = p.nu * c.gamma / (1.0 - p.nu * c.gamma);
    if (c.b == c.b_prime) throw std::domain_error("b == b'");
    c.r_star = 1.0 / (c.b - c.b_prime);

    c.a.resize(p.J + 1);
    double alpha_j = p.alpha;
    for (int j = 0; j <= p.J; ++j) {
        c.a[j] = alpha_j * c.gamma / (1.0 + alpha_j * c.gamma);
        alpha_j *= p.q;
    }

    c.mu.resize(p.J);
    c.lambda.resize(p.J);
    c.sigma.resize(p.J);
    const double bsum = c.b + c.b_prime;
    for (int j = 0; j < p.J; ++j) {
        const double a0 = c.a[j];
        const double a1 = c.a[j + 1];
        const double alpha_s = p.alpha * std::pow(p.q, j);
        c.mu[j] = (a0 - a1) * c.r_star;
        c.lambda[j] = (1.0 + alpha_s * c.gamma) / (1.0 + p.q * alpha_s * c.gamma);
        c.sigma[j] = a0 * a0 - a1 * a1 + (a0 - a1) * bsum;
        c.mu_period += c.mu[j];
        c.log_lambda_period += std::log(c.lambda[j]);
        c.sigma_period += c.sigma[j];
    }

    // The period sum of sigma telescopes to a_0^2 - a_J^2 + (a_0 - a_J)(b + b').
    const double a0 = c.a.front();
    const double aJ = c.a.back();
    const double bracket = a0 * a0 - aJ * aJ + (a0 - aJ) * bsum;
    c.tau_star = p.eps_effective() / bracket;
    return c;
}

namespace {

template <class PerPhase>
double periodic_sum(Step t, const std::vector<double>& per_phase, double period_total, PerPhase f) {
    const Step J = static_cast<Step>(per_phase.size());
    const Step full = t / J;
    double partial = 0.0;
    for (Step j = 0; j < t - full * J; ++j) partial += f(per_phase[j]);
    return static_cast<double>(full) * period_total + partial;
}

}  // namespace

double mu_hat(Step t, const DerivedConstants& c) {
    return periodic_sum(t, c.mu, c.mu_period, [](double v) { return v; });
}

double log_lambda_hat(Step t, const DerivedConstants& c) {
    return periodic_sum(t, c.lambda, c.log_lambda_period, [](double v) { return std::log(v); });
}

double sigma_sum(Step t2, Step t1, const DerivedConstants& c) {
    auto upto = [&](Step t) { return periodic_sum(t, c.sigma, c.sigma_period, [](double v) { return v; }); };
    return upto(t2) - upto(t1);
}

double q_power(double q, Gap g) {
    if (is_infinite(g)) return 0.0;
    if (g == 0) return 1.0;
    return std::pow(q, static_cast<double>(g));
}

JumpProbs jump_probs(Step s, Gap g, const ModelParams& p) {
    const double a = p.alpha_at(s);
    const double qg = q_power(p.q, g);
    return {a * (1.0 - qg) / (1.0 + a), (a + p.nu * qg) / (1.0 + a)};
}

JumpTable::JumpTable(const ModelParams& p, Gap table_size)
    : params_(p), size_(table_size) {
    p.validate();
    table_.resize(static_cast<std::size_t>(p.J) * static_cast<std::size_t>(size_));
    infinite_.resize(p.J);
    for (int j = 0; j < p.J; ++j) {
        for (Gap g = 0; g < size_; ++g) table_[j * size_ + g] = jump_probs(j, g, p);
        infinite_[j] = jump_probs(j, kInfiniteGap, p);
    }
}

JumpProbs JumpTable::at(int phase, Gap g) const {
    if (is_infinite(g)) return infinite_[phase];
    if (g < size_) return table_[phase * size_ + g];
    return jump_probs(phase, g, params_);
}

}  // namespace hsep

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

#include "hsep/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "hsep/stats.hpp"

namespace hsep {

double KernelTable::total_mass() const {
    long double total = 0;
    for (double w : weights) total += w;
    return static_cast<double>(total);
}

double KernelTable::mean() const {
    long double m = 0, total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        m += static_cast<long double>(weights[i]) * (offset + static_cast<long double>(shift + static_cast<Index>(i)));
        total += weights[i];
    }
    return static_cast<double>(m / total);
}

double KernelTable::variance() const {
    const long double m = mean();
    long double v = 0, total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const long double x = offset + static_cast<long double>(shift + static_cast<Index>(i)) - m;
        v += static_cast<long double>(weights[i]) * x * x;
        total += weights[i];
    }
    return static_cast<double>(v / total);
}

KernelTable base_kernel(Step s, const ModelParams& p, double tail_tol) {
    const double a = p.alpha_at(s);
    const double jump = a * (1.0 - p.q) / (1.0 + a);
    const double ratio = (p.nu + a) / (1.0 + a);
    const double exit = (1.0 - p.nu) / (1.0 + a);

    KernelTable k;
    k.weights.push_back(1.0 - jump);
    // Mass beyond n is jump * ratio^n.
    double term = jump * exit;
    double tail = jump;
    while (tail > tail_tol && term > 0.0) {
        k.weights.push_back(term);
        tail *= ratio;
        term *= ratio;
    }
    k.tail_mass_bound = std::max(tail, 0.0);
    return k;
}

KernelTable tilted_kernel(Step s, const ModelParams& p, double tail_tol) {
    const DerivedConstants c = derive_constants(p);
    const int j = p.phase(s);
    const double a = p.alpha_at(s);
    const double jump = a * (1.0 - p.q) / (1.0 + a);
    const double ratio = (p.nu + a) / (1.0 + a);
    const double exit = (1.0 - p.nu) / (1.0 + a);
    const double lambda = c.lambda[j];

    KernelTable k;
    k.offset = -c.mu[j];
    k.weights.push_back(lambda * (1.0 - jump));
    // Tilted mass beyond n: lambda * jump * exit * rho^{n+1} ratio^n / (1 - rho ratio).
    double term = lambda * jump * exit * p.rho;
    const double step = ratio * p.rho;
    double tail = term / (1.0 - step);
    double untilted_tail = jump;  // P(X' > n) at n = 0
    while (untilted_tail > tail_tol && term > 0.0) {
        k.weights.push_back(term);
        term *= step;
        tail *= step;
        untilted_tail *= ratio;
    }
    k.tail_mass_bound = std::max(tail, 0.0);
    const double mass = k.total_mass();
    if (std::abs(mass + k.tail_mass_bound - 1.0) > 1e-10) {
        throw std::runtime_error("tilted kernel does not normalise: mass = " + std::to_string(mass));
    }
    return k;
}

KernelTable convolve(const KernelTable& a, const KernelTable& b) {
    KernelTable out;
    out.offset = a.offset + b.offset;
    out.shift = a.shift + b.shift;
    out.tail_mass_bound = a.tail_mass_bound + b.tail_mass_bound;
    if (a.weights.empty() || b.weights.empty()) return out;
    out.weights.assign(a.weights.size() + b.weights.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        const double wa = a.weights[i];
        if (wa == 0.0) continue;
        double* dst = out.weights.data() + i;
        for (std::size_t j = 0; j < b.weights.size(); ++j) dst[j] += wa * b.weights[j];
    }
    return out;
}

void trim(KernelTable& k, double tol, double rho) {
    if (k.weights.empty()) return;
    const std::size_t size = k.weights.size();
    double total = 0.0;
    for (double w : k.weights) total += w;
    std::vector<double> plain(size), untilted(size, 0.0);
    for (std::size_t i = 0; i < size; ++i) plain[i] = total > 0.0 ? k.weights[i] / total : 0.0;
    if (rho != 1.0) {
        const double log_rho = std::log(rho);
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < size; ++i) {
            const double idx = static_cast<double>(k.shift + static_cast<Index>(i));
            untilted[i] = k.weights[i] > 0.0 ? std::log(k.weights[i]) - idx * log_rho
                                             : -std::numeric_limits<double>::infinity();
            peak = std::max(peak, untilted[i]);
        }
        double sum = 0.0;
        for (double& m : untilted) sum += (m = std::exp(m - peak));
        for (double& m : untilted) m /= sum;
    }
    // A weight goes only if it is negligible in both measures.
    std::size_t lo = 0;
    double cut_p = 0.0, cut_u = 0.0;
    while (lo + 1 < size && cut_p + plain[lo] < tol && cut_u + untilted[lo] < tol) {
        cut_p += plain[lo];
        cut_u += untilted[lo++];
    }
    std::size_t hi = size;
    while (hi > lo + 1 && cut_p + plain[hi - 1] < tol && cut_u + untilted[hi - 1] < tol) {
        cut_p += plain[--hi];
        cut_u += untilted[hi];
    }
    if (lo == 0 && hi == size) return;
    for (std::size_t i = 0; i < lo; ++i) k.tail_mass_bound += k.weights[i];
    for (std::size_t i = hi; i < size; ++i) k.tail_mass_bound += k.weights[i];
    k.weights = std::vector<double>(k.weights.begin() + static_cast<std::ptrdiff_t>(lo),
                                    k.weights.begin() + static_cast<std::ptrdiff_t>(hi));
    k.shift += static_cast<Index>(lo);
}

namespace {

KernelTable delta_kernel() {
    KernelTable k;
    k.weights = {1.0};
    return k;
}

}  // namespace

KernelTable heat_kernel(Step t2, Step t1, const ModelParams& p, double trim_tol) {
    if (t2 < t1) throw std::invalid_argument("heat_kernel requires t1 <= t2");
    const DerivedConstants c = derive_constants(p);
    std::vector<KernelTable> per_phase;
    for (int j = 0; j < p.J; ++j) per_phase.push_back(tilted_kernel(j, p));

    KernelTable acc = delta_kernel();
    for (Step s = t1; s < t2; ++s) {
        acc = convolve(acc, per_phase[p.phase(s)]);
        trim(acc, trim_tol, p.rho);
    }
    acc.offset = mu_hat(t1, c) - mu_hat(t2, c);
    return acc;
}

BackwardHeatKernels::BackwardHeatKernels(Step t2, const ModelParams& p, double trim_tol)
    : t2_(t2), params_(p), constants_(derive_constants(p)), trim_tol_(trim_tol) {
    for (int j = 0; j < p.J; ++j) per_phase_.push_back(tilted_kernel(j, p));
    cache_.emplace(t2_, delta_kernel());
}

const KernelTable& BackwardHeatKernels::from(Step s) {
    if (s > t2_) throw std::invalid_argument("BackwardHeatKernels: s beyond t2");
    if (auto it = cache_.find(s); it != cache_.end()) return it->second;
    // Extend from the closest cached start above s.
    auto it = cache_.lower_bound(s);
    KernelTable acc = it->second;
    for (Step u = it->first - 1; u >= s; --u) {
        acc = convolve(per_phase_[params_.phase(u)], acc);
        trim(acc, trim_tol_, params_.rho);
        acc.offset = mu_hat(u, constants_) - mu_hat(t2_, constants_);
        cache_.emplace(u, acc);
    }
    return cache_.at(s);
}

double phi(double x, Step s, const ModelParams& p) {
    const DerivedConstants c = derive_constants(p);
    const int j = p.phase(s);
    const double a = p.alpha_at(s);
    const double y = x * p.rho;
    if (!(x > 0.0) || !(y * (p.nu + a) / (1.0 + a) < 1.0)) {
        throw std::domain_error("phi: x outside the disk of convergence");
    }
    // Generating function of X'(s) at y, tilted by lambda and recentred by mu.
    const double f = c.lambda[j] * (1.0 - p.nu * y + p.q * a - p.q * a * y) / (1.0 - p.nu * y + a - a * y);
    return std::pow(x, -c.mu[j]) * f;
}

double phi_direct(double x, const KernelTable& tilted) {
    long double total = 0;
    for (std::size_t i = 0; i < tilted.weights.size(); ++i) {
        const double point = tilted.offset + static_cast<double>(tilted.shift + static_cast<Index>(i));
        total += static_cast<long double>(tilted.weights[i]) * std::pow(static_cast<long double>(x), point);
    }
    return static_cast<double>(total);
}

double exponential_moment(const KernelTable& k, double u) {
    long double total = 0;
    for (std::size_t i = 0; i < k.weights.size(); ++i) {
        const double point = k.offset + static_cast<double>(k.shift + static_cast<Index>(i));
        total += static_cast<long double>(k.weights[i]) * std::exp(static_cast<long double>(u) * std::abs(point));
    }
    return static_cast<double>(total);
}

KernelScalingReport kernel_scaling_probe(double T, const std::vector<double>& eps_list, double nu, double alpha,
                                         int J, double rho, Step lag_min, Step lag_max, double u) {
    KernelScalingReport report;
    report.u = u;
    report.T = T;
    report.exponents_in_bracket = true;
    report.variance_matches = true;
    double gaussian_bound = 0.0;

    for (double eps : eps_list) {
        const ModelParams p = ModelParams::scaling(eps, nu, alpha, J, rho);
        const DerivedConstants c = derive_constants(p);
        KernelScalingReport::Row row;
        row.eps = eps;

        const Step moment_horizon = static_cast<Step>(std::floor(T / (eps * eps * eps)));
        const Step horizon = std::max(lag_max, moment_horizon);
        std::vector<KernelTable> per_phase;
        for (int j = 0; j < J; ++j) per_phase.push_back(tilted_kernel(j, p));

        KernelTable acc = delta_kernel();
        Step next_lag = lag_min;
        Step next_moment = 1;
        for (Step t = 1; t <= horizon; ++t) {
            acc = convolve(acc, per_phase[p.phase(t - 1)]);
            trim(acc, 1e-17);
            acc.offset = -mu_hat(t, c);
            if (t == next_lag && t <= lag_max && t <= moment_horizon) {
                const double sup = *std::max_element(acc.weights.begin(), acc.weights.end());
                row.lags.push_back(t);
                row.sup_norm.push_back(sup);
                row.scaled_sup.push_back(sup * std::sqrt(eps * static_cast<double>(t + 1)));
                row.variance.push_back(acc.variance());
                row.variance_expected.push_back(c.r_star * c.r_star * sigma_sum(t, 0, c));
                next_lag *= 2;
            }
            if (t <= moment_horizon && (t == next_moment || t == moment_horizon)) {
                row.moment_lags.push_back(t);
                row.exp_moment.push_back(exponential_moment(acc, u * eps));
                next_moment *= 2;
            }
        }

        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < row.lags.size(); ++i) {
            lx.push_back(std::log(static_cast<double>(row.lags[i] + 1)));
            ly.push_back(std::log(row.sup_norm[i]));
            const double rel = std::abs(row.variance[i] - row.variance_expected[i]) / row.variance_expected[i];
            if (rel > 1e-8) report.variance_matches = false;
        }
        if (lx.size() < 2) throw std::invalid_argument("kernel_scaling_probe: fewer than two lags within eps^-3 T");
        row.time_exponent = linear_fit(lx, ly).slope;
        if (row.time_exponent < -0.6 || row.time_exponent > -0.4) report.exponents_in_bracket = false;
        row.exp_moment_max = row.exp_moment.empty() ? 1.0 : *std::max_element(row.exp_moment.begin(), row.exp_moment.end());

        // Gaussian comparison: E e^{u eps |X|} <= 2 exp(u^2 eps^2 Var / 2).
        const double var_scaled = eps * eps * c.r_star * c.r_star * sigma_sum(moment_horizon, 0, c);
        gaussian_bound = std::max(gaussian_bound, 2.0 * std::exp(0.5 * u * u * var_scaled));
        report.rows.push_back(std::move(row));
    }

    report.moments_bounded = true;
    for (const auto& row : report.rows) {
        if (row.exp_moment_max > 1.1 * gaussian_bound) report.moments_bounded = false;
    }
    return report;
}

void write_kernel(std::ostream& os, const KernelTable& k) {
    os << std::setprecision(17) << k.offset << ' ' << k.shift << ' ' << k.tail_mass_bound << '\n';
    for (double w : k.weights) os << w << '\n';
}

KernelTable read_kernel(std::istream& is) {
    KernelTable k;
    if (!(is >> k.offset >> k.shift >> k.tail_mass_bound)) throw std::runtime_error("kernel dump: bad header");
    double w;
    while (is >> w) k.weights.push_back(w);
    return k;
}

}  // namespace hsep

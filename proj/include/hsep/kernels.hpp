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

#include <iosfwd>
#include <map>
#include <vector>

#include "hsep/model.hpp"

namespace hsep {

/// A probability distribution on the shifted lattice {offset + shift + i}.
///
/// `shift` is the integer index of weights[0]; `offset` is the fractional
/// lattice origin (e.g. -mu(s) for the tilted one-step kernel). Masses cut
/// off by truncation are accounted for in `tail_mass_bound`.
struct KernelTable {
    double offset = 0.0;
    Index shift = 0;
    std::vector<double> weights;
    double tail_mass_bound = 0.0;

    Index min_index() const { return shift; }
    Index max_index() const { return shift + static_cast<Index>(weights.size()) - 1; }
    /// Weight at integer lattice index k (0 outside the support).
    double at(Index k) const {
        return (k < shift || k > max_index()) ? 0.0 : weights[static_cast<std::size_t>(k - shift)];
    }
    double total_mass() const;
    double mean() const;      // over lattice points offset + k
    double variance() const;  // over lattice points offset + k
};

/// Truncation threshold for geometric tails.
inline constexpr double kTailTolerance = 1e-16;

/// Law of the untilted one-step walk X'(s) on N.
KernelTable base_kernel(Step s, const ModelParams& p, double tail_tol = kTailTolerance);

/// Law of the tilted, centred walk X(s) on N - mu(s). The support is cut
/// once the untilted tail falls below `tail_tol`.
/// Throws std::runtime_error if the normalisation misses 1 by more than 1e-10.
KernelTable tilted_kernel(Step s, const ModelParams& p, double tail_tol = kTailTolerance);

/// Discrete convolution; offsets add, tail bounds add.
KernelTable convolve(const KernelTable& a, const KernelTable& b);

/// Drops outer weights whose summed mass stays below `tol` on each side.
///
/// With rho < 1 a weight must also be negligible after undoing the tilt,
/// i.e. under w(k) rho^{-k} normalised to one: that measure bounds the error
/// of convolving against a field obeying Z(n-k) <= rho^{-k} Z(n).
void trim(KernelTable& k, double tol, double rho = 1.0);

/// p(t2, t1, .): law of X(t1) + ... + X(t2 - 1). The lattice offset equals
/// mu_hat(t1) - mu_hat(t2) and is accumulated from whole periods.
KernelTable heat_kernel(Step t2, Step t1, const ModelParams& p, double trim_tol = 1e-17);

/// Caches p(t2, s) for a fixed t2 and decreasing s, the access pattern of
/// the discrete Duhamel sum.
class BackwardHeatKernels {
public:
    BackwardHeatKernels(Step t2, const ModelParams& p, double trim_tol = 1e-17);
    /// p(t2, s) for s <= t2.
    const KernelTable& from(Step s);

private:
    Step t2_;
    ModelParams params_;
    DerivedConstants constants_;
    double trim_tol_;
    std::vector<KernelTable> per_phase_;
    std::map<Step, KernelTable> cache_;
};

/// E[x^{X(s)}] from the closed-form generating function.
/// Throws std::domain_error outside the disk of convergence.
double phi(double x, Step s, const ModelParams& p);

/// E[x^{X(s)}] by direct summation over the tilted kernel.
double phi_direct(double x, const KernelTable& tilted);

/// Exponential moment sum_zeta p(zeta) exp(u |zeta|).
double exponential_moment(const KernelTable& k, double u);

struct KernelScalingReport {
    struct Row {
        double eps = 0;
        std::vector<Step> lags;
        std::vector<double> sup_norm;          // sup_zeta p(t, 0, zeta)
        std::vector<double> scaled_sup;        // sup * sqrt(eps (t + 1))
        std::vector<double> variance;          // realised variance of the t-step walk
        std::vector<double> variance_expected; // sum of r*^2 sigma(s)
        double time_exponent = 0;              // log-log slope of sup_norm
        std::vector<Step> moment_lags;
        std::vector<double> exp_moment;        // sum p e^{u eps |zeta|}
        double exp_moment_max = 0;
    };
    std::vector<Row> rows;
    double u = 1.0;
    double T = 1.0;
    bool exponents_in_bracket = false;
    bool moments_bounded = false;
    bool variance_matches = false;
    bool pass() const { return exponents_in_bracket && moments_bounded && variance_matches; }
};

/// Empirical scaling of the heat kernel: sup-norm decay exponent over lags in
/// [lag_min, lag_max], and boundedness of the exponential moment over lags up
/// to eps^{-3} T.
KernelScalingReport kernel_scaling_probe(double T, const std::vector<double>& eps_list, double nu, double alpha,
                                         int J, double rho, Step lag_min = 16, Step lag_max = 4096, double u = 1.0);

/// Text dump: first line "offset shift tail_mass_bound", then one weight per line.
void write_kernel(std::ostream& os, const KernelTable& k);
KernelTable read_kernel(std::istream& is);

}  // namespace hsep

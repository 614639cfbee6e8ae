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
#include <iosfwd>
#include <vector>

#include "hsep/dynamics.hpp"
#include "hsep/kernels.hpp"
#include "hsep/model.hpp"

namespace hsep {

/// Q_n = q^{y_n + n}; zero for n below the leftmost finite particle.
/// Throws std::out_of_range above the last tracked particle.
double q_duality(const ParticleConfig& cfg, Index n, const ModelParams& p);

/// Snapshot of Z(t, .) over a contiguous block of particle indices.
///
/// Site xi of the lattice Xi(t) = Z - mu_hat(t) corresponds to the particle
/// index n = xi + mu_hat(t); everything here is stored by n.
struct TransformField {
    Step t = 0;
    double mu_hat = 0;
    double log_lambda_hat = 0;
    Index first_particle = 0;  // m: Z vanishes for n < m
    Index n_lo = 0;
    std::vector<double> values;  // Z at n_lo, n_lo + 1, ...

    Index n_hi() const { return n_lo + static_cast<Index>(values.size()) - 1; }
    bool covers(Index n) const { return n < first_particle || (n >= n_lo && n <= n_hi()); }
    /// Z(t, n); exact zero below m, throws std::out_of_range if not stored.
    double at(Index n) const;
    double xi(Index n) const { return static_cast<double>(n) - mu_hat; }
    /// Index of the lattice site xi; throws if xi is not on Xi(t).
    Index index_of(double xi) const;
};

/// Z(t, n) = lambda_hat(t) rho^n Q_n(t) for n in [n_lo, n_hi].
TransformField build_Z(const ParticleConfig& cfg, Step t, Index n_lo, Index n_hi, const ModelParams& p,
                       const DerivedConstants& c);
/// Same, over every tracked particle.
TransformField build_Z(const ParticleConfig& cfg, Step t, const ModelParams& p, const DerivedConstants& c);

/// [k * Z](n) = sum_j k(j) Z(n - j) on the index lattice for n in [lo, hi].
/// Throws std::out_of_range if the field does not cover the kernel support.
std::vector<double> apply_kernel(const KernelTable& k, const TransformField& z, Index lo, Index hi);

/// W(s, n) = lambda(s)(q - 1)(K_n(s) - E[K_n(s) | F(s)]).
double noise_increment(const ParticleConfig& cfg, Step s, Index n, const StepRecord& rec, const ModelParams& p,
                       const DerivedConstants& c);
/// W(s, n) for every tracked particle, from one recursion sweep.
std::vector<double> noise_field(const ParticleConfig& cfg, Step s, const StepRecord& rec, const ModelParams& p,
                                const DerivedConstants& c);

/// Z evaluated directly from a configuration at real particle-index
/// coordinate x (linear interpolation between integer indices).
double interpolate_index(const ParticleConfig& cfg, Step t, double x, const ModelParams& p,
                         const DerivedConstants& c);

/// log Z(t, n) at a lattice point, written as a height function:
/// -eps y_n + (eps^{-1} log rho - 1) r* r + log lambda_hat + (log rho - eps) mu_hat.
double lattice_height(const ParticleConfig& cfg, Step t, Index n, const ModelParams& p, const DerivedConstants& c);

struct ScaledField {
    double epsilon = 0;
    std::vector<double> taus;
    std::vector<double> rs;
    std::vector<double> Z;  // tau-major
    std::vector<double> H;  // log Z

    double z(std::size_t i_tau, std::size_t i_r) const { return Z[i_tau * rs.size() + i_r]; }
    double h(std::size_t i_tau, std::size_t i_r) const { return H[i_tau * rs.size() + i_r]; }
};

/// Microscopic time of macroscopic tau: eps^{-3} tau* J tau.
double micro_time(double tau, const ModelParams& p, const DerivedConstants& c);
/// Microscopic lattice coordinate xi of macroscopic r: eps^{-1} r* r.
double micro_space(double r, const ModelParams& p, const DerivedConstants& c);

/// Z_eps(tau, r) on a grid: interpolate in xi first, then in t.
/// Throws std::out_of_range if a grid point falls outside the trajectory.
ScaledField scale_field(const Trajectory& traj, const ModelParams& p, const std::vector<double>& taus,
                        const std::vector<double>& rs);

/// Streaming form of scale_field: runs cfg0 forward from t = 0 with `env`
/// and samples Z_eps on the grid without storing the trajectory.
/// `taus` must be sorted.
ScaledField sample_scaled_field(ParticleConfig cfg0, const BernoulliEnv& env, const ModelParams& p,
                                const std::vector<double>& taus, const std::vector<double>& rs);

/// Prefactor r* eps^{-1} (1 - rho) that turns Z into the unit-mass field.
double step_mass_prefactor(const ModelParams& p, const DerivedConstants& c);

/// E Z~_eps(tau, r) for step data. The noise term has mean zero, so this is
/// the heat kernel applied to the initial field, interpolated exactly as in
/// sample_scaled_field.
double expected_step_field(double tau, double r, const ModelParams& p);

/// y_n = -n for n = 0 .. count-1.
ParticleConfig make_step_ic(Index count);

/// Index block [lo, hi] of a near-equilibrium run.
struct IndexRange {
    Index lo = 0;
    Index hi = 0;
};

/// Particles needed so that the xi-window [xi_lo, xi_hi] at time t_end is
/// insulated from the artificial left end: a diffusive margin of `spread`
/// kernel standard deviations plus a coalescence margin for the move chain.
IndexRange near_equilibrium_range(double xi_lo, double xi_hi, Step t_end, const ModelParams& p,
                                  const DerivedConstants& c, double spread = 8.0);

/// Near-equilibrium data: y_0 = 0 and i.i.d. gaps with the q-negative
/// binomial law P(g = k) proportional to z^k (nu;q)_k / (q;q)_k, z = q gamma.
///
/// This product law is invariant for the dynamics, and z = q gamma is the
/// member with E q^{-g} = 1/rho, so that E Z(0, n) does not depend on n.
/// For nu = q it is the geometric law with ratio z.
struct NearEquilibriumSpec {
    Index n_lo = -100;
    Index n_hi = 100;
};

class GapLaw {
public:
    /// Tabulates the law until the remaining mass is below 1e-17.
    GapLaw(double q, double nu, double z);

    double z() const { return z_; }
    double pmf(Gap k) const { return k < 0 || k >= static_cast<Gap>(pmf_.size()) ? 0.0 : pmf_[static_cast<std::size_t>(k)]; }
    double mean() const;
    double variance() const;
    /// Inverse-CDF draw from a uniform in (0, 1).
    Gap sample(double u) const;
    std::size_t support_size() const { return pmf_.size(); }

private:
    double z_;
    std::vector<double> pmf_;
    std::vector<double> cdf_;
};

GapLaw near_equilibrium_gap_law(const ModelParams& p, const DerivedConstants& c);

ParticleConfig make_near_equilibrium_ic(const NearEquilibriumSpec& spec, const ModelParams& p, std::uint64_t key);

/// H^J(tau, r) at every tracked lattice point of x(t_x) = y(J t_x), in the
/// form (r, H). Requires t_y = J t_x.
struct HeightSample {
    double r = 0;
    double h = 0;
};
std::vector<HeightSample> height_reading(const ParticleConfig& cfg, Step t_y, const ModelParams& p);

/// H~ = H^J + log(eps^{-1}(1 - rho) r*).
double step_height_offset(const ModelParams& p, const DerivedConstants& c);

/// CSV dumps: "t,xi,Z" and "tau,r,Z,H".
void write_field_csv(std::ostream& os, const TransformField& z, bool header = true);
void write_scaled_csv(std::ostream& os, const ScaledField& f);

}  // namespace hsep

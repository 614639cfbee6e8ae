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

#include "hsep/transform.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hsep/random.hpp"

namespace hsep {

namespace {

constexpr std::uint64_t kInitialDataTag = 0x1C0FFEEull;

// log Z(t, n) for a tracked particle; -inf when q = 0 and the exponent is positive.
double log_z(const ParticleConfig& cfg, Step t, Index n, const ModelParams& p, const DerivedConstants& c) {
    const double exponent = static_cast<double>(cfg.position(n) + n);
    double log_q_part;
    if (p.q == 0.0) {
        log_q_part = exponent == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    } else {
        log_q_part = exponent * std::log(p.q);
    }
    return log_lambda_hat(t, c) + static_cast<double>(n) * std::log(p.rho) + log_q_part;
}

double z_point(const ParticleConfig& cfg, Step t, Index n, const ModelParams& p, const DerivedConstants& c) {
    if (n < cfg.first()) return 0.0;
    if (n > cfg.last()) throw std::out_of_range("Z requested above the last tracked particle: " + std::to_string(n));
    return std::exp(log_z(cfg, t, n, p, c));
}

}  // namespace

double q_duality(const ParticleConfig& cfg, Index n, const ModelParams& p) {
    if (cfg.empty() || n < cfg.first()) return 0.0;
    if (n > cfg.last()) throw std::out_of_range("Q requested above the last tracked particle: " + std::to_string(n));
    const Position exponent = cfg.position(n) + n;
    if (p.q == 0.0) return exponent == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(exponent) * std::log(p.q));
}

double TransformField::at(Index n) const {
    if (n < first_particle) return 0.0;
    if (n < n_lo || n > n_hi()) throw std::out_of_range("Z field does not cover index " + std::to_string(n));
    return values[static_cast<std::size_t>(n - n_lo)];
}

Index TransformField::index_of(double xi) const {
    const double n = xi + mu_hat;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * std::max(1.0, std::abs(n))) {
        throw std::invalid_argument("xi is not a lattice site of Xi(t)");
    }
    return static_cast<Index>(rounded);
}

TransformField build_Z(const ParticleConfig& cfg, Step t, Index n_lo, Index n_hi, const ModelParams& p,
                       const DerivedConstants& c) {
    if (n_hi < n_lo) throw std::invalid_argument("build_Z: empty index window");
    if (cfg.empty() || n_hi > cfg.last()) throw std::out_of_range("build_Z: window beyond the tracked particles");
    TransformField z;
    z.t = t;
    z.mu_hat = mu_hat(t, c);
    z.log_lambda_hat = log_lambda_hat(t, c);
    z.first_particle = cfg.first();
    z.n_lo = n_lo;
    z.values.resize(static_cast<std::size_t>(n_hi - n_lo + 1));
    const double log_rho = std::log(p.rho);
    const double log_q = p.q > 0.0 ? std::log(p.q) : 0.0;
    for (Index n = n_lo; n <= n_hi; ++n) {
        double v = 0.0;
        if (n >= cfg.first()) {
            const Position exponent = cfg.position(n) + n;
            if (p.q > 0.0) {
                v = std::exp(z.log_lambda_hat + static_cast<double>(n) * log_rho + static_cast<double>(exponent) * log_q);
            } else if (exponent == 0) {
                v = std::exp(z.log_lambda_hat + static_cast<double>(n) * log_rho);
            }
        }
        z.values[static_cast<std::size_t>(n - n_lo)] = v;
    }
    return z;
}

TransformField build_Z(const ParticleConfig& cfg, Step t, const ModelParams& p, const DerivedConstants& c) {
    return build_Z(cfg, t, cfg.first(), cfg.last(), p, c);
}

std::vector<double> apply_kernel(const KernelTable& k, const TransformField& z, Index lo, Index hi) {
    std::vector<double> out;
    if (hi < lo) return out;
    if (k.weights.empty()) return std::vector<double>(static_cast<std::size_t>(hi - lo + 1), 0.0);
    const Index need_hi = hi - k.min_index();
    const Index need_lo = lo - k.max_index();
    if (need_hi > z.n_hi() || (need_lo < z.n_lo && z.n_lo > z.first_particle)) {
        throw std::out_of_range("apply_kernel: field window too narrow for the kernel support");
    }
    out.resize(static_cast<std::size_t>(hi - lo + 1));
    for (Index n = lo; n <= hi; ++n) {
        // Only n - j >= max(n_lo, m) contributes.
        const Index floor_idx = std::max(z.n_lo, z.first_particle);
        const Index j_max = std::min(k.max_index(), n - floor_idx);
        long double acc = 0;
        for (Index j = k.min_index(); j <= j_max; ++j) {
            acc += static_cast<long double>(k.weights[static_cast<std::size_t>(j - k.shift)]) *
                   z.values[static_cast<std::size_t>(n - j - z.n_lo)];
        }
        out[static_cast<std::size_t>(n - lo)] = static_cast<double>(acc);
    }
    return out;
}

double noise_increment(const ParticleConfig& cfg, Step s, Index n, const StepRecord& rec, const ModelParams& p,
                       const DerivedConstants& c) {
    const double expected = conditional_move_prob(cfg, s, n, p);
    const double moved = rec.moved_at(n) ? 1.0 : 0.0;
    return c.lambda[p.phase(s)] * (p.q - 1.0) * (moved - expected);
}

std::vector<double> noise_field(const ParticleConfig& cfg, Step s, const StepRecord& rec, const ModelParams& p,
                                const DerivedConstants& c) {
    std::vector<double> w = conditional_move_probs(cfg, s, p);
    const double scale = c.lambda[p.phase(s)] * (p.q - 1.0);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = scale * ((rec.moved[i] ? 1.0 : 0.0) - w[i]);
    return w;
}

double interpolate_index(const ParticleConfig& cfg, Step t, double x, const ModelParams& p,
                         const DerivedConstants& c) {
    const double lower = std::floor(x);
    const double frac = x - lower;
    const Index n0 = static_cast<Index>(lower);
    const double z0 = z_point(cfg, t, n0, p, c);
    if (frac == 0.0) return z0;
    return (1.0 - frac) * z0 + frac * z_point(cfg, t, n0 + 1, p, c);
}

double lattice_height(const ParticleConfig& cfg, Step t, Index n, const ModelParams& p, const DerivedConstants& c) {
    if (!cfg.contains(n)) throw std::out_of_range("lattice_height: index not tracked");
    const double eps = p.eps_effective();
    const double mu = mu_hat(t, c);
    const double r = eps * (static_cast<double>(n) - mu) / c.r_star;
    return -eps * static_cast<double>(cfg.position(n)) + (std::log(p.rho) / eps - 1.0) * c.r_star * r +
           log_lambda_hat(t, c) + (std::log(p.rho) - eps) * mu;
}

double micro_time(double tau, const ModelParams& p, const DerivedConstants& c) {
    const double eps = p.eps_effective();
    return tau * c.tau_star * static_cast<double>(p.J) / (eps * eps * eps);
}

double micro_space(double r, const ModelParams& p, const DerivedConstants& c) {
    return r * c.r_star / p.eps_effective();
}

ScaledField scale_field(const Trajectory& traj, const ModelParams& p, const std::vector<double>& taus,
                        const std::vector<double>& rs) {
    const DerivedConstants c = derive_constants(p);
    ScaledField f;
    f.epsilon = p.eps_effective();
    f.taus = taus;
    f.rs = rs;
    f.Z.reserve(taus.size() * rs.size());
    for (double tau : taus) {
        const double t_real = micro_time(tau, p, c) + static_cast<double>(traj.start());
        const double t_floor = std::floor(t_real);
        const double dt = t_real - t_floor;
        const Step t0 = static_cast<Step>(t_floor);
        if (t0 < traj.start() || t0 > traj.end() || (dt > 0.0 && t0 + 1 > traj.end())) {
            throw std::out_of_range("scale_field: tau outside the simulated time range");
        }
        for (double r : rs) {
            const double xi = micro_space(r, p, c);
            auto at_time = [&](Step t) {
                return interpolate_index(traj.y(t), t, xi + mu_hat(t, c), p, c);
            };
            const double z0 = at_time(t0);
            const double z = dt > 0.0 ? (1.0 - dt) * z0 + dt * at_time(t0 + 1) : z0;
            f.Z.push_back(z);
            f.H.push_back(std::log(z));
        }
    }
    return f;
}

ScaledField sample_scaled_field(ParticleConfig cfg, const BernoulliEnv& env, const ModelParams& p,
                                const std::vector<double>& taus, const std::vector<double>& rs) {
    if (!std::is_sorted(taus.begin(), taus.end())) throw std::invalid_argument("sample_scaled_field: unsorted taus");
    const DerivedConstants c = derive_constants(p);
    ScaledField f;
    f.epsilon = p.eps_effective();
    f.taus = taus;
    f.rs = rs;
    f.Z.reserve(taus.size() * rs.size());

    Step now = 0;
    auto advance = [&](Step t) {
        cfg = run_steps(std::move(cfg), now, t - now, env, {});
        now = t;
    };
    for (double tau : taus) {
        if (tau < 0.0) throw std::out_of_range("sample_scaled_field: negative tau");
        const double t_real = micro_time(tau, p, c);
        const Step t0 = static_cast<Step>(std::floor(t_real));
        const double dt = t_real - static_cast<double>(t0);
        if (t0 < now) throw std::logic_error("sample_scaled_field: time went backwards");
        advance(t0);
        std::vector<double> z0;
        for (double r : rs) z0.push_back(interpolate_index(cfg, t0, micro_space(r, p, c) + mu_hat(t0, c), p, c));
        if (dt > 0.0) {
            // Look one step ahead without committing: the next tau may share t0.
            const ParticleConfig ahead = run_steps(cfg, t0, 1, env, {});
            for (std::size_t j = 0; j < rs.size(); ++j) {
                const double xi = micro_space(rs[j], p, c) + mu_hat(t0 + 1, c);
                z0[j] = (1.0 - dt) * z0[j] + dt * interpolate_index(ahead, t0 + 1, xi, p, c);
            }
        }
        for (double z : z0) {
            f.Z.push_back(z);
            f.H.push_back(std::log(z));
        }
    }
    return f;
}

double step_mass_prefactor(const ModelParams& p, const DerivedConstants& c) {
    return c.r_star * (1.0 - p.rho) / p.eps_effective();
}

double expected_step_field(double tau, double r, const ModelParams& p) {
    const DerivedConstants c = derive_constants(p);
    const double t_real = micro_time(tau, p, c);
    const Step t0 = static_cast<Step>(std::floor(t_real));
    const double dt = t_real - static_cast<double>(t0);
    const double xi = micro_space(r, p, c);

    auto at_time = [&](Step t) {
        const double x = xi + mu_hat(t, c);
        const Index n0 = static_cast<Index>(std::floor(x));
        const double frac = x - std::floor(x);
        if (n0 + 1 < 0) return 0.0;
        const TransformField z0 = build_Z(make_step_ic(std::max<Index>(n0 + 2, 1)), 0, p, c);
        const std::vector<double> v = apply_kernel(heat_kernel(t, 0, p), z0, n0, n0 + 1);
        return (1.0 - frac) * v[0] + frac * v[1];
    };
    double ez = at_time(t0);
    if (dt > 0.0) ez = (1.0 - dt) * ez + dt * at_time(t0 + 1);
    return step_mass_prefactor(p, c) * ez;
}

ParticleConfig make_step_ic(Index count) {
    if (count < 1) throw std::invalid_argument("make_step_ic: need at least one particle");
    std::vector<Position> y(static_cast<std::size_t>(count));
    for (Index n = 0; n < count; ++n) y[static_cast<std::size_t>(n)] = -n;
    return ParticleConfig(0, std::move(y));
}

IndexRange near_equilibrium_range(double xi_lo, double xi_hi, Step t_end, const ModelParams& p,
                                  const DerivedConstants& c, double spread) {
    const double std_index = c.r_star * std::sqrt(sigma_sum(t_end, 0, c));
    // Decorrelation of the move chain across one site is at most (nu+alpha)/(1+alpha).
    const double chain = (p.nu + p.alpha) / (1.0 + p.alpha);
    const double coalescence = std::ceil(std::log(1e-12) / std::log(chain));
    IndexRange range;
    range.lo = static_cast<Index>(std::floor(xi_lo - spread * std_index - coalescence));
    range.hi = static_cast<Index>(std::ceil(xi_hi + mu_hat(t_end, c))) + 1;
    return range;
}

GapLaw::GapLaw(double q, double nu, double z) : z_(z) {
    if (!(z > 0.0 && z < 1.0) || !(q >= 0.0 && q < 1.0) || !(nu >= 0.0 && nu < 1.0)) {
        throw std::invalid_argument("gap law needs 0 < z < 1 and q, nu in [0, 1)");
    }
    // Unnormalised weights w_{k+1} = w_k z (1 - nu q^k) / (1 - q^{k+1}).
    std::vector<double> w{1.0};
    double total = 1.0;
    double qk = 1.0;
    while (true) {
        const double next = w.back() * z * (1.0 - nu * qk) / (1.0 - qk * q);
        qk *= q;
        w.push_back(next);
        total += next;
        // Ratio of successive weights is at most z / (1 - q^{k+1}) and tends to z.
        const double ratio_bound = z / (1.0 - qk * q);
        if (ratio_bound < 1.0 && next * ratio_bound / (1.0 - ratio_bound) < 1e-17 * total) break;
        if (w.size() > 100000000) throw std::runtime_error("gap law table does not converge");
    }
    pmf_.resize(w.size());
    cdf_.resize(w.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        pmf_[k] = w[k] / total;
        acc += pmf_[k];
        cdf_[k] = acc;
    }
}

double GapLaw::mean() const {
    long double m = 0;
    for (std::size_t k = 0; k < pmf_.size(); ++k) m += static_cast<long double>(k) * pmf_[k];
    return static_cast<double>(m);
}

double GapLaw::variance() const {
    const long double m = mean();
    long double v = 0;
    for (std::size_t k = 0; k < pmf_.size(); ++k) v += (static_cast<long double>(k) - m) * (k - m) * pmf_[k];
    return static_cast<double>(v);
}

Gap GapLaw::sample(double u) const {
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return static_cast<Gap>(cdf_.size()) - 1;
    return static_cast<Gap>(it - cdf_.begin());
}

GapLaw near_equilibrium_gap_law(const ModelParams& p, const DerivedConstants& c) {
    return GapLaw(p.q, p.nu, p.q * c.gamma);
}

ParticleConfig make_near_equilibrium_ic(const NearEquilibriumSpec& spec, const ModelParams& p, std::uint64_t key) {
    if (spec.n_hi <= spec.n_lo) throw std::invalid_argument("near-equilibrium window must hold two particles");
    const DerivedConstants c = derive_constants(p);
    const GapLaw law = near_equilibrium_gap_law(p, c);
    const Philox4x32 gen(derive_key(key, kInitialDataTag));

    // Gap of particle n (distance to particle n-1); one counter per index.
    auto gap = [&](Index n) -> Gap {
        const auto b = gen.block(static_cast<std::uint64_t>(n), 0);
        return law.sample(to_unit(b[0], b[1]));
    };

    // Anchor y_0 = 0.
    Position y_lo = 0;
    if (spec.n_lo < 0) {
        for (Index n = spec.n_lo + 1; n <= 0; ++n) y_lo += gap(n) + 1;
    } else {
        for (Index n = 1; n <= spec.n_lo; ++n) y_lo -= gap(n) + 1;
    }
    std::vector<Position> y;
    y.reserve(static_cast<std::size_t>(spec.n_hi - spec.n_lo + 1));
    y.push_back(y_lo);
    for (Index n = spec.n_lo + 1; n <= spec.n_hi; ++n) y.push_back(y.back() - gap(n) - 1);
    return ParticleConfig(spec.n_lo, std::move(y));
}

std::vector<HeightSample> height_reading(const ParticleConfig& cfg, Step t_y, const ModelParams& p) {
    if (t_y % p.J != 0) throw std::invalid_argument("height_reading: time must be a multiple of J");
    const DerivedConstants c = derive_constants(p);
    const double eps = p.eps_effective();
    const double mu = mu_hat(t_y, c);
    std::vector<HeightSample> out;
    out.reserve(cfg.size());
    for (Index n = cfg.first(); n <= cfg.last(); ++n) {
        out.push_back({eps * (static_cast<double>(n) - mu) / c.r_star, lattice_height(cfg, t_y, n, p, c)});
    }
    return out;
}

double step_height_offset(const ModelParams& p, const DerivedConstants& c) {
    return std::log(step_mass_prefactor(p, c));
}

void write_field_csv(std::ostream& os, const TransformField& z, bool header) {
    if (header) os << "t,xi,Z\n";
    os << std::setprecision(17);
    for (Index n = z.n_lo; n <= z.n_hi(); ++n) os << z.t << ',' << z.xi(n) << ',' << z.at(n) << '\n';
}

void write_scaled_csv(std::ostream& os, const ScaledField& f) {
    os << "tau,r,Z_eps,H_eps\n" << std::setprecision(17);
    for (std::size_t i = 0; i < f.taus.size(); ++i) {
        for (std::size_t j = 0; j < f.rs.size(); ++j) {
            os << f.taus[i] << ',' << f.rs[j] << ',' << f.z(i, j) << ',' << f.h(i, j) << '\n';
        }
    }
}

}  // namespace hsep

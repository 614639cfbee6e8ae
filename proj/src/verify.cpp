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

#include "hsep/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsep {

namespace {

double chain_step(double prev_moved, const JumpProbs& pr) {
    return prev_moved * pr.b_prime + (1.0 - prev_moved) * pr.b;
}

TransformField product_field(const TransformField& z, const std::vector<double>& w, Index first) {
    TransformField m = z;
    for (Index n = z.n_lo; n <= z.n_hi(); ++n) {
        m.values[static_cast<std::size_t>(n - z.n_lo)] *= w[static_cast<std::size_t>(n - first)];
    }
    return m;
}

}  // namespace

DecompositionReport check_decomposition(const Trajectory& traj, const ModelParams& p, Step t1, Step t2, Index lo,
                                        Index hi, double tolerance) {
    if (t1 < traj.start() || t2 > traj.end() || t2 < t1) {
        throw std::invalid_argument("check_decomposition: times outside the trajectory");
    }
    const ParticleConfig& final_cfg = traj.y(t2);
    if (lo < final_cfg.first()) throw std::invalid_argument("check_decomposition: window left of the leftmost particle");
    if (hi > final_cfg.last() || hi < lo) throw std::invalid_argument("check_decomposition: window beyond tracked particles");

    const DerivedConstants c = derive_constants(p);
    DecompositionReport rep;
    rep.t1 = t1;
    rep.t2 = t2;
    rep.lo = lo;
    rep.hi = hi;
    rep.tolerance = tolerance;

    const IndexRange safe = near_equilibrium_range(0.0, 0.0, t2 - t1, p, c);
    rep.in_trust_region = lo - final_cfg.first() >= -safe.lo;

    const TransformField z1 = build_Z(traj.y(t1), t1, p, c);
    const KernelTable heat = heat_kernel(t2, t1, p);
    rep.drift_term = apply_kernel(heat, z1, lo, hi);
    rep.tail_bound_used = heat.tail_mass_bound;

    rep.martingale_term.assign(rep.drift_term.size(), 0.0);
    BackwardHeatKernels backward(t2, p);
    for (Step s = t1; s < t2; ++s) {
        const ParticleConfig& cfg = traj.y(s);
        const TransformField zs = build_Z(cfg, s, p, c);
        const std::vector<double> w = noise_field(cfg, s, traj.record(s), p, c);
        const TransformField m = product_field(zs, w, cfg.first());
        const KernelTable& k = backward.from(s + 1);
        rep.tail_bound_used += k.tail_mass_bound;
        const std::vector<double> part = apply_kernel(k, m, lo, hi);
        for (std::size_t i = 0; i < part.size(); ++i) rep.martingale_term[i] += part[i];
    }

    const TransformField z2 = build_Z(final_cfg, t2, lo, hi, p, c);
    rep.z = z2.values;
    for (std::size_t i = 0; i < rep.z.size(); ++i) {
        const double res = std::abs(rep.z[i] - rep.drift_term[i] - rep.martingale_term[i]);
        rep.max_abs_residual = std::max(rep.max_abs_residual, res);
        const double rel = rep.z[i] > 0.0 ? res / rep.z[i] : res;
        rep.max_residual = std::max(rep.max_residual, rel);
    }
    return rep;
}

DualityReport check_duality_evolution(const ParticleConfig& cfg, Step s, const ModelParams& p) {
    DualityReport rep;
    rep.s = s;
    if (cfg.empty()) return rep;
    const KernelTable base = base_kernel(s, p);
    for (Index n = cfg.first(); n <= cfg.last(); ++n) {
        const double qn = q_duality(cfg, n, p);
        const double lhs = qn * (1.0 - (1.0 - p.q) * conditional_move_prob(cfg, s, n, p));
        long double rhs = 0;
        const Index k_max = std::min(base.max_index(), n - cfg.first());
        for (Index k = 0; k <= k_max; ++k) rhs += static_cast<long double>(base.at(k)) * q_duality(cfg, n - k, p);
        const double diff = std::abs(lhs - static_cast<double>(rhs));
        const double scaled = qn > 0.0 ? diff / qn : diff;
        ++rep.sites;
        if (scaled > rep.max_discrepancy) {
            rep.max_discrepancy = scaled;
            rep.worst_index = n;
        }
    }
    return rep;
}

double move_pair_covariance(const ParticleConfig& cfg, Step s, Index n1, Index n2, const ModelParams& p) {
    if (n2 < n1) std::swap(n1, n2);
    if (cfg.empty() || n1 < cfg.first()) return 0.0;
    if (n2 > cfg.last()) throw std::out_of_range("move_pair_covariance: index beyond tracked particles");

    // P(K_n = 1) along the chain, starting from the free leftmost particle.
    double moved = jump_probs(s, kInfiniteGap, p).b;
    for (Index n = cfg.first() + 1; n <= n1; ++n) moved = chain_step(moved, jump_probs(s, cfg.gap(n), p));
    const double e1 = moved;
    double given_first = 1.0;
    for (Index n = n1 + 1; n <= n2; ++n) {
        const JumpProbs pr = jump_probs(s, cfg.gap(n), p);
        moved = chain_step(moved, pr);
        given_first = chain_step(given_first, pr);
    }
    return e1 * given_first - e1 * moved;
}

LambdaPair qv_factors(const TransformField& z, const KernelTable& tilted, Index n, double lambda, double q) {
    const double zn = z.at(n);
    if (n < z.first_particle) return {0.0, 0.0};
    const double conv = apply_kernel(tilted, z, n, n).front();
    return {q * lambda * zn - conv, -lambda * zn + conv};
}

CovarianceReport check_conditional_covariance(const ParticleConfig& cfg, Step s, Index n1, Index n2,
                                              const ModelParams& p) {
    const DerivedConstants c = derive_constants(p);
    CovarianceReport rep;
    rep.n1 = n1;
    rep.n2 = n2;
    const TransformField z = build_Z(cfg, s, p, c);
    const double lambda = c.lambda[p.phase(s)];
    const double z1 = z.at(n1);
    const double z2 = z.at(n2);
    rep.scale = z1 * z2;
    const double noise_scale = lambda * (1.0 - p.q);
    rep.lhs = rep.scale * noise_scale * noise_scale * move_pair_covariance(cfg, s, n1, n2, p);

    const double a = p.alpha_at(s);
    const double ratio = (p.nu + a) * p.rho / (1.0 + a);
    const Index lower = std::min(n1, n2);
    const LambdaPair f = qv_factors(z, tilted_kernel(s, p), lower, lambda, p.q);
    rep.lambda1 = f.lambda1;
    rep.lambda2 = f.lambda2;
    rep.rhs = std::pow(ratio, static_cast<double>(std::abs(n1 - n2))) * f.lambda1 * f.lambda2;
    const double diff = std::abs(rep.lhs - rep.rhs);
    rep.discrepancy = rep.scale > 0.0 ? diff / rep.scale : diff;
    return rep;
}

QvApproxReport check_qv_approx(const ParticleConfig& cfg, Step s, Index n1, Index n2, const ModelParams& p) {
    if (!p.epsilon) throw std::invalid_argument("check_qv_approx requires scaling mode (q = exp(-eps))");
    const DerivedConstants c = derive_constants(p);
    const double eps = *p.epsilon;
    const TransformField z = build_Z(cfg, s, p, c);
    const Index lower = std::min(n1, n2);
    const double lambda = c.lambda[p.phase(s)];
    const LambdaPair f = qv_factors(z, tilted_kernel(s, p), lower, lambda, p.q);
    const double a = p.alpha_at(s);
    const double decay = std::pow((p.nu + a) * p.rho / (1.0 + a), static_cast<double>(std::abs(n1 - n2)));
    const double ag = p.alpha * c.gamma;
    const double zmin = z.at(lower);

    QvApproxReport rep;
    rep.prefactor_limit = ag / ((1.0 + ag) * (1.0 + ag));
    rep.exact = decay * f.lambda1 * f.lambda2;
    rep.approx = eps * eps * rep.prefactor_limit * decay * zmin * zmin;
    rep.relative_error = std::abs(rep.exact - rep.approx) / rep.approx;
    rep.prefactor = rep.exact / (eps * eps * decay * zmin * zmin);
    rep.lambda1_ratio = f.lambda1 / (eps * zmin);
    rep.lambda2_ratio = f.lambda2 / (eps * zmin);
    return rep;
}

// ---------------------------------------------------------------------------

double TestFunction::operator()(double x) const {
    const double u = (x - center) / width;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::pow(1.0 - u * u, power);
}

double TestFunction::second_derivative(double x) const {
    const double u = (x - center) / width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double base = 1.0 - u * u;
    const double k = power;
    const double w2 = width * width;
    return k * (k - 1.0) * std::pow(base, power - 2) * 4.0 * u * u / w2 - k * std::pow(base, power - 1) * 2.0 / w2;
}

MartingaleRecorder::MartingaleRecorder(const ModelParams& p, TestFunction psi, std::vector<Step> checkpoints)
    : params_(p), constants_(derive_constants(p)), psi_(psi) {
    for (int j = 0; j < p.J; ++j) tilted_.push_back(tilted_kernel(j, p));
    eps_ = p.eps_effective();
    dtau_ = eps_ * eps_ * eps_ / (constants_.tau_star * p.J);
    std::sort(checkpoints.begin(), checkpoints.end());
    path_.checkpoints = std::move(checkpoints);
}

double MartingaleRecorder::pairing(const ParticleConfig& cfg, Step t) const {
    const double scale = eps_ / constants_.r_star;
    const double mu = mu_hat(t, constants_);
    const Index lo = std::max(cfg.first(), static_cast<Index>(std::floor(psi_.support_lo() / scale + mu)));
    const Index hi = static_cast<Index>(std::ceil(psi_.support_hi() / scale + mu));
    if (hi > cfg.last()) throw std::out_of_range("test function support overflows the tracked particles");
    if (lo > hi) return 0.0;
    const TransformField z = build_Z(cfg, t, lo, hi, params_, constants_);
    double total = 0.0;
    for (Index n = lo; n <= hi; ++n) total += z.at(n) * psi_(scale * (static_cast<double>(n) - mu));
    return scale * total;
}

void MartingaleRecorder::checkpoint(Step t, const ParticleConfig& cfg) {
    while (next_ < path_.checkpoints.size() && path_.checkpoints[next_] == t) {
        const double pr = pairing(cfg, t);
        path_.pairing.push_back(pr);
        path_.n_sum.push_back(n_sum_);
        path_.n_direct.push_back(pr - initial_pairing_ - drift_);
        path_.compensator.push_back(compensator_);
        path_.n_hat.push_back(n_sum_ * n_sum_ - compensator_);
        path_.continuum_qv.push_back(continuum_qv_);
        path_.continuum_drift.push_back(continuum_drift_);
        path_.drift.push_back(drift_);
        path_.max_identity_gap =
            std::max(path_.max_identity_gap, std::abs(n_sum_ - path_.n_direct.back()) / (1.0 + std::abs(pr)));
        ++next_;
    }
}

void MartingaleRecorder::observe(Step s, const ParticleConfig& cfg, const StepRecord& rec) {
    if (!started_) {
        initial_pairing_ = pairing(cfg, s);
        started_ = true;
        if (next_ < path_.checkpoints.size() && path_.checkpoints[next_] < s) {
            throw std::invalid_argument("martingale checkpoint precedes the first observed step");
        }
    }
    checkpoint(s, cfg);

    const DerivedConstants& c = constants_;
    const double scale = eps_ / c.r_star;
    const double mu_now = mu_hat(s, c);
    const double mu_next = mu_hat(s + 1, c);
    const KernelTable& kernel = tilted_[params_.phase(s)];
    const double lambda = c.lambda[params_.phase(s)];
    const double a = params_.alpha_at(s);
    const double decay = (params_.nu + a) * params_.rho / (1.0 + a);

    auto x_now = [&](Index n) { return scale * (static_cast<double>(n) - mu_now); };
    auto x_next = [&](Index n) { return scale * (static_cast<double>(n) - mu_next); };

    // Index support of psi at times s and s+1.
    const Index sup_lo = static_cast<Index>(std::floor(psi_.support_lo() / scale + std::min(mu_now, mu_next)));
    const Index sup_hi = static_cast<Index>(std::ceil(psi_.support_hi() / scale + std::max(mu_now, mu_next)));
    if (sup_hi > cfg.last()) throw std::out_of_range("test function support overflows the tracked particles");
    const Index lo = std::max(cfg.first(), sup_lo - kernel.max_index());
    if (lo > sup_hi) return;  // support entirely left of the particles: Z vanishes there

    const TransformField z = build_Z(cfg, s, cfg.first(), sup_hi, params_, c);
    const std::vector<double> w = noise_field(cfg, s, rec, params_, c);
    const std::vector<double> smoothed = apply_kernel(kernel, z, lo, sup_hi);

    double m_psi = 0.0, gen = 0.0, qv_cont = 0.0, drift_cont = 0.0;
    double qv_diag = 0.0, qv_cross = 0.0, running = 0.0;
    for (Index n = lo; n <= sup_hi; ++n) {
        const double zn = z.at(n);
        const double psi_next = psi_(x_next(n));
        const double psi_now = psi_(x_now(n));
        m_psi += zn * w[static_cast<std::size_t>(n - cfg.first())] * psi_next;

        double psi_p = 0.0;
        const Index k_max = std::min(kernel.max_index(), sup_hi - n);
        for (Index k = kernel.min_index(); k <= k_max; ++k) psi_p += kernel.at(k) * psi_(x_next(n + k));
        gen += zn * (psi_p - psi_now);

        qv_cont += zn * zn * psi_now * psi_now;
        drift_cont += 0.5 * zn * psi_.second_derivative(x_now(n));

        // Pair sum over sites n1 <= n2 of psi psi decay^{n2-n1} Lambda1 Lambda2 (n1).
        const double conv = smoothed[static_cast<std::size_t>(n - lo)];
        const double v = (params_.q * lambda * zn - conv) * (-lambda * zn + conv);
        running *= decay;
        qv_cross += psi_next * running;
        qv_diag += psi_next * psi_next * v;
        running += psi_next * v;
    }
    n_sum_ += scale * m_psi;
    drift_ += scale * gen;
    compensator_ += scale * scale * (qv_diag + 2.0 * qv_cross);
    continuum_qv_ += dtau_ * scale * qv_cont;
    continuum_drift_ += dtau_ * scale * drift_cont;
}

void MartingaleRecorder::finish(Step t, const ParticleConfig& cfg) {
    if (!started_) {
        initial_pairing_ = pairing(cfg, t);
        started_ = true;
    }
    checkpoint(t, cfg);
    if (next_ != path_.checkpoints.size()) throw std::out_of_range("martingale checkpoint beyond the run");
}

std::vector<Step> tau_checkpoints(const std::vector<double>& taus, const ModelParams& p) {
    const DerivedConstants c = derive_constants(p);
    std::vector<Step> out;
    for (double tau : taus) out.push_back(static_cast<Step>(std::floor(micro_time(tau, p, c) + 1e-9)));
    return out;
}

MartingalePath martingale_problem_stats(const Trajectory& traj, const ModelParams& p, const TestFunction& psi,
                                        const std::vector<double>& taus) {
    std::vector<Step> checkpoints = tau_checkpoints(taus, p);
    for (Step& t : checkpoints) t += traj.start();
    MartingaleRecorder recorder(p, psi, checkpoints);
    for (Step s = traj.start(); s < traj.end(); ++s) recorder.observe(s, traj.y(s), traj.record(s));
    recorder.finish(traj.end(), traj.y(traj.end()));
    return recorder.path();
}

// ---------------------------------------------------------------------------

ExponentFit fit_exponent(const std::vector<double>& lags, const std::vector<StatsAccumulator>& second_moments) {
    if (lags.size() != second_moments.size() || lags.size() < 2) {
        throw std::invalid_argument("fit_exponent needs >= 2 lags with matching moments");
    }
    ExponentFit fit;
    fit.lags = lags;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const double norm = std::sqrt(second_moments[i].mean());
        fit.norms.push_back(norm);
        lx.push_back(std::log(lags[i]));
        ly.push_back(std::log(norm));
    }
    const LinearFit lf = linear_fit(lx, ly);
    fit.exponent = lf.slope;
    fit.r2 = lf.r2;
    return fit;
}

MomentProbeReport moment_probe(const ExponentFit& spatial, const ExponentFit& temporal, const ExponentFit& step) {
    MomentProbeReport rep;
    rep.spatial = spatial;
    rep.temporal = temporal;
    rep.step_one_point = step;
    rep.spatial_ok = spatial.exponent >= 0.35 && spatial.exponent <= 0.5;
    rep.temporal_ok = temporal.exponent >= 0.15 && temporal.exponent <= 0.25;
    rep.step_ok = step.exponent >= -0.6 && step.exponent <= -0.4;
    return rep;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const DecompositionReport& r) {
    return {{"t1", r.t1},
            {"t2", r.t2},
            {"window", {r.lo, r.hi}},
            {"max_residual", r.max_residual},
            {"max_abs_residual", r.max_abs_residual},
            {"tail_bound_used", r.tail_bound_used},
            {"tolerance", r.tolerance},
            {"in_trust_region", r.in_trust_region},
            {"pass", r.pass()}};
}

nlohmann::json to_json(const DualityReport& r) {
    return {{"s", r.s}, {"sites", r.sites}, {"max_discrepancy", r.max_discrepancy}, {"worst_index", r.worst_index},
            {"pass", r.pass()}};
}

nlohmann::json to_json(const CovarianceReport& r) {
    return {{"n1", r.n1}, {"n2", r.n2}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"scale", r.scale},
            {"discrepancy", r.discrepancy}, {"pass", r.pass()}};
}

nlohmann::json to_json(const QvApproxReport& r) {
    return {{"exact", r.exact},
            {"approx", r.approx},
            {"relative_error", r.relative_error},
            {"prefactor", r.prefactor},
            {"prefactor_limit", r.prefactor_limit},
            {"lambda1_ratio", r.lambda1_ratio},
            {"lambda2_ratio", r.lambda2_ratio}};
}

nlohmann::json to_json(const ExponentFit& r) {
    return {{"lags", r.lags}, {"norms", r.norms}, {"exponent", r.exponent}, {"r2", r.r2}};
}

nlohmann::json to_json(const MomentProbeReport& r) {
    return {{"spatial", to_json(r.spatial)},   {"temporal", to_json(r.temporal)},
            {"step", to_json(r.step_one_point)}, {"spatial_ok", r.spatial_ok},
            {"temporal_ok", r.temporal_ok},    {"step_ok", r.step_ok}};
}

nlohmann::json to_json(const KernelScalingReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"eps", row.eps},
                        {"lags", row.lags},
                        {"sup_norm", row.sup_norm},
                        {"scaled_sup", row.scaled_sup},
                        {"variance", row.variance},
                        {"variance_expected", row.variance_expected},
                        {"time_exponent", row.time_exponent},
                        {"moment_lags", row.moment_lags},
                        {"exp_moment", row.exp_moment},
                        {"exp_moment_max", row.exp_moment_max}});
    }
    return {{"T", r.T},
            {"u", r.u},
            {"rows", rows},
            {"exponents_in_bracket", r.exponents_in_bracket},
            {"moments_bounded", r.moments_bounded},
            {"variance_matches", r.variance_matches},
            {"pass", r.pass()}};
}

}  // namespace hsep

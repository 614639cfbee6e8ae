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

#include <json.hpp>
#include <vector>

#include "hsep/dynamics.hpp"
#include "hsep/kernels.hpp"
#include "hsep/model.hpp"
#include "hsep/stats.hpp"
#include "hsep/transform.hpp"

namespace hsep {

// ---------------------------------------------------------------------------
// Discrete SHE decomposition

struct DecompositionReport {
    Step t1 = 0;
    Step t2 = 0;
    Index lo = 0;  // index window at t2
    Index hi = 0;
    std::vector<double> z;               // Z(t2, n)
    std::vector<double> drift_term;      // [p(t2,t1) * Z(t1)](n)
    std::vector<double> martingale_term; // Duhamel sum of Z W
    double max_residual = 0;             // max |Z - drift - mg| / Z
    double max_abs_residual = 0;
    double tail_bound_used = 0;          // kernel mass dropped, summed over kernels
    double tolerance = 0;
    bool in_trust_region = true;  // window clear of the artificial left end
    bool pass() const { return max_residual <= tolerance; }
};

/// Rebuilds Z(t2) on the index window [lo, hi] from Z(t1) and the realised
/// noise of steps t1 .. t2-1, and reports the residual against the direct
/// transform of y(t2).
DecompositionReport check_decomposition(const Trajectory& traj, const ModelParams& p, Step t1, Step t2, Index lo,
                                        Index hi, double tolerance = 1e-9);

// ---------------------------------------------------------------------------
// Exact one-step identities

struct DualityReport {
    Step s = 0;
    std::size_t sites = 0;
    double max_discrepancy = 0;  // max over n of |lhs - rhs| / Q_n
    Index worst_index = 0;
    bool pass(double tol = 1e-12) const { return max_discrepancy <= tol; }
};

/// E[Q_n(s+1) | F(s)] from the conditional move probability against the
/// base-kernel convolution, over every tracked particle.
DualityReport check_duality_evolution(const ParticleConfig& cfg, Step s, const ModelParams& p);

/// Cov(K_{n1}(s), K_{n2}(s) | F(s)) from the two-state transfer matrices of
/// the move chain. Zero if either index is below the leftmost particle.
double move_pair_covariance(const ParticleConfig& cfg, Step s, Index n1, Index n2, const ModelParams& p);

struct CovarianceReport {
    Index n1 = 0;
    Index n2 = 0;
    double lhs = 0;  // Z1 Z2 E[W1 W2 | F]
    double rhs = 0;  // c^{|n1-n2|} Lambda1 Lambda2 at min(n1, n2)
    double scale = 0;  // Z1 Z2
    double discrepancy = 0;  // |lhs - rhs| / scale, or absolute if scale == 0
    double lambda1 = 0;
    double lambda2 = 0;
    bool pass(double tol = 1e-12) const { return discrepancy <= tol; }
};

/// Lambda1 = q lambda Z - [p * Z], Lambda2 = -lambda Z + [p * Z] at index n.
struct LambdaPair {
    double lambda1 = 0;
    double lambda2 = 0;
};
LambdaPair qv_factors(const TransformField& z, const KernelTable& tilted, Index n, double lambda, double q);

CovarianceReport check_conditional_covariance(const ParticleConfig& cfg, Step s, Index n1, Index n2,
                                              const ModelParams& p);

struct QvApproxReport {
    double exact = 0;            // eq. covariance value
    double approx = 0;           // eps^2 a(1-a) c^{|d|} Z(min)^2
    double relative_error = 0;   // |exact - approx| / approx
    double prefactor = 0;        // exact / (eps^2 c^{|d|} Z(min)^2)
    double prefactor_limit = 0;  // alpha gamma / (1 + alpha gamma)^2
    double lambda1_ratio = 0;    // Lambda1 / (eps Z), limit -(1+alpha gamma)^{-1}
    double lambda2_ratio = 0;    // Lambda2 / (eps Z), limit -alpha gamma (1+alpha gamma)^{-1}
};

/// Compares the exact conditional covariance with its weak-noise limit.
/// Requires scaling mode.
QvApproxReport check_qv_approx(const ParticleConfig& cfg, Step s, Index n1, Index n2, const ModelParams& p);

// ---------------------------------------------------------------------------
// Martingale problem

/// Bump psi(x) = (1 - ((x - center)/width)^2)^power on |x - center| < width.
struct TestFunction {
    double center = 0;
    double width = 1;
    int power = 4;

    double operator()(double x) const;
    double second_derivative(double x) const;
    double support_lo() const { return center - width; }
    double support_hi() const { return center + width; }
};

/// Discrete martingale paths at the requested checkpoints.
struct MartingalePath {
    std::vector<Step> checkpoints;
    std::vector<double> pairing;        // <Z(t), psi>_eps
    std::vector<double> n_sum;          // N(t) = sum_s M_psi(s)
    std::vector<double> n_direct;       // <Z(t),psi> - <Z(0),psi> - sum_s <Z(s), psi_gen>
    std::vector<double> compensator;    // sum_s E[M_psi(s)^2 | F(s)]
    std::vector<double> n_hat;          // N^2 - compensator
    std::vector<double> continuum_qv;   // eps^3/(tau* J) sum_s <Z(s)^2, psi^2>_eps
    std::vector<double> continuum_drift;// eps^3/(tau* J) sum_s <Z(s), psi''/2>_eps
    std::vector<double> drift;          // sum_s <Z(s), psi_gen>_eps
    double max_identity_gap = 0;        // max |n_sum - n_direct| / (1 + |pairing|)
};

/// Streams a run and accumulates the martingale statistics of one replica.
class MartingaleRecorder {
public:
    MartingaleRecorder(const ModelParams& p, TestFunction psi, std::vector<Step> checkpoints);

    /// Feed step s: cfg is y(s) and rec the move record of step s.
    void observe(Step s, const ParticleConfig& cfg, const StepRecord& rec);
    /// Feed the configuration reached after the last step.
    void finish(Step t, const ParticleConfig& cfg);

    const MartingalePath& path() const { return path_; }

private:
    double pairing(const ParticleConfig& cfg, Step t) const;
    void checkpoint(Step t, const ParticleConfig& cfg);

    ModelParams params_;
    DerivedConstants constants_;
    std::vector<KernelTable> tilted_;
    TestFunction psi_;
    double eps_ = 0;
    double dtau_ = 0;
    std::size_t next_ = 0;
    double initial_pairing_ = 0;
    double n_sum_ = 0;
    double drift_ = 0;
    double compensator_ = 0;
    double continuum_qv_ = 0;
    double continuum_drift_ = 0;
    bool started_ = false;
    MartingalePath path_;
};

/// Checkpoint steps t_eps(tau) for a tau grid, rounded down.
std::vector<Step> tau_checkpoints(const std::vector<double>& taus, const ModelParams& p);

MartingalePath martingale_problem_stats(const Trajectory& traj, const ModelParams& p, const TestFunction& psi,
                                        const std::vector<double>& taus);

// ---------------------------------------------------------------------------
// Moment and Holder probes

struct ExponentFit {
    std::vector<double> lags;
    std::vector<double> norms;  // (E |increment|^2)^{1/2} or (E X^2)^{1/2}
    double exponent = 0;
    double r2 = 0;
};

/// Slope of log norm against log lag.
ExponentFit fit_exponent(const std::vector<double>& lags, const std::vector<StatsAccumulator>& second_moments);

struct MomentProbeReport {
    ExponentFit spatial;
    ExponentFit temporal;
    ExponentFit step_one_point;
    bool spatial_ok = false;
    bool temporal_ok = false;
    bool step_ok = false;
};

/// Brackets the fitted exponents: spatial in [0.35, 0.5], temporal in
/// [0.15, 0.25], step one-point in [-0.6, -0.4].
MomentProbeReport moment_probe(const ExponentFit& spatial, const ExponentFit& temporal, const ExponentFit& step);

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const DecompositionReport& r);
nlohmann::json to_json(const DualityReport& r);
nlohmann::json to_json(const CovarianceReport& r);
nlohmann::json to_json(const QvApproxReport& r);
nlohmann::json to_json(const ExponentFit& r);
nlohmann::json to_json(const MomentProbeReport& r);
nlohmann::json to_json(const KernelScalingReport& r);

}  // namespace hsep

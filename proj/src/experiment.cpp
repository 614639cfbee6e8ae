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

#include "hsep/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hsep {
namespace {

struct Extent {
    Step t_end = 0;
    IndexRange range;
};

Extent extent_of(const ExperimentSpec& spec, const ModelParams& p) {
    const DerivedConstants c = derive_constants(p);
    Extent e;
    e.t_end = static_cast<Step>(std::ceil(micro_time(spec.taus.back(), p, c))) + 1;
    const auto [r_lo, r_hi] = std::minmax_element(spec.rs.begin(), spec.rs.end());
    const double xi_lo = micro_space(*r_lo, p, c);
    const double xi_hi = micro_space(*r_hi, p, c);
    if (spec.ic == InitialKind::Step) {
        e.range.lo = 0;
        e.range.hi = std::max<Index>(1, static_cast<Index>(std::ceil(xi_hi + mu_hat(e.t_end, c))) + 2);
    } else {
        e.range = near_equilibrium_range(xi_lo, xi_hi, e.t_end, p, c);
        e.range.hi += 2;
    }
    return e;
}

std::string eps_tag(double eps) {
    std::ostringstream os;
    os << eps;
    return os.str();
}

}  // namespace

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void EpsilonResult::merge(const EpsilonResult& other) {
    if (other.eps != eps || other.z.size() != z.size()) throw std::invalid_argument("merge: mismatched epsilon rows");
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i].merge(other.z[i]);
        log_z[i].merge(other.log_z[i]);
    }
    if (!first_field && other.first_field) first_field = other.first_field;
}

void ExperimentResult::merge(const ExperimentResult& other) {
    if (other.rows.size() != rows.size() || other.spec.taus != spec.taus || other.spec.rs != spec.rs) {
        throw std::invalid_argument("merge: experiments use different grids");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].merge(other.rows[i]);
    spec.replicas += other.spec.replicas;
    spec.first_replica = std::min(spec.first_replica, other.spec.first_replica);
}

ParticleConfig make_initial(const ExperimentSpec& spec, const ModelParams& p, std::uint64_t key) {
    const Extent e = extent_of(spec, p);
    if (spec.ic == InitialKind::Step) return make_step_ic(e.range.hi + 1);
    NearEquilibriumSpec ne;
    ne.n_lo = e.range.lo;
    ne.n_hi = e.range.hi;
    return make_near_equilibrium_ic(ne, p, key);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result;
    result.spec = spec;
    const std::size_t cells = spec.taus.size() * spec.rs.size();

    for (double eps : spec.eps) {
        const ModelParams p = spec.params(eps);
        const DerivedConstants c = derive_constants(p);
        const Extent e = extent_of(spec, p);
        const double prefactor = spec.ic == InitialKind::Step ? step_mass_prefactor(p, c) : 1.0;
        auto table = std::make_shared<const JumpTable>(p);

        auto fields = map_replicas(spec.first_replica, spec.replicas, spec.seed, spec.threads,
                                   [&](std::int64_t, std::uint64_t key) {
                                       const BernoulliEnv env(table, derive_key(key, 1));
                                       ScaledField f = sample_scaled_field(make_initial(spec, p, key), env, p,
                                                                           spec.taus, spec.rs);
                                       for (std::size_t i = 0; i < f.Z.size(); ++i) {
                                           f.Z[i] *= prefactor;
                                           f.H[i] = std::log(f.Z[i]);
                                       }
                                       return f;
                                   });

        EpsilonResult row;
        row.eps = eps;
        row.t_end = e.t_end;
        row.n_lo = e.range.lo;
        row.n_hi = e.range.hi;
        row.z.resize(cells);
        row.log_z.resize(cells);
        for (const ScaledField& f : fields) {
            for (std::size_t i = 0; i < cells; ++i) {
                row.z[i].add(f.Z[i]);
                if (f.Z[i] > 0.0) row.log_z[i].add(f.H[i]);
            }
        }
        if (spec.first_replica == 0 && !fields.empty()) row.first_field = fields.front();
        result.rows.push_back(std::move(row));
    }
    return result;
}

void write_bundle(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& spec = result.spec;
    nlohmann::json summary;
    summary["params"] = to_json(spec);
    summary["rows"] = nlohmann::json::array();

    for (const EpsilonResult& row : result.rows) {
        const std::string tag = eps_tag(row.eps);
        std::ofstream stats(dir / ("stats_eps" + tag + ".csv"));
        stats << "# " << to_json(spec).dump() << '\n';
        stats << "tau,r,count,mean_Z,var_Z,mean_logZ,var_logZ,skew_logZ,min_Z,max_Z\n" << std::setprecision(17);
        for (std::size_t i = 0; i < spec.taus.size(); ++i) {
            for (std::size_t j = 0; j < spec.rs.size(); ++j) {
                const StatsAccumulator& z = row.z[i * spec.rs.size() + j];
                const StatsAccumulator& lz = row.log_z[i * spec.rs.size() + j];
                stats << spec.taus[i] << ',' << spec.rs[j] << ',' << z.count() << ',' << z.mean() << ','
                      << z.variance() << ',' << lz.mean() << ',' << lz.variance() << ',' << lz.skewness() << ','
                      << z.min() << ',' << z.max() << '\n';
            }
        }
        if (row.first_field) {
            std::ofstream field(dir / ("field_eps" + tag + ".csv"));
            field << "# " << to_json(spec).dump() << '\n';
            write_scaled_csv(field, *row.first_field);
        }
        summary["rows"].push_back({{"eps", row.eps}, {"t_end", row.t_end}, {"n_lo", row.n_lo}, {"n_hi", row.n_hi}});
    }
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
}

}  // namespace hsep

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

#include "hsep/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "hsep/config.hpp"
#include "hsep/experiment.hpp"
#include "hsep/kernels.hpp"
#include "hsep/she.hpp"
#include "hsep/suites.hpp"
#include "hsep/verify.hpp"

namespace hsep {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<double> eps;
    std::optional<std::int64_t> replicas;
    std::string out;
    std::string suite;
    unsigned threads = 0;
};

void add_flags(CLI::App* cmd, Flags& f, bool need_config) {
    auto* cfg = cmd->add_option("--config", f.config, "key = value experiment file");
    if (need_config) cfg->required();
    cfg->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--eps", f.eps, "comma-separated epsilon list")->delimiter(',')->check(CLI::PositiveNumber);
    cmd->add_option("--replicas", f.replicas, "replica count")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "output directory or .json file");
    cmd->add_option("--suite", f.suite, "verification suite, or 'all'");
    cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
}

ExperimentSpec resolve_spec(const Flags& f) {
    Config cfg;
    if (!f.config.empty()) cfg = Config::load(f.config);
    ExperimentSpec spec = spec_from_config(cfg);
    if (f.seed) spec.seed = *f.seed;
    if (!f.eps.empty()) spec.eps = f.eps;
    if (f.replicas) spec.replicas = *f.replicas;
    if (!f.out.empty()) spec.out = f.out;
    if (!f.suite.empty()) spec.suite = f.suite;
    if (f.threads) spec.threads = f.threads;
    spec.validate();
    return spec;
}

void emit(const json& report, const std::string& out_path, const std::string& default_name, std::ostream& out) {
    out << report.dump(2) << '\n';
    if (out_path.empty()) return;
    fs::path path(out_path);
    if (path.extension() != ".json") {
        fs::create_directories(path);
        path /= default_name;
    } else if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream(path) << report.dump(2) << '\n';
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
    const ExperimentSpec spec = resolve_spec(f);
    const ExperimentResult result = run_experiment(spec);
    write_bundle(result, spec.out);
    err << "simulate: " << spec.eps.size() << " epsilon value(s) x " << spec.replicas << " replicas -> " << spec.out
        << '\n';
    out << json{{"out", spec.out}, {"params", to_json(spec)}}.dump(2) << '\n';
    return kExitPass;
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
    const ExperimentSpec spec = resolve_spec(f);
    SuiteOptions opts;
    opts.nu = spec.nu;
    opts.alpha = spec.alpha;
    opts.J = spec.J;
    opts.rho = spec.rho;
    if (!f.eps.empty()) opts.eps = f.eps;
    if (f.replicas) opts.replicas = *f.replicas;
    if (f.seed) opts.seed = *f.seed;
    opts.threads = spec.threads;

    std::vector<std::string> names;
    if (spec.suite.empty()) throw CLI::RequiredError("--suite");
    if (spec.suite == "all") {
        for (const auto& e : suite_registry()) names.emplace_back(e.name);
    } else {
        names.push_back(spec.suite);
    }
    json report{{"params", to_json(spec)}, {"suites", json::array()}};
    bool pass = true;
    for (const auto& name : names) {
        const SuiteResult r = run_suite(name, opts);
        err << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.summary << " [" << r.seconds << " s]\n";
        pass = pass && r.pass;
        json j = r.report;
        j["summary"] = r.summary;
        report["suites"].push_back(j);
    }
    report["pass"] = pass;
    emit(report, f.out, "verify_" + spec.suite + ".json", out);
    return pass ? kExitPass : kExitFail;
}

SHEInitial she_initial(const ExperimentSpec& spec) {
    if (spec.ic == InitialKind::Step) return DeltaInitial{};
    return std::function<double(double)>([](double) { return 1.0; });
}

std::vector<std::vector<double>> she_samples(const ExperimentSpec& spec, const SHEGridSpec& grid) {
    std::vector<double> taus = spec.taus;
    if (spec.ic == InitialKind::Step) {
        // The delta start has no value at tau = 0.
        std::erase_if(taus, [](double t) { return t <= 0.0; });
    }
    return map_replicas(spec.first_replica, spec.replicas, derive_key(spec.seed, 0x5E), spec.threads,
                        [&](std::int64_t, std::uint64_t key) {
                            const SHEGrid g = solve_she(she_initial(spec), taus, grid, key);
                            std::vector<double> v;
                            for (std::size_t i = 0; i < taus.size(); ++i) {
                                for (double r : spec.rs) v.push_back(g.at(i, r));
                            }
                            return v;
                        });
}

int cmd_she(const Flags& f, std::ostream& out, std::ostream& err) {
    const ExperimentSpec spec = resolve_spec(f);
    SHEGridSpec grid;
    const auto samples = she_samples(spec, grid);
    fs::create_directories(spec.out);

    std::vector<double> taus = spec.taus;
    if (spec.ic == InitialKind::Step) std::erase_if(taus, [](double t) { return t <= 0.0; });
    std::ofstream stats(fs::path(spec.out) / "she_stats.csv");
    stats << "# " << to_json(spec).dump() << '\n' << "tau,r,count,mean_Z,var_Z,mean_logZ,var_logZ,skew_logZ\n";
    stats.precision(17);
    json rows = json::array();
    for (std::size_t i = 0; i < taus.size(); ++i) {
        for (std::size_t j = 0; j < spec.rs.size(); ++j) {
            StatsAccumulator z, lz;
            for (const auto& s : samples) {
                const double v = s[i * spec.rs.size() + j];
                z.add(v);
                if (v > 0.0) lz.add(std::log(v));
            }
            stats << taus[i] << ',' << spec.rs[j] << ',' << z.count() << ',' << z.mean() << ',' << z.variance() << ','
                  << lz.mean() << ',' << lz.variance() << ',' << lz.skewness() << '\n';
            rows.push_back({{"tau", taus[i]}, {"r", spec.rs[j]}, {"mean_Z", z.mean()}, {"var_logZ", lz.variance()}});
        }
    }
    {
        std::ofstream path(fs::path(spec.out) / "she_path0.csv");
        write_she_csv(path, solve_she(she_initial(spec), taus, grid, replica_key(derive_key(spec.seed, 0x5E), 0)));
    }
    const json summary{{"params", to_json(spec)},
                       {"grid", {{"dx", grid.dx}, {"dt", grid.dt}, {"half_width", grid.half_width}}},
                       {"points", rows}};
    std::ofstream(fs::path(spec.out) / "she_summary.json") << summary.dump(2) << '\n';
    err << "she: " << spec.replicas << " paths -> " << spec.out << '\n';
    out << summary.dump(2) << '\n';
    return kExitPass;
}

int cmd_compare(const Flags& f, std::ostream& out, std::ostream& err) {
    const ExperimentSpec spec = resolve_spec(f);
    SHEGridSpec grid;
    std::vector<double> taus = spec.taus;
    std::erase_if(taus, [](double t) { return t <= 0.0; });
    if (taus.empty()) throw ConfigError("taus", "compare needs at least one tau > 0");
    ExperimentSpec particle_spec = spec;
    particle_spec.taus = taus;
    ExperimentSpec she_spec = particle_spec;
    const auto she = she_samples(she_spec, grid);

    json report{{"params", to_json(spec)}, {"points", json::array()}};
    bool pass = true;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        for (std::size_t j = 0; j < spec.rs.size(); ++j) {
            const std::size_t cell = i * spec.rs.size() + j;
            std::vector<double> ref;
            for (const auto& s : she) ref.push_back(std::log(s[cell]));
            std::vector<double> var_gaps, mean_gaps;
            json per_eps = json::array();
            for (double eps : spec.eps) {
                ExperimentSpec one = particle_spec;
                one.eps = {eps};
                const ModelParams p = one.params(eps);
                const DerivedConstants c = derive_constants(p);
                auto table = std::make_shared<const JumpTable>(p);
                const double pref = spec.ic == InitialKind::Step ? step_mass_prefactor(p, c) : 1.0;
                const auto logs = map_replicas(spec.first_replica, spec.replicas, spec.seed, spec.threads,
                                               [&](std::int64_t, std::uint64_t key) {
                                                   const BernoulliEnv env(table, derive_key(key, 1));
                                                   const ScaledField fld = sample_scaled_field(
                                                       make_initial(one, p, key), env, p, {taus[i]}, {spec.rs[j]});
                                                   return std::log(pref * fld.Z.front());
                                               });
                const OnePointComparison cmp = compare_one_point(logs, ref);
                var_gaps.push_back(cmp.variance_gap);
                mean_gaps.push_back(cmp.mean_gap);
                json e = to_json(cmp);
                e["eps"] = eps;
                per_eps.push_back(e);
            }
            const bool trend = monotone_decreasing(var_gaps) && monotone_decreasing(mean_gaps);
            pass = pass && trend;
            report["points"].push_back({{"tau", taus[i]}, {"r", spec.rs[j]}, {"rows", per_eps}, {"trend", trend}});
            err << "compare tau=" << taus[i] << " r=" << spec.rs[j] << ": trend " << (trend ? "monotone" : "NOT monotone")
                << '\n';
        }
    }
    report["pass"] = pass;
    emit(report, spec.out, "compare.json", out);
    return pass ? kExitPass : kExitFail;
}

int cmd_probe_kernels(const Flags& f, std::ostream& out, std::ostream& err) {
    const ExperimentSpec spec = resolve_spec(f);
    SuiteOptions opts;
    opts.nu = spec.nu;
    opts.alpha = spec.alpha;
    opts.J = spec.J;
    opts.rho = spec.rho;
    if (!f.eps.empty()) opts.eps = f.eps;
    const SuiteResult r = run_suite("kernels", opts);
    err << (r.pass ? "PASS " : "FAIL ") << "kernels: " << r.summary << '\n';
    emit(r.report, f.out, "kernels.json", out);
    return r.pass ? kExitPass : kExitFail;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Higher-spin exclusion process: simulation and verification"};
    app.require_subcommand(1);
    Flags flags;
    struct Command {
        const char* name;
        const char* help;
        bool need_config;
        int (*run)(const Flags&, std::ostream&, std::ostream&);
    };
    const Command commands[] = {
        {"simulate", "run replicas and write field statistics", true, cmd_simulate},
        {"verify", "run verification suites", false, cmd_verify},
        {"she", "solve the stochastic heat equation ensemble", true, cmd_she},
        {"compare", "compare one-point statistics with the SHE", true, cmd_compare},
        {"probe-kernels", "heat-kernel scaling probe", false, cmd_probe_kernels},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_flags(sub, flags, c.need_config);
        subs.emplace_back(sub, &c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    for (const auto& [sub, cmd] : subs) {
        if (!sub->parsed()) continue;
        try {
            return cmd->run(flags, out, err);
        } catch (const CLI::Error& e) {
            err << "error: " << e.what() << "\n\n" << sub->help();
            return kExitUsage;
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::invalid_argument& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        }
    }
    return kExitUsage;
}

}  // namespace hsep

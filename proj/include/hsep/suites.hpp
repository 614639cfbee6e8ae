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
#include <json.hpp>
#include <string>
#include <vector>

#include "hsep/dynamics.hpp"
#include "hsep/model.hpp"

namespace hsep {

/// Knobs shared by every verification suite. Empty or zero fields select the
/// suite's own default.
struct SuiteOptions {
    double nu = 0.5;
    double alpha = 1.0;
    int J = 1;
    double rho = 0.5;
    std::vector<double> eps;
    std::int64_t replicas = 0;
    std::uint64_t seed = 20260101;
    unsigned threads = 0;
};

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string summary;  // one line
    nlohmann::json report;
    double seconds = 0;
};

using SuiteFn = SuiteResult (*)(const SuiteOptions&);

struct SuiteEntry {
    const char* name;
    SuiteFn run;
    const char* description;
};

/// Every suite, in acceptance order.
const std::vector<SuiteEntry>& suite_registry();

/// Runs one suite by name and times it. Throws std::invalid_argument for an
/// unknown name.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opts);

/// A random small configuration with random parameters, for the exact
/// identity suites.
struct RandomCase {
    ModelParams params;
    ParticleConfig config;
    Step s = 0;
};
RandomCase random_case(std::uint64_t key, int max_particles);

SuiteResult suite_coupling(const SuiteOptions& opts);
SuiteResult suite_tilted(const SuiteOptions& opts);
SuiteResult suite_decomposition(const SuiteOptions& opts);
SuiteResult suite_covariance(const SuiteOptions& opts);
SuiteResult suite_duality(const SuiteOptions& opts);
SuiteResult suite_martingale(const SuiteOptions& opts);
SuiteResult suite_qv_approx(const SuiteOptions& opts);
SuiteResult suite_moments(const SuiteOptions& opts);
SuiteResult suite_convergence(const SuiteOptions& opts);
SuiteResult suite_kernels(const SuiteOptions& opts);

}  // namespace hsep

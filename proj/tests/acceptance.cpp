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

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "hsep/suites.hpp"

namespace {

struct Criterion {
    int id;
    const char* suite;
    const char* tolerance;
    double budget_seconds;
};

// Suite order follows the registry.
const Criterion kCriteria[] = {
    {1, "coupling", "sequential == parallel, 1e4 configs x 20 steps, bit-identical", 10},
    {2, "tilted", "|mass-1| <= 1e-12, |mean| <= 1e-10, |var - r*^2 sigma| <= 1e-10", 5},
    {3, "decomposition", "relative residual <= 1e-9", 60},
    {4, "covariance", "discrepancy <= 1e-12", 30},
    {5, "duality", "discrepancy <= 1e-12", 10},
    {6, "martingale", "increment means within 4 sigma", 600},
    {7, "qv_approx", "error decreasing in eps, prefactor within 10%", 600},
    {8, "moments", "spatial in [0.35,0.5], temporal in [0.15,0.25], step in [-0.6,-0.4]", 900},
    {9, "convergence", "monotone mean/variance gaps, final variance gap <= 15%", 1800},
    {10, "kernels", "sup-norm exponent in [-0.6,-0.4], bounded moments, exact variance", 300},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    std::vector<int> allow_fail;
    unsigned threads = 0;
    app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
    app.add_option("--allow-fail", allow_fail, "criteria whose failure does not fail the run")->delimiter(',');
    app.add_option("--threads", threads, "worker threads (0: all cores)");
    CLI11_PARSE(app, argc, argv);

    const std::set<int> selected(only.begin(), only.end());
    const std::set<int> tolerated(allow_fail.begin(), allow_fail.end());
    hsep::SuiteOptions opts;
    opts.threads = threads;

    int unexpected = 0;
    for (const Criterion& c : kCriteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        bool pass = false;
        std::string detail;
        double seconds = 0;
        try {
            const hsep::SuiteResult r = hsep::run_suite(c.suite, opts);
            seconds = r.seconds;
            pass = r.pass && r.seconds < c.budget_seconds;
            detail = r.summary;
            if (r.seconds >= c.budget_seconds) detail += "; over runtime budget";
        } catch (const std::exception& e) {
            detail = std::string("error: ") + e.what();
        }
        const bool excused = !pass && tolerated.count(c.id);
        if (!pass && !excused) ++unexpected;
        std::printf("criterion %2d %-13s %s%s | %s | %.1f s (budget %.0f s) | tol: %s\n", c.id, c.suite,
                    pass ? "PASS" : "FAIL", excused ? " (known)" : "", detail.c_str(), seconds, c.budget_seconds,
                    c.tolerance);
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}

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
#include <json.hpp>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsep/model.hpp"

namespace hsep {

inline constexpr const char* kVersion = "hsep 0.1.0";

/// Bad configuration value; `field` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Flat `key = value` file. '#' starts a comment; blank lines are ignored.
class Config {
public:
    static Config parse(std::istream& is);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    /// Comma-separated reals.
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

private:
    std::map<std::string, std::string> values_;
};

enum class InitialKind { Step, NearEquilibrium };

std::string to_string(InitialKind k);

struct ExperimentSpec {
    double nu = 0.5;
    double alpha = 1.0;
    int J = 1;
    double rho = 0.5;
    InitialKind ic = InitialKind::Step;
    std::vector<double> eps{0.4, 0.2, 0.1};
    std::int64_t replicas = 100;
    std::int64_t first_replica = 0;  // offset for split runs
    std::vector<double> taus{0.0, 0.25, 0.5};
    std::vector<double> rs{-1.0, -0.5, 0.0, 0.5, 1.0};
    std::string suite;
    std::uint64_t seed = 1;
    std::string out = "hsep_out";
    unsigned threads = 0;  // 0: hardware concurrency

    ModelParams params(double epsilon) const { return ModelParams::scaling(epsilon, nu, alpha, J, rho); }
    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Reads the known keys of `cfg` over the defaults; unknown keys are errors.
ExperimentSpec spec_from_config(const Config& cfg);

/// Resolved parameter echo written into every output header.
nlohmann::json to_json(const ExperimentSpec& spec);

}  // namespace hsep

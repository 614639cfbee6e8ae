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

#include "hsep/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hsep {
namespace {

std::string trim_ws(std::string s) {
    const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError(key, "cannot parse '" + text + "'");
    return value;
}

const std::set<std::string> kKnownKeys{"nu",    "alpha",  "J",    "rho",  "ic",          "eps",
                                       "replicas", "first_replica", "taus", "rs", "suite", "seed",
                                       "out",   "threads"};

}  // namespace

Config Config::parse(std::istream& is) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim_ws(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        std::string key = trim_ws(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
        cfg.values_[key] = trim_ws(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse(in);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<std::int64_t>(key, it->second);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim_ws(item)));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

std::string to_string(InitialKind k) { return k == InitialKind::Step ? "step" : "near_eq"; }

void ExperimentSpec::validate() const {
    if (!(nu >= 0.0 && nu < 1.0)) throw ConfigError("nu", "must lie in [0, 1)");
    if (!(alpha > 0.0)) throw ConfigError("alpha", "must be positive");
    if (J < 1) throw ConfigError("J", "must be at least 1");
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho", "must lie in (0, 1)");
    if (eps.empty()) throw ConfigError("eps", "need at least one value");
    for (double e : eps) {
        if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("eps", "values must be positive");
        try {
            params(e).validate();
        } catch (const std::invalid_argument& ex) {
            throw ConfigError("eps", ex.what());
        }
    }
    if (replicas < 1) throw ConfigError("replicas", "must be at least 1");
    if (first_replica < 0) throw ConfigError("first_replica", "must be nonnegative");
    if (taus.empty()) throw ConfigError("taus", "need at least one value");
    if (!std::is_sorted(taus.begin(), taus.end()) || taus.front() < 0.0) {
        throw ConfigError("taus", "must be nonnegative and sorted");
    }
    if (rs.empty()) throw ConfigError("rs", "need at least one value");
}

ExperimentSpec spec_from_config(const Config& cfg) {
    for (const auto& [key, value] : cfg.values()) {
        if (!kKnownKeys.count(key)) throw ConfigError(key, "unknown key");
    }
    ExperimentSpec s;
    s.nu = cfg.get_double("nu", s.nu);
    s.alpha = cfg.get_double("alpha", s.alpha);
    s.J = static_cast<int>(cfg.get_int("J", s.J));
    s.rho = cfg.get_double("rho", s.rho);
    const std::string ic = cfg.get_string("ic", to_string(s.ic));
    if (ic == "step") {
        s.ic = InitialKind::Step;
    } else if (ic == "near_eq") {
        s.ic = InitialKind::NearEquilibrium;
    } else {
        throw ConfigError("ic", "expected 'step' or 'near_eq', got '" + ic + "'");
    }
    s.eps = cfg.get_list("eps", s.eps);
    s.replicas = cfg.get_int("replicas", s.replicas);
    s.first_replica = cfg.get_int("first_replica", s.first_replica);
    s.taus = cfg.get_list("taus", s.taus);
    s.rs = cfg.get_list("rs", s.rs);
    s.suite = cfg.get_string("suite", s.suite);
    s.seed = cfg.get_uint("seed", s.seed);
    s.out = cfg.get_string("out", s.out);
    s.threads = static_cast<unsigned>(cfg.get_int("threads", s.threads));
    s.validate();
    return s;
}

nlohmann::json to_json(const ExperimentSpec& s) {
    return {{"version", kVersion}, {"nu", s.nu},       {"alpha", s.alpha},
            {"J", s.J},            {"rho", s.rho},     {"ic", to_string(s.ic)},
            {"eps", s.eps},        {"replicas", s.replicas}, {"first_replica", s.first_replica},
            {"taus", s.taus},      {"rs", s.rs},       {"suite", s.suite},
            {"seed", s.seed},      {"out", s.out}};
}

}  // namespace hsep

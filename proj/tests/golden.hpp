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

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsep::testing {

inline std::string golden_path(const std::string& name) { return std::string(HSEP_GOLDEN_DIR) + "/" + name; }

/// Whitespace-separated numeric rows, skipping '#' lines.
inline std::vector<std::vector<std::string>> read_rows(const std::string& name) {
    std::ifstream in(golden_path(name));
    if (!in) throw std::runtime_error("missing golden file " + name);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<std::string> row;
        for (std::string tok; ls >> tok;) row.push_back(tok);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace hsep::testing

/*******************************************************************************
* Copyright 2026 The rcbev Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace rcbev {

struct CheckResult {
    std::string property;
    double tolerance = 0.0;
    double measured = 0.0;  // worst error, or 0/1 for exact checks
    bool passed = false;
};

struct SelfcheckOptions {
    /// Test hook: perturbs one DMSA projection seen by the implementation
    /// but not by the oracle.
    bool perturb_dmsa_weight = false;
    std::uint64_t seed = 2024;
};

struct SelfcheckReport {
    std::vector<CheckResult> checks;

    bool all_passed() const;
    void print(std::ostream& out) const;
};

SelfcheckReport selfcheck(const SelfcheckOptions& options = {});

}  // namespace rcbev

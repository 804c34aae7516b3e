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

#include <cstddef>
#include <functional>

namespace rcbev {

/// Hardware concurrency, capped by RCBEV_THREADS when set (minimum 1).
std::size_t thread_count();

/// Overrides RCBEV_THREADS for the current process (0 restores the env value).
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Each index is visited exactly once; bodies
/// must write to disjoint outputs, so results do not depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rcbev

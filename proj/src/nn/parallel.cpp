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

#include "rcbev/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace rcbev {
namespace {

std::atomic<std::size_t> g_override{0};

std::size_t env_thread_count() {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const char* env = std::getenv("RCBEV_THREADS");
    if (env == nullptr) return hw;
    try {
        const long v = std::stol(env);
        if (v < 1) return 1;
        return std::min<std::size_t>(hw, static_cast<std::size_t>(v));
    } catch (...) {
        return 1;
    }
}

}  // namespace

std::size_t thread_count() {
    const std::size_t forced = g_override.load();
    return forced != 0 ? forced : env_thread_count();
}

void set_thread_count(std::size_t n) { g_override.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    // Contiguous blocks keep each worker's writes local.
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &body] {
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
}

}  // namespace rcbev

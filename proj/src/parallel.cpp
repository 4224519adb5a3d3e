// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/parallel.hpp"

#include <cstdlib>
#include <string>

namespace opclt {

int default_workers()
{
    if (const char* env = std::getenv("OPCLT_WORKERS")) {
        try {
            const int w = std::stoi(env);
            if (w >= 1)
                return w;
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace opclt

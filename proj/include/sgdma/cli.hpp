/*
 * Copyright 2026 The sgdma-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <ostream>

namespace sgdma {

enum ExitCode : int {
    kExitOk = 0,
    /// The command ran but its check did not pass (requirement FAIL, ring
    /// violations).
    kExitCheckFailed = 1,
    kExitBadArgs = 2,
    kExitConfigInvalid = 3,
    kExitIoError = 4,
    kExitRuntime = 5,
};

/// Entry point of the sgdma_sim tool. Errors are reported on `err` as a
/// single JSON object.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sgdma

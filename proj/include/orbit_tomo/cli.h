// Copyright 2026 The orbit_tomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ORBIT_TOMO_CLI_H
#define ORBIT_TOMO_CLI_H

namespace orbit_tomo {

/// Exit codes: 0 success, 1 configuration or usage error, 2 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNumericalError = 2;

/// Entry point of the orbit-tomo command-line tool.
int cli_main(int argc, char **argv);

}  // namespace orbit_tomo

#endif  // ORBIT_TOMO_CLI_H

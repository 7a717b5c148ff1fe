//
// Copyright 2026 The memaudit Authors
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
//


#ifndef MEMAUDIT_CLI_H_
#define MEMAUDIT_CLI_H_

#include <iosfwd>

namespace memaudit {

// Process exit codes of the memaudit tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitModelMismatch = 4;
inline constexpr int kExitDegenerateStatistic = 5;

// Entry point of the memaudit tool. Subcommands: synth, corrupt, train,
// predict, audit, baseline, experiment. Results go to `out`, diagnostics to
// `err`; the return value is one of the exit codes above.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace memaudit

#endif  // MEMAUDIT_CLI_H_

// Copyright 2026 The pslabel Authors.
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

#ifndef PSLABEL_CLI_H_
#define PSLABEL_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace pslabel {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInputFormat = 2,
  kExitDegenerate = 3,
};

// Runs the `pslabel` command line. `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// Markdown table of every CLI default, rendered from the library constants.
std::string DefaultsTable();

}  // namespace pslabel

#endif  // PSLABEL_CLI_H_

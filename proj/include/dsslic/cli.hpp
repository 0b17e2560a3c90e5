// Copyright 2026 the dsslic authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSSLIC_CLI_HPP_
#define DSSLIC_CLI_HPP_

#include <string>
#include <vector>

namespace dsslic {

// Entry point behind the dsslic binary. Exit codes: 0 success, 1 usage
// error, 2 data error, 3 backend error.
int run_cli(const std::vector<std::string>& args);

}  // namespace dsslic

#endif  // DSSLIC_CLI_HPP_

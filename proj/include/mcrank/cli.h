/*
 * Copyright 2026 The mcrank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MCRANK_CLI_H_
#define MCRANK_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace mcrank {

// Exit codes: 0 success (including --help), 1 runtime failure, 2 usage
// error. Failures print a single "error: ..." line to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcrank

#endif  // MCRANK_CLI_H_

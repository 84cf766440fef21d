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

#ifndef MCRANK_SERVER_H_
#define MCRANK_SERVER_H_

#include <memory>
#include <string>
#include <thread>

#include "mcrank/scoring.h"

namespace httplib {
class Server;
}

namespace mcrank {

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
};

// "host:port" or ":port". Throws InvalidInputError otherwise.
BindAddress ParseBindAddress(const std::string& s);

// Applies MCRANK_BIND and MCRANK_POOL_CAP when set.
void ApplyEnvironmentOverrides(BindAddress& bind, ScorerConfig& cfg);

// HTTP front end:
//   POST /v1/score   ScoreRequest body -> ScoreResponse
//   GET  /v1/health  {"status", "model_fingerprint", "num_trees", "num_features"}
// Malformed bodies get 400, oversized pools 413, both with {"error": msg}.
class ScoringServer {
 public:
  explicit ScoringServer(const Scorer& scorer);
  ~ScoringServer();

  // Binds and serves on a background thread; returns the bound port.
  int Start(const BindAddress& bind);
  // Binds and serves on the calling thread until Stop().
  void Run(const BindAddress& bind);
  void Stop();

 private:
  void Install();

  const Scorer& scorer_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace mcrank

#endif  // MCRANK_SERVER_H_

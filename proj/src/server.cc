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

#include "mcrank/server.h"

#include <cstdlib>

#include "httplib.h"

namespace mcrank {

BindAddress ParseBindAddress(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw InvalidInputError("bind address must be host:port, got '" + s + "'");
  BindAddress b;
  if (colon > 0) b.host = s.substr(0, colon);
  const int64_t port = ParseInt(s.substr(colon + 1));
  if (port < 0 || port > 65535) throw InvalidInputError("bind port out of range: " + s);
  b.port = static_cast<int>(port);
  return b;
}

void ApplyEnvironmentOverrides(BindAddress& bind, ScorerConfig& cfg) {
  if (const char* v = std::getenv("MCRANK_BIND"); v != nullptr && *v != '\0') {
    bind = ParseBindAddress(v);
  }
  if (const char* v = std::getenv("MCRANK_POOL_CAP"); v != nullptr && *v != '\0') {
    const int64_t cap = ParseInt(v);
    if (cap < 1) throw InvalidInputError("MCRANK_POOL_CAP must be >= 1");
    cfg.pool_cap = static_cast<size_t>(cap);
  }
}

ScoringServer::ScoringServer(const Scorer& scorer)
    : scorer_(scorer), server_(std::make_unique<httplib::Server>()) {
  Install();
}

ScoringServer::~ScoringServer() { Stop(); }

void ScoringServer::Install() {
  const auto error = [](httplib::Response& res, int status, const std::string& msg) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
  };
  server_->Post("/v1/score", [this, error](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto body = nlohmann::json::parse(req.body);
      const ScoreRequest sr = ParseScoreRequest(body, scorer_.channel_names());
      res.set_content(scorer_.Score(sr).ToJson().dump(), "application/json");
    } catch (const nlohmann::json::exception& e) {
      error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const PoolTooLargeError& e) {
      error(res, 413, e.what());
    } catch (const InvalidInputError& e) {
      error(res, 400, e.what());
    } catch (const std::exception& e) {
      error(res, 500, e.what());
    }
  });
  server_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    const auto model = scorer_.model();
    const nlohmann::json j = {{"status", "ok"},
                              {"model_fingerprint", scorer_.fingerprint()},
                              {"num_trees", model->trees.size()},
                              {"num_features", model->schema.size()},
                              {"pool_cap", scorer_.config().pool_cap}};
    res.set_content(j.dump(), "application/json");
  });
}

int ScoringServer::Start(const BindAddress& bind) {
  int port = bind.port;
  if (port == 0) {
    port = server_->bind_to_any_port(bind.host);
  } else if (!server_->bind_to_port(bind.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error("cannot bind " + bind.host + ":" + std::to_string(bind.port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void ScoringServer::Run(const BindAddress& bind) {
  if (!server_->listen(bind.host, bind.port)) {
    throw Error("cannot listen on " + bind.host + ":" + std::to_string(bind.port));
  }
}

void ScoringServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mcrank

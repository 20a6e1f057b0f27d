//
// Copyright 2026 The corpusbias Authors
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

#ifndef CORPUSBIAS_HTTP_CLIENT_H_
#define CORPUSBIAS_HTTP_CLIENT_H_

#include <chrono>
#include <string>
#include <string_view>

#include "corpusbias/error.h"
#include "json.hpp"

namespace corpusbias {

struct HttpEndpoint {
  std::string base_url;  // "http://host:port" with an optional path prefix
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{100};  // doubled after every retry
};

// HTTP error status returned by a service (4xx: not retried).
class HttpStatusError : public Error {
 public:
  HttpStatusError(int status, const std::string& what)
      : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Blocking JSON-over-HTTP client. Each call opens its own connection, so one
// instance may be shared across threads. Connection failures and 5xx
// responses are retried with exponential backoff; exhausting the retries
// throws ServiceUnavailable. 4xx responses throw HttpStatusError immediately.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(HttpEndpoint endpoint);

  nlohmann::json get(std::string_view path) const;
  nlohmann::json post(std::string_view path, const nlohmann::json& body) const;

  const HttpEndpoint& endpoint() const { return endpoint_; }

 private:
  nlohmann::json request(std::string_view method, std::string_view path,
                         const nlohmann::json* body) const;

  HttpEndpoint endpoint_;
  std::string origin_;  // scheme://host:port
  std::string prefix_;  // path prefix without trailing slash
};

}  // namespace corpusbias

#endif  // CORPUSBIAS_HTTP_CLIENT_H_

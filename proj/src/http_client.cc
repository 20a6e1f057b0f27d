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

#include "corpusbias/http_client.h"

#include <thread>

#include "corpusbias/error.h"
#include "corpusbias/logging.h"
#include "httplib.h"

namespace corpusbias {

JsonHttpClient::JsonHttpClient(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  std::string url = endpoint_.base_url;
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos || url.substr(0, scheme) != "http") {
    throw InvalidInput("endpoint must be an http:// URL: " + url);
  }
  const size_t path_start = url.find('/', scheme + 3);
  origin_ = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    prefix_ = url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

nlohmann::json JsonHttpClient::get(std::string_view path) const {
  return request("GET", path, nullptr);
}

nlohmann::json JsonHttpClient::post(std::string_view path,
                                    const nlohmann::json& body) const {
  return request("POST", path, &body);
}

nlohmann::json JsonHttpClient::request(std::string_view method,
                                       std::string_view path,
                                       const nlohmann::json* body) const {
  const std::string full_path = prefix_ + std::string(path);
  const std::string payload = body ? body->dump() : std::string();
  std::string last_error;
  auto delay = endpoint_.backoff;
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
        endpoint_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
                           endpoint_.timeout - secs)
                           .count();
    client.set_connection_timeout(secs.count(), usecs);
    client.set_read_timeout(secs.count(), usecs);
    client.set_write_timeout(secs.count(), usecs);

    auto result = method == "GET"
                      ? client.Get(full_path)
                      : client.Post(full_path, payload, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status >= 400) {
      throw HttpStatusError(result->status,
                            origin_ + full_path + " returned HTTP " +
                                std::to_string(result->status) + ": " +
                                result->body);
    }
    try {
      return nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::parse_error&) {
      throw Error(origin_ + full_path + " returned a non-JSON body");
    }
  }
  throw ServiceUnavailable(origin_ + full_path + " unreachable after " +
                           std::to_string(endpoint_.max_retries) +
                           " retries: " + last_error);
}

}  // namespace corpusbias

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

#ifndef CORPUSBIAS_ERROR_H_
#define CORPUSBIAS_ERROR_H_

#include <stdexcept>
#include <string>

namespace corpusbias {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration. The CLI maps this to exit status 1.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// An external service (classifier, rewriter, perturber, scorer bridge) could
// not be reached after retries. When the failing operation was checkpointed,
// checkpoint() names the file to pass back via --resume. Exit status 2.
class ServiceUnavailable : public Error {
 public:
  explicit ServiceUnavailable(const std::string& what,
                              std::string checkpoint = {})
      : Error(what), checkpoint_(std::move(checkpoint)) {}

  const std::string& checkpoint() const { return checkpoint_; }

 private:
  std::string checkpoint_;
};

}  // namespace corpusbias

#endif  // CORPUSBIAS_ERROR_H_

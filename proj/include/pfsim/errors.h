/* Copyright 2026 The pfsim Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pfsim {

// Malformed input: bad spec values, inconsistent plans, unparsable config.
// The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Well-formed input that cannot be simulated (capacity overflow, no feasible
// plan, counter overflow). The CLI maps these to exit code 2.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BatchOverflowError : public SimulationError {
 public:
  BatchOverflowError(std::int64_t requested, std::int64_t max_batch)
      : SimulationError("batch " + std::to_string(requested) +
                        " exceeds the memory-limited maximum batch " +
                        std::to_string(max_batch)),
        requested_(requested),
        max_batch_(max_batch) {}

  std::int64_t requested() const { return requested_; }
  std::int64_t max_batch() const { return max_batch_; }

 private:
  std::int64_t requested_;
  std::int64_t max_batch_;
};

}  // namespace pfsim

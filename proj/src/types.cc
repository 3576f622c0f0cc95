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

#include "pfsim/types.h"

#include "pfsim/errors.h"

namespace pfsim {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::prefill: return "prefill";
    case Phase::decode: return "decode";
    case Phase::train: return "train";
  }
  return "unknown";
}

std::string_view to_string(Dtype dtype) {
  switch (dtype) {
    case Dtype::fp32: return "fp32";
    case Dtype::bf16: return "bf16";
    case Dtype::fp16: return "fp16";
    case Dtype::fp8: return "fp8";
  }
  return "unknown";
}

Phase parse_phase(std::string_view text) {
  if (text == "prefill") return Phase::prefill;
  if (text == "decode") return Phase::decode;
  if (text == "train") return Phase::train;
  throw ValidationError("unknown phase '" + std::string(text) + "' (expected prefill|decode|train)");
}

Dtype parse_dtype(std::string_view text) {
  if (text == "fp32") return Dtype::fp32;
  if (text == "bf16") return Dtype::bf16;
  if (text == "fp16") return Dtype::fp16;
  if (text == "fp8") return Dtype::fp8;
  throw ValidationError("unknown dtype '" + std::string(text) + "' (expected fp32|bf16|fp16|fp8)");
}

Dtype dtype_for_bytes(int bytes) {
  switch (bytes) {
    case 1: return Dtype::fp8;
    case 2: return Dtype::fp16;
    case 4: return Dtype::fp32;
  }
  throw ValidationError("no compute dtype for element width " + std::to_string(bytes));
}

}  // namespace pfsim

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

#include <string>
#include <string_view>

namespace pfsim {

/// Execution phase of a transformer forward pass.
///
/// `train` is a prefill-shaped forward pass whose logits cover every
/// position; backward cost is derived from it by the training module.
enum class Phase { prefill, decode, train };

enum class Dtype { fp32, bf16, fp16, fp8 };

/// Processor unit a kernel is issued to. Matrix kernels use the per-dtype
/// tensor-core peak and the GEMM efficiency curve; vector kernels use the
/// flat vector peak.
enum class ComputeUnit { matrix, vector };

std::string_view to_string(Phase phase);
std::string_view to_string(Dtype dtype);

Phase parse_phase(std::string_view text);
Dtype parse_dtype(std::string_view text);

/// Compute dtype implied by an element width: 1 -> fp8, 2 -> fp16, 4 -> fp32.
Dtype dtype_for_bytes(int bytes);

}  // namespace pfsim

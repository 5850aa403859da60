// Copyright 2026 The Sparse Attack Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPARSE_ATTACK_PARAM_IO_H_
#define SPARSE_ATTACK_PARAM_IO_H_

#include <string>

#include "sparse_attack/tensor.h"

namespace sparse_attack {

// Parameter persistence.
//
// The manifest is UTF-8 text:
//
//   sparse-attack-params 1
//   <name> <rows> <cols> <offset>
//   ...
//
// where offset counts 64-bit reals from the start of the payload. The payload
// is the concatenation of every tensor in row-major order, each value stored
// as an IEEE-754 double in little-endian byte order. Names contain no
// whitespace.
void SaveParams(const ParamStore& params, const std::string& manifest_path,
                const std::string& payload_path);
ParamStore LoadParams(const std::string& manifest_path, const std::string& payload_path);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_PARAM_IO_H_

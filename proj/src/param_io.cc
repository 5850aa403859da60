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

#include "sparse_attack/param_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sparse_attack/error.h"

namespace sparse_attack {
namespace {

constexpr const char* kMagic = "sparse-attack-params";

void PutDouble(std::string& out, double v) {
  uint64_t bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double GetDouble(const unsigned char* p) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void SaveParams(const ParamStore& params, const std::string& manifest_path,
                const std::string& payload_path) {
  std::ostringstream manifest;
  manifest << kMagic << " 1\n";
  std::string payload;
  size_t offset = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.names()[i];
    if (name.find_first_of(" \t\r\n") != std::string::npos) {
      Fail(ErrorCode::kInvalidArgument, "parameter name contains whitespace: " + name);
    }
    const Tensor& t = params.value(i);
    manifest << name << ' ' << t.rows() << ' ' << t.cols() << ' ' << offset << '\n';
    for (Eigen::Index k = 0; k < t.size(); ++k) PutDouble(payload, t.data()[k]);
    offset += static_cast<size_t>(t.size());
  }
  std::ofstream mf(manifest_path, std::ios::binary);
  std::ofstream pf(payload_path, std::ios::binary);
  if (!mf || !pf) Fail(ErrorCode::kIoError, "cannot open " + manifest_path + " for writing");
  mf << manifest.str();
  pf.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!mf || !pf) Fail(ErrorCode::kIoError, "write failed for " + manifest_path);
}

ParamStore LoadParams(const std::string& manifest_path, const std::string& payload_path) {
  std::ifstream mf(manifest_path, std::ios::binary);
  std::ifstream pf(payload_path, std::ios::binary);
  if (!mf) Fail(ErrorCode::kIoError, "cannot open " + manifest_path);
  if (!pf) Fail(ErrorCode::kIoError, "cannot open " + payload_path);
  std::string payload((std::istreambuf_iterator<char>(pf)), std::istreambuf_iterator<char>());
  if (payload.size() % 8 != 0) Fail(ErrorCode::kIoError, "payload size is not a multiple of 8");
  const size_t n_values = payload.size() / 8;
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());

  std::string magic;
  int version = 0;
  mf >> magic >> version;
  if (magic != kMagic || version != 1) Fail(ErrorCode::kIoError, "bad manifest header");
  ParamStore params;
  std::string name;
  long long rows = 0, cols = 0;
  unsigned long long offset = 0;
  while (mf >> name >> rows >> cols >> offset) {
    if (rows < 0 || cols < 0 || offset + rows * cols > n_values) {
      Fail(ErrorCode::kIoError, "manifest entry out of range: " + name);
    }
    Tensor t(rows, cols);
    for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = GetDouble(bytes + 8 * (offset + k));
    params.Add(name, std::move(t));
  }
  if (!mf.eof()) Fail(ErrorCode::kIoError, "malformed manifest " + manifest_path);
  return params;
}

}  // namespace sparse_attack

// Copyright 2026 The DSRG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSRG_CHECKPOINT_H_
#define DSRG_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsrg/linalg.h"

namespace dsrg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Tensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t NumElements() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Ordered set of named float tensors. Insertion order is the on-disk order.
class Checkpoint {
 public:
  // Throws InvalidInput for a duplicate or over-long name, rank > 255, or a
  // value count that does not match the dims.
  void Put(std::string name, std::vector<std::uint32_t> dims, std::vector<float> values);
  void PutVector(std::string name, const Vector& v);
  void PutMatrix(std::string name, const Matrix& m);
  // UTF-8 text stored as one float per byte (rank 1).
  void PutText(std::string name, std::string_view text);

  bool Has(std::string_view name) const;
  // Throws MissingArtifact when absent.
  const Tensor& Get(std::string_view name) const;
  // Throw CorruptCheckpoint when the stored rank does not fit.
  Vector GetVector(std::string_view name) const;
  Matrix GetMatrix(std::string_view name) const;
  std::string GetText(std::string_view name) const;

  const std::vector<Tensor>& tensors() const { return tensors_; }

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;

 private:
  std::vector<Tensor> tensors_;
};

// CRC-32 (zlib polynomial).
std::uint32_t Crc32(std::span<const std::uint8_t> bytes);

// Layout, all integers little-endian: "DSRG", u32 version, u32 tensor count,
// then per tensor u16 name length, name, u8 rank, u32 dims, f32 values; a
// trailing u32 CRC of every preceding byte.
std::string SerializeCheckpoint(const Checkpoint& checkpoint);
// Throws CorruptCheckpoint on a bad magic, version, CRC, truncation, trailing
// bytes or duplicate names.
Checkpoint ParseCheckpoint(std::string_view bytes);

// Throws IoError when the file cannot be written.
void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Throws MissingArtifact when the file does not exist.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Whole-file helpers shared by the loaders.
std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace dsrg

#endif  // DSRG_CHECKPOINT_H_

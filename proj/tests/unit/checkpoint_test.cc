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

#include "dsrg/checkpoint.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "dsrg/error.h"
#include "dsrg/random.h"
#include "support/test_util.h"

namespace dsrg {
namespace {

using ::dsrg::testing::ScopedTempDir;

Checkpoint Sample() {
  Checkpoint c;
  Rng rng(1);
  Matrix m(3, 4);
  for (float& v : m.values()) v = static_cast<float>(rng.Normal());
  c.PutMatrix("net/w1", m);
  c.PutVector("net/b1", Vector{1.5f, -0.0f, std::numeric_limits<float>::denorm_min()});
  c.Put("cube", {2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  c.PutText("manifest", "{\"k\": \"vé\"}");
  return c;
}

std::string WithCrc(std::string bytes) {
  bytes.resize(bytes.size() - 4);
  const std::uint32_t crc =
      Crc32({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((crc >> (8 * i)) & 0xFF));
  return bytes;
}

TEST(Crc32Test, KnownVector) {
  const std::string s = "123456789";
  EXPECT_EQ(Crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}),
            0xCBF43926u);
}

TEST(CheckpointTest, AccessorsAndErrors) {
  const Checkpoint c = Sample();
  EXPECT_TRUE(c.Has("cube"));
  EXPECT_EQ(c.Get("cube").NumElements(), 8u);
  EXPECT_EQ(c.GetMatrix("net/w1").cols(), 4u);
  EXPECT_EQ(c.GetText("manifest"), "{\"k\": \"vé\"}");
  EXPECT_DSRG_ERROR(c.Get("nope"), ErrorCode::kMissingArtifact);
  EXPECT_DSRG_ERROR(c.GetVector("net/w1"), ErrorCode::kCorruptCheckpoint);
  EXPECT_DSRG_ERROR(c.GetMatrix("cube"), ErrorCode::kCorruptCheckpoint);
  EXPECT_DSRG_ERROR(c.GetText("net/b1"), ErrorCode::kCorruptCheckpoint);
  Checkpoint d = c;
  EXPECT_DSRG_ERROR(d.Put("cube", {1}, {0}), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR(d.Put("bad", {2, 2}, {0}), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR(d.Put("", {1}, {0}), ErrorCode::kInvalidInput);
}

TEST(CheckpointTest, SerializeRoundTripIsBitExact) {
  const Checkpoint c = Sample();
  const std::string bytes = SerializeCheckpoint(c);
  EXPECT_EQ(bytes.substr(0, 4), "DSRG");
  const Checkpoint back = ParseCheckpoint(bytes);
  ASSERT_EQ(back.tensors().size(), c.tensors().size());
  for (std::size_t i = 0; i < c.tensors().size(); ++i) {
    const Tensor& a = c.tensors()[i];
    const Tensor& b = back.tensors()[i];
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.dims, b.dims);
    ASSERT_EQ(a.values.size(), b.values.size());
    EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), a.values.size() * 4), 0);
  }
  EXPECT_EQ(SerializeCheckpoint(back), bytes);
}

TEST(CheckpointTest, FileRoundTrip) {
  ScopedTempDir dir("dsrg_ckpt_");
  const auto path = dir.path() / "a.dsrg";
  SaveCheckpoint(path, Sample());
  EXPECT_EQ(LoadCheckpoint(path), Sample());
  EXPECT_DSRG_ERROR(LoadCheckpoint(dir.path() / "missing.dsrg"),
                    ErrorCode::kMissingArtifact);
  EXPECT_DSRG_ERROR(LoadCheckpoint(dir.path()), ErrorCode::kMissingArtifact);
}

TEST(CheckpointTest, EveryFlippedByteIsDetected) {
  const std::string bytes = SerializeCheckpoint(Sample());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    std::string bad = bytes;
    bad[i] = static_cast<char>(bad[i] ^ 0x10);
    EXPECT_DSRG_ERROR(ParseCheckpoint(bad), ErrorCode::kCorruptCheckpoint) << i;
  }
}

TEST(CheckpointTest, StructuralCorruption) {
  const std::string bytes = SerializeCheckpoint(Sample());
  EXPECT_DSRG_ERROR(ParseCheckpoint(""), ErrorCode::kCorruptCheckpoint);
  EXPECT_DSRG_ERROR(ParseCheckpoint(bytes.substr(0, bytes.size() - 1)),
                    ErrorCode::kCorruptCheckpoint);
  EXPECT_DSRG_ERROR(ParseCheckpoint(WithCrc(bytes.substr(0, 40) + "0000")),
                    ErrorCode::kCorruptCheckpoint);
  std::string version = bytes;
  version[4] = 2;
  EXPECT_DSRG_ERROR(ParseCheckpoint(WithCrc(version)), ErrorCode::kCorruptCheckpoint);
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_DSRG_ERROR(ParseCheckpoint(WithCrc(magic)), ErrorCode::kCorruptCheckpoint);
  std::string trailing = bytes;
  trailing.insert(trailing.size() - 4, "zz");
  EXPECT_DSRG_ERROR(ParseCheckpoint(WithCrc(trailing)), ErrorCode::kCorruptCheckpoint);
}

TEST(CheckpointTest, CorruptFileOnDiskIsRefused) {
  ScopedTempDir dir("dsrg_ckpt_");
  const auto path = dir.path() / "a.dsrg";
  std::string bytes = SerializeCheckpoint(Sample());
  bytes[bytes.size() / 2] ^= 0x01;
  WriteFileBytes(path, bytes);
  EXPECT_DSRG_ERROR(LoadCheckpoint(path), ErrorCode::kCorruptCheckpoint);
}

}  // namespace
}  // namespace dsrg

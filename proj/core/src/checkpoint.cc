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

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "dsrg/error.h"

namespace dsrg {
namespace {

constexpr char kMagic[4] = {'D', 'S', 'R', 'G'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void Append(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Read() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view Take(std::size_t n) {
    Need(n);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t pos() const { return pos_; }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      Fail(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t Tensor::NumElements() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

void Checkpoint::Put(std::string name, std::vector<std::uint32_t> dims,
                     std::vector<float> values) {
  if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max()) {
    Fail(ErrorCode::kInvalidInput, "tensor name length out of range");
  }
  if (Has(name)) Fail(ErrorCode::kInvalidInput, "duplicate tensor '" + name + "'");
  if (dims.size() > 255) Fail(ErrorCode::kInvalidInput, "tensor rank > 255");
  Tensor t{std::move(name), std::move(dims), std::move(values)};
  if (t.NumElements() != t.values.size()) {
    Fail(ErrorCode::kInvalidInput, "tensor '" + t.name + "' size mismatch");
  }
  tensors_.push_back(std::move(t));
}

void Checkpoint::PutVector(std::string name, const Vector& v) {
  Put(std::move(name), {static_cast<std::uint32_t>(v.dim())},
      {v.values().begin(), v.values().end()});
}

void Checkpoint::PutMatrix(std::string name, const Matrix& m) {
  Put(std::move(name),
      {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())},
      {m.values().begin(), m.values().end()});
}

void Checkpoint::PutText(std::string name, std::string_view text) {
  std::vector<float> bytes;
  bytes.reserve(text.size());
  for (char c : text) bytes.push_back(static_cast<float>(static_cast<unsigned char>(c)));
  Put(std::move(name), {static_cast<std::uint32_t>(text.size())}, std::move(bytes));
}

bool Checkpoint::Has(std::string_view name) const {
  for (const Tensor& t : tensors_) {
    if (t.name == name) return true;
  }
  return false;
}

const Tensor& Checkpoint::Get(std::string_view name) const {
  for (const Tensor& t : tensors_) {
    if (t.name == name) return t;
  }
  Fail(ErrorCode::kMissingArtifact,
       "checkpoint has no tensor '" + std::string(name) + "'");
}

Vector Checkpoint::GetVector(std::string_view name) const {
  const Tensor& t = Get(name);
  if (t.dims.size() != 1) {
    Fail(ErrorCode::kCorruptCheckpoint, "tensor '" + t.name + "' is not rank 1");
  }
  return Vector(t.values);
}

Matrix Checkpoint::GetMatrix(std::string_view name) const {
  const Tensor& t = Get(name);
  if (t.dims.size() != 2) {
    Fail(ErrorCode::kCorruptCheckpoint, "tensor '" + t.name + "' is not rank 2");
  }
  return Matrix(t.dims[0], t.dims[1], t.values);
}

std::string Checkpoint::GetText(std::string_view name) const {
  const Tensor& t = Get(name);
  if (t.dims.size() != 1) {
    Fail(ErrorCode::kCorruptCheckpoint, "tensor '" + t.name + "' is not text");
  }
  std::string out;
  out.reserve(t.values.size());
  for (float v : t.values) {
    if (!(v >= 0.0f && v <= 255.0f) || v != static_cast<float>(static_cast<int>(v))) {
      Fail(ErrorCode::kCorruptCheckpoint, "tensor '" + t.name + "' is not text");
    }
    out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
  }
  return out;
}

std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large payloads.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  std::string out(kMagic, sizeof(kMagic));
  Append<std::uint32_t>(out, kCheckpointVersion);
  Append<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.tensors().size()));
  for (const Tensor& t : checkpoint.tensors()) {
    Append<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out += t.name;
    Append<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) Append<std::uint32_t>(out, d);
    for (float v : t.values) Append<float>(out, v);
  }
  const auto* data = reinterpret_cast<const std::uint8_t*>(out.data());
  Append<std::uint32_t>(out, Crc32({data, out.size()}));
  return out;
}

Checkpoint ParseCheckpoint(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + 12) {
    Fail(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    Fail(ErrorCode::kCorruptCheckpoint, "bad checkpoint magic");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + body.size(), 4);
  const auto* data = reinterpret_cast<const std::uint8_t*>(body.data());
  if (Crc32({data, body.size()}) != stored_crc) {
    Fail(ErrorCode::kCorruptCheckpoint, "checkpoint CRC mismatch");
  }

  Reader r(body);
  r.Take(sizeof(kMagic));
  const auto version = r.Read<std::uint32_t>();
  if (version != kCheckpointVersion) {
    Fail(ErrorCode::kCorruptCheckpoint,
         "unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.Read<std::uint32_t>();
  Checkpoint out;
  std::set<std::string, std::less<>> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.Read<std::uint16_t>();
    std::string name(r.Take(name_len));
    const auto rank = r.Read<std::uint8_t>();
    std::vector<std::uint32_t> dims(rank);
    std::size_t n = 1;
    for (auto& d : dims) {
      d = r.Read<std::uint32_t>();
      n *= d;
    }
    if (n > (body.size() - r.pos()) / sizeof(float)) {
      Fail(ErrorCode::kCorruptCheckpoint, "tensor '" + name + "' exceeds payload");
    }
    std::vector<float> values(n);
    std::memcpy(values.data(), r.Take(n * sizeof(float)).data(), n * sizeof(float));
    if (name.empty() || !seen.insert(name).second) {
      Fail(ErrorCode::kCorruptCheckpoint, "bad or duplicate tensor name");
    }
    out.Put(std::move(name), std::move(dims), std::move(values));
  }
  if (r.pos() != body.size()) {
    Fail(ErrorCode::kCorruptCheckpoint, "trailing bytes after last tensor");
  }
  return out;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    Fail(ErrorCode::kMissingArtifact, "missing file " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) Fail(ErrorCode::kIoError, "read failed for " + path.string());
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  WriteFileBytes(path, SerializeCheckpoint(checkpoint));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return ParseCheckpoint(ReadFileBytes(path));
}

}  // namespace dsrg

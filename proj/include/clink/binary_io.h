// Copyright 2026 The clink Authors.
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

#ifndef CLINK_BINARY_IO_H_
#define CLINK_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>

#include "clink/common.h"

namespace clink {

// Little-endian record writer used by the KB index and model files. The
// buffer is accumulated in memory and written with a trailing FNV-1a
// checksum of everything before it.
class BinaryWriter {
 public:
  void WriteBytes(std::string_view bytes) { buffer_.append(bytes); }

  template <typename T>
  void Write(T value) {
    static_assert(std::is_arithmetic_v<T>);
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buffer_.append(raw, sizeof(T));
  }

  void WriteString(std::string_view s) {
    Write<uint32_t>(static_cast<uint32_t>(s.size()));
    buffer_.append(s);
  }

  const std::string &buffer() const { return buffer_; }

  // Appends the checksum and writes the whole buffer to `path`.
  void Commit(const std::string &path);

 private:
  std::string buffer_;
};

// Bounds-checked reader over a byte buffer. Any overrun raises FormatError.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::string_view ReadBytes(size_t n) {
    if (n > data_.size() - pos_) throw FormatError("unexpected end of data");
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T Read() {
    static_assert(std::is_arithmetic_v<T>);
    T value;
    std::memcpy(&value, ReadBytes(sizeof(T)).data(), sizeof(T));
    return value;
  }

  std::string ReadString() {
    const uint32_t n = Read<uint32_t>();
    return std::string(ReadBytes(n));
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  size_t pos_ = 0;
};

// Reads a checksummed file written by BinaryWriter::Commit. Verifies that
// the file starts with `magic` and that the trailing checksum matches, then
// returns the payload between them. `magic` ends with the format version
// character; a file with the same stem but a newer version raises
// VersionError.
std::string ReadChecksummedFile(const std::string &path,
                                std::string_view magic);

std::string ReadFileBytes(const std::string &path);

}  // namespace clink

#endif  // CLINK_BINARY_IO_H_

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

#include "clink/binary_io.h"

#include <fstream>
#include <iterator>

namespace clink {

void BinaryWriter::Commit(const std::string &path) {
  const uint64_t checksum = Fnv1a64(buffer_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  char raw[sizeof(checksum)];
  std::memcpy(raw, &checksum, sizeof(checksum));
  out.write(raw, sizeof(raw));
  if (!out) throw Error("write failed: " + path);
}

std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::string ReadChecksummedFile(const std::string &path,
                                std::string_view magic) {
  const std::string data = ReadFileBytes(path);
  const std::string_view stem = magic.substr(0, magic.size() - 1);
  if (data.size() < magic.size() ||
      std::string_view(data).substr(0, stem.size()) != stem) {
    throw FormatError(path + ": bad magic, expected " + std::string(magic));
  }
  const char version = data[stem.size()];
  const char expected = magic.back();
  if (version != expected) {
    throw VersionError(path + ": unsupported format version '" +
                       std::string(1, version) + "', expected '" +
                       std::string(1, expected) + "'");
  }
  if (data.size() < magic.size() + sizeof(uint64_t)) {
    throw ChecksumError(path + ": file truncated");
  }
  const size_t body = data.size() - sizeof(uint64_t);
  uint64_t stored;
  std::memcpy(&stored, data.data() + body, sizeof(stored));
  if (stored != Fnv1a64(std::string_view(data).substr(0, body))) {
    throw ChecksumError(path + ": checksum mismatch");
  }
  return data.substr(magic.size(), body - magic.size());
}

}  // namespace clink

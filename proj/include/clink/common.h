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

#ifndef CLINK_COMMON_H_
#define CLINK_COMMON_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace clink {

// Row-major dense matrix. Embedded token sequences are stored one token per
// row so that a window of consecutive tokens is a contiguous block.
template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXd = RowMatrix<double>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or record.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Mismatched or invalid dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Mention span outside of its document.
class SpanError : public Error {
 public:
  using Error::Error;
};

// Invalid entity record, e.g. an empty title.
class InvalidEntityError : public Error {
 public:
  using Error::Error;
};

// Knowledge base construction failure.
class IngestError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward without a matching forward pass.
class UsageError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

// Infeasible synthetic corpus specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Training diverged (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// 64-bit FNV-1a. Used for feature hashing and file checksums.
constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

constexpr uint64_t Fnv1a64(std::string_view data, uint64_t h = kFnvOffset) {
  for (char c : data) {
    h ^= static_cast<uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

// All randomness in the library goes through this engine. The helpers below
// avoid the standard distributions, whose output is implementation defined.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits.
inline double UniformUnit(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double UniformReal(Rng &rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
inline uint64_t UniformIndex(Rng &rng, uint64_t n) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Standard normal via Box-Muller.
inline double StandardNormal(Rng &rng) {
  double u1 = UniformUnit(rng);
  while (u1 <= 0.0) u1 = UniformUnit(rng);
  const double u2 = UniformUnit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void Shuffle(T &items, Rng &rng) {
  for (size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[UniformIndex(rng, i)]);
  }
}

// ASCII lowercase.
std::string ToLower(std::string_view s);

}  // namespace clink

#endif  // CLINK_COMMON_H_

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

#ifndef CLINK_CNN_H_
#define CLINK_CNN_H_

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "clink/common.h"
#include "clink/embeddings.h"
#include "clink/textproc.h"

namespace clink {

// The five text granularities, each with its own filter bank. Source
// granularities come first, then target.
enum class Granularity : uint8_t {
  kSrcMention = 0,
  kSrcContext = 1,
  kSrcDocument = 2,
  kTgtTitle = 3,
  kTgtDocument = 4,
};

constexpr int kNumBanks = 5;
constexpr int kNumSourceViews = 3;
constexpr int kNumTargetViews = 2;
constexpr int kNumPairs = kNumSourceViews * kNumTargetViews;

std::string_view GranularityName(Granularity g);
// Accepts the names returned by GranularityName; raises IndexError.
Granularity ParseGranularity(std::string_view name);

// Index of the (source, target) cosine within the dense feature vector:
// (ment,title) (ment,doc) (context,title) (context,doc) (doc,title)
// (doc,doc).
constexpr int PairIndex(int source_view, int target_view) {
  return source_view * kNumTargetViews + target_view;
}

template <typename Scalar>
using DenseFeaturesT = Eigen::Matrix<Scalar, kNumPairs, 1>;
using DenseFeatures = DenseFeaturesT<double>;

// Filter bank M: k rows, each an n-gram detector over `width` consecutive
// `dim`-dimensional word vectors laid out token-major.
template <typename Scalar>
struct FilterBankT {
  Granularity granularity = Granularity::kSrcMention;
  int width = 1;
  int dim = 1;
  RowMatrix<Scalar> filters;

  int k() const { return static_cast<int>(filters.rows()); }
};
using FilterBank = FilterBankT<double>;

// The encoder parameters, one bank per granularity. `revision` is bumped on
// every in-place update so stale forward caches can be detected.
template <typename Scalar>
struct CnnParamsT {
  std::array<FilterBankT<Scalar>, kNumBanks> banks;
  uint64_t revision = 0;

  FilterBankT<Scalar> &bank(Granularity g) {
    return banks[static_cast<size_t>(g)];
  }
  const FilterBankT<Scalar> &bank(Granularity g) const {
    return banks[static_cast<size_t>(g)];
  }
  int k() const { return banks[0].k(); }
  int width() const { return banks[0].width; }
  int dim() const { return banks[0].dim; }
};
using CnnParams = CnnParamsT<double>;

// Gradient with the shape of CnnParams. Merging is component-wise sum.
template <typename Scalar>
struct CnnGradientT {
  std::array<RowMatrix<Scalar>, kNumBanks> banks;

  static CnnGradientT ZerosLike(const CnnParamsT<Scalar> &params) {
    CnnGradientT g;
    for (int b = 0; b < kNumBanks; ++b) {
      g.banks[b] = RowMatrix<Scalar>::Zero(params.banks[b].filters.rows(),
                                           params.banks[b].filters.cols());
    }
    return g;
  }
  CnnGradientT &operator+=(const CnnGradientT &other) {
    for (int b = 0; b < kNumBanks; ++b) banks[b] += other.banks[b];
    return *this;
  }
};
using CnnGradient = CnnGradientT<double>;

// Uniform init in [-a, a], a = sqrt(6 / (dim * width + k)).
CnnParams InitCnnParams(int k, int width, int dim, uint64_t seed);

// Pads a sequence shorter than `width` with zero rows, split evenly with
// the extra row on the right, so that there is always at least one window.
template <typename Scalar>
RowMatrix<Scalar> PadSequence(const RowMatrix<Scalar> &seq, int width) {
  if (seq.rows() >= width) return seq;
  RowMatrix<Scalar> padded = RowMatrix<Scalar>::Zero(width, seq.cols());
  const Eigen::Index left = (width - seq.rows()) / 2;
  padded.middleRows(left, seq.rows()) = seq;
  return padded;
}

// Zero-copy view of all sliding windows: row j is the concatenation of
// tokens j .. j+width-1. Relies on row-major storage.
template <typename Scalar>
auto WindowMatrix(const RowMatrix<Scalar> &padded, int width) {
  using Map = Eigen::Map<const RowMatrix<Scalar>, 0, Eigen::OuterStride<>>;
  const Eigen::Index windows = padded.rows() - width + 1;
  return Map(padded.data(), windows, padded.cols() * width,
             Eigen::OuterStride<>(padded.cols()));
}

// Pre-pooling state of one encoder call.
template <typename Scalar>
struct EncoderTraceT {
  RowMatrix<Scalar> padded;  // n' x d input after padding
  RowMatrix<Scalar> pre;     // windows x k pre-activations
};
using EncoderTrace = EncoderTraceT<double>;

// Sum-pooled ReLU convolution:
//   v[r] = sum_j max(0, M[r] . concat(w_j, ..., w_{j+width-1}))
// over the n' - width + 1 windows of the padded input.
template <typename Scalar>
Vector<Scalar> Encode(const FilterBankT<Scalar> &bank,
                      const RowMatrix<Scalar> &seq,
                      EncoderTraceT<Scalar> *trace = nullptr) {
  if (seq.cols() != bank.dim) {
    throw DimensionError("encoder expects dimension " + std::to_string(bank.dim) +
                         ", got " + std::to_string(seq.cols()));
  }
  EncoderTraceT<Scalar> local;
  EncoderTraceT<Scalar> &t = trace ? *trace : local;
  t.padded = PadSequence(seq, bank.width);
  t.pre.noalias() = WindowMatrix(t.padded, bank.width) * bank.filters.transpose();
  return t.pre.cwiseMax(Scalar(0)).colwise().sum().transpose();
}

// Accumulates d(upstream . v)/dM into `grad`. ReLU subgradient at 0 is 0.
template <typename Scalar>
void EncodeBackward(const FilterBankT<Scalar> &bank,
                    const EncoderTraceT<Scalar> &trace,
                    const Vector<Scalar> &upstream, RowMatrix<Scalar> *grad) {
  if (upstream.size() != bank.k()) throw DimensionError("upstream size != k");
  if (upstream.isZero(0)) return;
  const RowMatrix<Scalar> active =
      (trace.pre.array() > Scalar(0)).template cast<Scalar>().matrix() *
      upstream.asDiagonal();
  grad->noalias() += active.transpose() * WindowMatrix(trace.padded, bank.width);
}

constexpr double kCosineEpsilon = 1e-12;

// Cosine similarity; 0 when either norm is below kCosineEpsilon.
template <typename Scalar>
Scalar Cosine(const Vector<Scalar> &a, const Vector<Scalar> &b) {
  if (a.size() != b.size()) throw DimensionError("cosine of unequal sizes");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na < Scalar(kCosineEpsilon) || nb < Scalar(kCosineEpsilon)) return Scalar(0);
  return a.dot(b) / (na * nb);
}

// Adds upstream * d cos(a, b) / da and / db into `da` and `db`.
template <typename Scalar>
void CosineBackward(const Vector<Scalar> &a, const Vector<Scalar> &b,
                    Scalar upstream, Vector<Scalar> *da, Vector<Scalar> *db) {
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (upstream == Scalar(0) || na < Scalar(kCosineEpsilon) ||
      nb < Scalar(kCosineEpsilon)) {
    return;
  }
  const Scalar c = a.dot(b) / (na * nb);
  *da += upstream * (b / (na * nb) - c * a / (na * na));
  *db += upstream * (a / (na * nb) - c * b / (nb * nb));
}

// Embedded inputs of the three source views, in Granularity order.
template <typename Scalar>
using SourceInputsT = std::array<RowMatrix<Scalar>, kNumSourceViews>;
template <typename Scalar>
using TargetInputsT = std::array<RowMatrix<Scalar>, kNumTargetViews>;
using SourceInputs = SourceInputsT<double>;
using TargetInputs = TargetInputsT<double>;

template <typename Scalar, size_t N>
struct EncodingT {
  std::array<EncoderTraceT<Scalar>, N> traces;
  std::array<Vector<Scalar>, N> vectors;
};
using SourceEncoding = EncodingT<double, kNumSourceViews>;
using TargetEncoding = EncodingT<double, kNumTargetViews>;

template <typename Scalar>
EncodingT<Scalar, kNumSourceViews> EncodeSource(
    const CnnParamsT<Scalar> &params, const SourceInputsT<Scalar> &inputs) {
  EncodingT<Scalar, kNumSourceViews> enc;
  for (int s = 0; s < kNumSourceViews; ++s) {
    enc.vectors[s] = Encode(params.banks[s], inputs[s], &enc.traces[s]);
  }
  return enc;
}

template <typename Scalar>
EncodingT<Scalar, kNumTargetViews> EncodeTarget(
    const CnnParamsT<Scalar> &params, const TargetInputsT<Scalar> &inputs) {
  EncodingT<Scalar, kNumTargetViews> enc;
  for (int t = 0; t < kNumTargetViews; ++t) {
    enc.vectors[t] = Encode(params.banks[kNumSourceViews + t], inputs[t],
                            &enc.traces[t]);
  }
  return enc;
}

// The six source x target cosines.
template <typename Scalar>
DenseFeaturesT<Scalar> PairFeatures(
    const EncodingT<Scalar, kNumSourceViews> &source,
    const EncodingT<Scalar, kNumTargetViews> &target) {
  DenseFeaturesT<Scalar> f;
  for (int s = 0; s < kNumSourceViews; ++s) {
    for (int t = 0; t < kNumTargetViews; ++t) {
      f[PairIndex(s, t)] = Cosine(source.vectors[s], target.vectors[t]);
    }
  }
  return f;
}

// Backpropagates `upstream` (one weight per cosine) to the topic vectors,
// accumulating into the per-view gradients.
template <typename Scalar>
void PairFeaturesBackward(
    const EncodingT<Scalar, kNumSourceViews> &source,
    const EncodingT<Scalar, kNumTargetViews> &target,
    const DenseFeaturesT<Scalar> &upstream,
    std::array<Vector<Scalar>, kNumSourceViews> *source_grad,
    std::array<Vector<Scalar>, kNumTargetViews> *target_grad) {
  for (int s = 0; s < kNumSourceViews; ++s) {
    for (int t = 0; t < kNumTargetViews; ++t) {
      CosineBackward(source.vectors[s], target.vectors[t],
                     upstream[PairIndex(s, t)], &(*source_grad)[s],
                     &(*target_grad)[t]);
    }
  }
}

// Backpropagates topic-vector gradients through the encoders of one side.
// `first_bank` is 0 for the source side and kNumSourceViews for the target.
template <typename Scalar, size_t N>
void EncodingBackward(const CnnParamsT<Scalar> &params, int first_bank,
                      const EncodingT<Scalar, N> &encoding,
                      const std::array<Vector<Scalar>, N> &vector_grad,
                      CnnGradientT<Scalar> *grad) {
  for (size_t i = 0; i < N; ++i) {
    const int b = first_bank + static_cast<int>(i);
    EncodeBackward(params.banks[b], encoding.traces[i], vector_grad[i],
                   &grad->banks[b]);
  }
}

// Forward state of ExtractFc, consumed by Backward.
struct ForwardCache {
  const CnnParams *params = nullptr;
  uint64_t revision = 0;
  bool null_target = false;
  SourceEncoding source;
  TargetEncoding target;
};

SourceInputs EmbedSource(const EmbeddingTable &table,
                         const GranularityViews &views);
TargetInputs EmbedTarget(const EmbeddingTable &table, const TargetViews &views);

// Runs the five encoders and returns the six cosines. A null `target`
// stands for the NULL entity and yields all zeros.
DenseFeatures ExtractFc(const CnnParams &params, const GranularityViews &source,
                        const TargetViews *target, const EmbeddingTable &table,
                        ForwardCache *cache = nullptr);

// Gradient of upstream . f_C with respect to every filter bank. Raises
// UsageError if `cache` was not filled by ExtractFc with these parameters
// at their current revision.
CnnGradient Backward(const CnnParams &params, const ForwardCache &cache,
                     const DenseFeatures &upstream);

}  // namespace clink

#endif  // CLINK_CNN_H_

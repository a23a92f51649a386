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

#include "clink/cnn.h"

#include <string>

namespace clink {

namespace {
constexpr std::array<std::string_view, kNumBanks> kGranularityNames = {
    "src_mention", "src_context", "src_document", "tgt_title", "tgt_document"};
}  // namespace

std::string_view GranularityName(Granularity g) {
  return kGranularityNames[static_cast<size_t>(g)];
}

Granularity ParseGranularity(std::string_view name) {
  for (size_t i = 0; i < kGranularityNames.size(); ++i) {
    if (kGranularityNames[i] == name) return static_cast<Granularity>(i);
  }
  throw IndexError("unknown granularity '" + std::string(name) + "'");
}

CnnParams InitCnnParams(int k, int width, int dim, uint64_t seed) {
  if (k < 1 || width < 1 || dim < 1) {
    throw DimensionError("filter bank needs k, width, dim >= 1");
  }
  Rng rng(seed);
  const double a = std::sqrt(6.0 / (dim * width + k));
  CnnParams params;
  for (int b = 0; b < kNumBanks; ++b) {
    auto &bank = params.banks[b];
    bank.granularity = static_cast<Granularity>(b);
    bank.width = width;
    bank.dim = dim;
    bank.filters.resize(k, static_cast<Eigen::Index>(dim) * width);
    for (Eigen::Index i = 0; i < bank.filters.size(); ++i) {
      bank.filters.data()[i] = UniformReal(rng, -a, a);
    }
  }
  return params;
}

SourceInputs EmbedSource(const EmbeddingTable &table,
                         const GranularityViews &views) {
  return {LookupSequence(table, Surfaces(views.mention)),
          LookupSequence(table, Surfaces(views.context)),
          LookupSequence(table, Surfaces(views.document))};
}

TargetInputs EmbedTarget(const EmbeddingTable &table, const TargetViews &views) {
  return {LookupSequence(table, Surfaces(views.title)),
          LookupSequence(table, Surfaces(views.body))};
}

DenseFeatures ExtractFc(const CnnParams &params, const GranularityViews &source,
                        const TargetViews *target, const EmbeddingTable &table,
                        ForwardCache *cache) {
  ForwardCache local;
  ForwardCache &c = cache ? *cache : local;
  c.params = &params;
  c.revision = params.revision;
  c.null_target = target == nullptr;
  c.source = EncodeSource(params, EmbedSource(table, source));
  if (c.null_target) {
    c.target = TargetEncoding{};
    return DenseFeatures::Zero();
  }
  c.target = EncodeTarget(params, EmbedTarget(table, *target));
  return PairFeatures(c.source, c.target);
}

CnnGradient Backward(const CnnParams &params, const ForwardCache &cache,
                     const DenseFeatures &upstream) {
  if (cache.params != &params || cache.revision != params.revision) {
    throw UsageError("backward called without a forward pass on these parameters");
  }
  CnnGradient grad = CnnGradient::ZerosLike(params);
  if (cache.null_target) return grad;

  std::array<Vector<double>, kNumSourceViews> source_grad;
  std::array<Vector<double>, kNumTargetViews> target_grad;
  for (auto &g : source_grad) g = Vector<double>::Zero(params.k());
  for (auto &g : target_grad) g = Vector<double>::Zero(params.k());
  PairFeaturesBackward(cache.source, cache.target, upstream, &source_grad,
                       &target_grad);
  EncodingBackward(params, 0, cache.source, source_grad, &grad);
  EncodingBackward(params, kNumSourceViews, cache.target, target_grad, &grad);
  return grad;
}

}  // namespace clink

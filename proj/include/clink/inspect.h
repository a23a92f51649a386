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

#ifndef CLINK_INSPECT_H_
#define CLINK_INSPECT_H_

#include <span>
#include <string>
#include <vector>

#include "clink/cnn.h"
#include "clink/embeddings.h"
#include "clink/model.h"

namespace clink {

struct NgramActivation {
  std::string ngram;
  double activation;
};

// Top `top_n` corpus windows by the pre-pooling activation
// max(0, M[row] . window) of one filter, deduplicated by lowercased
// surface and sorted by activation (ties by n-gram). Windows with zero
// activation are dropped. Raises IndexError for an invalid row.
std::vector<NgramActivation> InspectFilter(const Model &model,
                                           const EmbeddingTable &table,
                                           std::span<const Document> corpus,
                                           Granularity bank, int row, int top_n);

}  // namespace clink

#endif  // CLINK_INSPECT_H_

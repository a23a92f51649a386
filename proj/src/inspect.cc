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

#include "clink/inspect.h"

#include <algorithm>
#include <unordered_map>

namespace clink {

std::vector<NgramActivation> InspectFilter(const Model &model,
                                           const EmbeddingTable &table,
                                           std::span<const Document> corpus,
                                           Granularity bank, int row, int top_n) {
  const FilterBank &fb = model.cnn.bank(bank);
  if (row < 0 || row >= fb.k()) {
    throw IndexError("filter row " + std::to_string(row) + " out of range [0, " +
                     std::to_string(fb.k()) + ")");
  }
  const Vector<double> filter = fb.filters.row(row).transpose();

  std::unordered_map<std::string, double> best;
  for (const auto &doc : corpus) {
    const std::vector<std::string> surfaces = Surfaces(doc.tokens);
    const RowMatrixXd padded = PadSequence(LookupSequence(table, surfaces), fb.width);
    const Eigen::VectorXd act = WindowMatrix(padded, fb.width) * filter;
    const Eigen::Index left =
        static_cast<Eigen::Index>(surfaces.size()) < fb.width
            ? (fb.width - static_cast<Eigen::Index>(surfaces.size())) / 2
            : 0;
    for (Eigen::Index j = 0; j < act.size(); ++j) {
      if (act[j] <= 0.0) continue;
      std::string ngram;
      for (Eigen::Index p = j; p < j + fb.width; ++p) {
        const Eigen::Index src = p - left;
        if (src < 0 || src >= static_cast<Eigen::Index>(surfaces.size())) continue;
        if (!ngram.empty()) ngram.push_back(' ');
        ngram += ToLower(surfaces[static_cast<size_t>(src)]);
      }
      auto [it, inserted] = best.emplace(std::move(ngram), act[j]);
      if (!inserted) it->second = std::max(it->second, act[j]);
    }
  }

  std::vector<NgramActivation> out;
  out.reserve(best.size());
  for (auto &[ngram, a] : best) out.push_back({ngram, a});
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
    if (a.activation != b.activation) return a.activation > b.activation;
    return a.ngram < b.ngram;
  });
  if (static_cast<int>(out.size()) > top_n) out.resize(static_cast<size_t>(std::max(0, top_n)));
  return out;
}

}  // namespace clink

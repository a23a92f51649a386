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

#ifndef CLINK_EVAL_H_
#define CLINK_EVAL_H_

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clink/corpus.h"
#include "clink/model.h"

namespace clink {

// Accuracy of one configuration. Every gold-annotated mention counts;
// mentions whose gold entity is not a candidate are scored as errors.
struct EvalRow {
  std::string config;
  size_t mentions = 0;
  size_t correct = 0;
  size_t in_candidates = 0;
  double accuracy = 0.0;
  double gold_recall = 0.0;
  double mean_queries = 0.0;
  // Gold ids absent from the KB and predictions naming unknown mentions.
  std::vector<std::string> mismatches;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

// One JSON object per line with fixed field names.
std::string ToJsonLine(const EvalRow &row);
void WriteReport(const EvalReport &report, std::ostream &out);

// Top-ranked entity for a prepared mention.
using Predictor = std::function<EntityIndex(const MentionInstance &)>;

// Scores `predict` over the gold-annotated instances.
EvalRow Evaluate(std::span<const MentionInstance> instances,
                 const KnowledgeBase &kb, const Predictor &predict,
                 std::string config_name);

// Prepares and links every mention of `corpus` with the model's own
// feature configuration. `threads` > 1 fans out across mentions; results
// are merged in corpus order.
EvalRow EvaluateModel(const Model &model, const LinkingContext &context,
                      std::span<const Document> corpus, int threads = 1,
                      std::string config_name = "");

// Scores `link` output against the gold annotations of `corpus`.
EvalRow ScorePredictions(std::span<const Prediction> predictions,
                         std::span<const Document> corpus,
                         const KnowledgeBase &kb, std::string config_name);

// One trained configuration of an ablation table.
struct AblationConfig {
  std::string name;
  FeatureMode mode = FeatureMode::kFull;
  PairMask pairs = kAllPairs;
};

// "full", "sparse-only", "cnn-only", or "pairs:<p>[,<p>...]" where each
// <p> is one of ment-title, ment-doc, context-title, context-doc,
// doc-title, doc-doc. A pair subset trains the CNN-only system restricted
// to those cosines. Raises UsageError.
AblationConfig ParseAblationConfig(std::string_view spec);
std::string_view PairName(int pair);

// full, sparse-only, cnn-only, pairs:doc-doc, pairs:ment-title.
std::vector<AblationConfig> StandardAblations();

struct AblationResult {
  AblationConfig config;
  TrainingReport training;
  EvalRow eval;
};

// Trains one model per configuration from `base` (same seed) and
// evaluates it on `test`.
std::vector<AblationResult> RunAblations(
    const ModelConfig &base, const KnowledgeBase &kb,
    const EmbeddingTable &table, std::span<const Document> train,
    std::span<const Document> test, std::span<const AblationConfig> configs,
    const TrainOptions &options, int threads = 1);

}  // namespace clink

#endif  // CLINK_EVAL_H_

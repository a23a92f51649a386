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

#include "clink/eval.h"

#include <algorithm>
#include <array>
#include <map>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include "json.hpp"

namespace clink {

namespace {

constexpr std::array<std::string_view, kNumPairs> kPairNames = {
    "ment-title", "ment-doc", "context-title", "context-doc", "doc-title", "doc-doc"};

EntityIndex GoldIndex(const KnowledgeBase &kb, const std::string &gold) {
  return gold == "NIL" ? kNullEntity : kb.Find(gold);
}

void Finish(EvalRow *row) {
  if (row->mentions > 0) {
    const auto n = static_cast<double>(row->mentions);
    row->accuracy = static_cast<double>(row->correct) / n;
    row->gold_recall = static_cast<double>(row->in_candidates) / n;
  }
}

}  // namespace

std::string_view PairName(int pair) { return kPairNames[static_cast<size_t>(pair)]; }

std::string ToJsonLine(const EvalRow &row) {
  nlohmann::json j;
  j["config"] = row.config;
  j["mentions"] = row.mentions;
  j["correct"] = row.correct;
  j["in_candidates"] = row.in_candidates;
  j["accuracy"] = row.accuracy;
  j["gold_recall"] = row.gold_recall;
  j["mean_queries"] = row.mean_queries;
  j["mismatches"] = row.mismatches;
  return j.dump();
}

void WriteReport(const EvalReport &report, std::ostream &out) {
  for (const auto &row : report.rows) out << ToJsonLine(row) << '\n';
}

EvalRow Evaluate(std::span<const MentionInstance> instances,
                 const KnowledgeBase &kb, const Predictor &predict,
                 std::string config_name) {
  EvalRow row;
  row.config = std::move(config_name);
  double queries = 0.0;
  for (const auto &inst : instances) {
    if (!inst.has_gold_annotation()) continue;
    ++row.mentions;
    queries += static_cast<double>(inst.num_queries());
    const EntityIndex gold = GoldIndex(kb, *inst.mention.gold_entity);
    if (gold == kNullEntity && *inst.mention.gold_entity != "NIL") {
      row.mismatches.push_back(*inst.mention.gold_entity);
      continue;
    }
    if (inst.gold < 0) continue;
    ++row.in_candidates;
    if (predict(inst) == gold) ++row.correct;
  }
  if (row.mentions > 0) row.mean_queries = queries / static_cast<double>(row.mentions);
  Finish(&row);
  return row;
}

EvalRow EvaluateModel(const Model &model, const LinkingContext &context,
                      std::span<const Document> corpus, int threads,
                      std::string config_name) {
  struct Item {
    const Document *doc;
    const Mention *mention;
  };
  std::vector<Item> items;
  for (const auto &doc : corpus) {
    for (const auto &m : doc.mentions) {
      if (m.gold_entity) items.push_back({&doc, &m});
    }
  }

  // Per-mention outcome: bit 0 = gold in candidates, bit 1 = correct.
  std::vector<uint8_t> outcome(items.size(), 0);
  std::vector<size_t> queries(items.size(), 0);
  std::vector<char> unknown(items.size(), 0);
  const KnowledgeBase &kb = context.kb();
  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const MentionInstance inst =
          PrepareMention(model, context, *items[i].doc, *items[i].mention);
      queries[i] = inst.num_queries();
      const std::string &gold_id = *items[i].mention->gold_entity;
      const EntityIndex gold = GoldIndex(kb, gold_id);
      if (gold == kNullEntity && gold_id != "NIL") {
        unknown[i] = 1;
        continue;
      }
      if (inst.gold < 0) continue;
      outcome[i] = 1;
      if (Infer(model, context, inst).front().entity == gold) outcome[i] |= 2;
    }
  };
  const size_t n_threads =
      std::clamp<size_t>(static_cast<size_t>(std::max(1, threads)), 1,
                         std::max<size_t>(1, items.size()));
  if (n_threads == 1) {
    work(0, items.size());
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (items.size() + n_threads - 1) / n_threads;
    for (size_t t = 0; t < n_threads; ++t) {
      const size_t begin = std::min(items.size(), t * chunk);
      const size_t end = std::min(items.size(), begin + chunk);
      pool.emplace_back(work, begin, end);
    }
    for (auto &th : pool) th.join();
  }

  EvalRow row;
  row.config = config_name.empty() ? std::string(FeatureModeName(model.config.mode))
                                   : std::move(config_name);
  row.mentions = items.size();
  double total_queries = 0.0;
  for (size_t i = 0; i < items.size(); ++i) {
    total_queries += static_cast<double>(queries[i]);
    if (unknown[i]) row.mismatches.push_back(*items[i].mention->gold_entity);
    if (outcome[i] & 1) ++row.in_candidates;
    if (outcome[i] & 2) ++row.correct;
  }
  if (!items.empty()) row.mean_queries = total_queries / static_cast<double>(items.size());
  Finish(&row);
  return row;
}

EvalRow ScorePredictions(std::span<const Prediction> predictions,
                         std::span<const Document> corpus,
                         const KnowledgeBase &kb, std::string config_name) {
  std::map<std::tuple<std::string, int, int>, const Prediction *> by_span;
  for (const auto &p : predictions) by_span[{p.doc_id, p.start, p.end}] = &p;

  EvalRow row;
  row.config = std::move(config_name);
  size_t matched = 0;
  for (const auto &doc : corpus) {
    for (const auto &m : doc.mentions) {
      if (!m.gold_entity) continue;
      ++row.mentions;
      auto it = by_span.find({doc.doc_id, m.start, m.end});
      if (it == by_span.end()) continue;
      ++matched;
      const bool gold_nil = *m.gold_entity == "NIL";
      if (!gold_nil && kb.Find(*m.gold_entity) == kNullEntity) {
        row.mismatches.push_back(*m.gold_entity);
        continue;
      }
      const auto &entity = it->second->entity;
      const bool correct = gold_nil ? !entity.has_value()
                                    : (entity && *entity == *m.gold_entity);
      if (correct) ++row.correct;
    }
  }
  // Without candidate sets, recall is reported as prediction coverage.
  row.in_candidates = matched;
  std::set<std::tuple<std::string, int, int>> spans;
  for (const auto &doc : corpus) {
    for (const auto &m : doc.mentions) spans.insert({doc.doc_id, m.start, m.end});
  }
  for (const auto &p : predictions) {
    if (!spans.contains({p.doc_id, p.start, p.end})) {
      row.mismatches.push_back(p.doc_id + ":" + std::to_string(p.start) + "-" +
                               std::to_string(p.end));
    }
  }
  Finish(&row);
  return row;
}

AblationConfig ParseAblationConfig(std::string_view spec) {
  if (spec == "full") return {"full", FeatureMode::kFull, kAllPairs};
  if (spec == "sparse-only") return {"sparse-only", FeatureMode::kSparseOnly, kAllPairs};
  if (spec == "cnn-only") return {"cnn-only", FeatureMode::kCnnOnly, kAllPairs};
  constexpr std::string_view kPrefix = "pairs:";
  if (spec.starts_with(kPrefix)) {
    PairMask mask = 0;
    std::string_view rest = spec.substr(kPrefix.size());
    while (!rest.empty()) {
      const size_t comma = rest.find(',');
      const std::string_view name = rest.substr(0, comma);
      auto it = std::find(kPairNames.begin(), kPairNames.end(), name);
      if (it == kPairNames.end()) {
        throw UsageError("unknown cosine pair '" + std::string(name) + "'");
      }
      mask |= static_cast<PairMask>(1u << (it - kPairNames.begin()));
      rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    }
    if (mask == 0) throw UsageError("empty pair subset");
    return {std::string(spec), FeatureMode::kCnnOnly, mask};
  }
  throw UsageError("unknown configuration '" + std::string(spec) + "'");
}

std::vector<AblationConfig> StandardAblations() {
  return {ParseAblationConfig("full"), ParseAblationConfig("sparse-only"),
          ParseAblationConfig("cnn-only"), ParseAblationConfig("pairs:doc-doc"),
          ParseAblationConfig("pairs:ment-title")};
}

std::vector<AblationResult> RunAblations(
    const ModelConfig &base, const KnowledgeBase &kb,
    const EmbeddingTable &table, std::span<const Document> train,
    std::span<const Document> test, std::span<const AblationConfig> configs,
    const TrainOptions &options, int threads) {
  const LinkingContext context(kb, table, base.views);
  std::vector<AblationResult> results;
  for (const auto &ac : configs) {
    ModelConfig config = base;
    config.mode = ac.mode;
    config.pairs = ac.pairs;
    Model model = Model::Create(config);
    AblationResult result;
    result.config = ac;
    result.training = Train(&model, context, train, options);
    result.eval = EvaluateModel(model, context, test, threads, ac.name);
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace clink

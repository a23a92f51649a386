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


#include <set>
#include <sstream>

#include "clink/eval.h"
#include "clink/inspect.h"
#include "clink/synthetic.h"
#include "doctest.h"
#include "test_util.h"

namespace clink {
namespace {

SyntheticSpec SmallSpec() {
  SyntheticSpec spec;
  spec.n_entities = 12;
  spec.vocab_per_topic = 20;
  spec.noise_vocab = 20;
  spec.train_mentions = 150;
  spec.test_mentions = 60;
  spec.segment_length = 14;
  spec.article_length = 24;
  spec.dim = 8;
  return spec;
}

struct World {
  explicit World(const SyntheticSpec &spec) : data(GenerateSynthetic(spec)) {
    kb = KnowledgeBase::Ingest(data.articles, data.anchors);
    config.k = 4;
    config.width = 3;
    config.dim = spec.dim;
    config.views.context_window = 5;
    context = std::make_unique<LinkingContext>(kb, data.embeddings, config.views);
  }
  std::vector<MentionInstance> Instances(const std::vector<Document> &docs) {
    FeatureVocabulary vocab = FeatureVocabulary::Interned();
    return PrepareCorpus(config, &vocab, true, *context, docs);
  }
  SyntheticData data;
  KnowledgeBase kb;
  ModelConfig config;
  std::unique_ptr<LinkingContext> context;
};

std::string DirContents(const std::string &dir) {
  std::string all;
  for (const char *name : {"articles.jsonl", "anchors.jsonl", "train.jsonl", "test.jsonl",
                           "embeddings.txt", "topics.tsv"}) {
    all += name;
    all += '\n';
    all += testing::Slurp(dir + "/" + name);
  }
  return all;
}

TEST_CASE("always NULL scores zero without NIL golds") {
  World w(SmallSpec());
  const auto inst = w.Instances(w.data.test);
  const EvalRow row = Evaluate(inst, w.kb, [](const MentionInstance &) { return kNullEntity; },
                               "null");
  CHECK(row.mentions == 60);
  CHECK(row.correct == 0);
  CHECK(row.accuracy == 0.0);
  CHECK(row.mismatches.empty());
}

TEST_CASE("an oracle predictor reaches gold recall") {
  World w(SmallSpec());
  const auto inst = w.Instances(w.data.test);
  const EvalRow row = Evaluate(
      inst, w.kb,
      [](const MentionInstance &m) {
        return m.gold >= 0 ? m.candidates.candidates[static_cast<size_t>(m.gold)]
                           : kNullEntity;
      },
      "oracle");
  CHECK(row.accuracy == row.gold_recall);
  CHECK(row.gold_recall > 0.9);
  CHECK(row.mean_queries >= 1.0);
}

TEST_CASE("unknown gold ids are listed, not fatal") {
  World w(SmallSpec());
  auto docs = w.data.test;
  docs[0].mentions[0].gold_entity = "nowhere";
  const auto inst = w.Instances(docs);
  const EvalRow row = Evaluate(inst, w.kb, [](const MentionInstance &) { return 0; }, "x");
  REQUIRE(row.mismatches.size() == 1);
  CHECK(row.mismatches[0] == "nowhere");
  CHECK(row.mentions == 60);

  const Model model = Model::Create(w.config);
  const EvalRow m = EvaluateModel(model, *w.context, docs);
  CHECK(m.mismatches == std::vector<std::string>{"nowhere"});
}

TEST_CASE("model evaluation is deterministic and thread independent") {
  World w(SmallSpec());
  Model model = Model::Create(w.config);
  TrainOptions options;
  options.epochs = 2;
  Train(&model, *w.context, w.data.train, options);
  const EvalRow a = EvaluateModel(model, *w.context, w.data.test, 1);
  const EvalRow b = EvaluateModel(model, *w.context, w.data.test, 3);
  CHECK(ToJsonLine(a) == ToJsonLine(b));
  CHECK(a.config == "full");
  CHECK(0.0 <= a.accuracy);
  CHECK(a.accuracy <= a.gold_recall);
  CHECK(a.gold_recall <= 1.0);

  // Consistent with the instance-level harness.
  const auto inst = w.Instances(w.data.test);
  const EvalRow c = Evaluate(
      inst, w.kb,
      [&](const MentionInstance &) { return kNullEntity; }, "");
  CHECK(c.in_candidates == a.in_candidates);
}

TEST_CASE("accuracy never exceeds gold recall") {
  World w(SmallSpec());
  const auto inst = w.Instances(w.data.test);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const EvalRow row = Evaluate(
        inst, w.kb,
        [&](const MentionInstance &m) {
          return m.candidates.candidates[UniformIndex(rng, m.num_candidates())];
        },
        "random");
    REQUIRE(row.accuracy <= row.gold_recall);
  }
}

TEST_CASE("prediction files are scored by span") {
  World w(SmallSpec());
  std::vector<Prediction> preds;
  for (const auto &doc : w.data.test) {
    for (const auto &m : doc.mentions) {
      preds.push_back({doc.doc_id, m.start, m.end, m.gold_entity, 1.0});
    }
  }
  preds[1].entity = std::nullopt;
  preds.push_back({"ghost", 0, 1, "E0", 0.5});
  std::stringstream io;
  for (const auto &p : preds) WritePrediction(p, io);
  const auto back = ReadPredictions(io);
  const EvalRow row = ScorePredictions(back, w.data.test, w.kb, "file");
  CHECK(row.mentions == 60);
  CHECK(row.correct == 59);
  CHECK(row.in_candidates == 60);
  CHECK(row.mismatches == std::vector<std::string>{"ghost:0-1"});

  const EvalRow half = ScorePredictions(std::span(back).first(30), w.data.test, w.kb, "half");
  CHECK(half.correct == 29);
  CHECK(half.accuracy == doctest::Approx(29.0 / 60.0));
}

TEST_CASE("report lines are JSON with fixed fields") {
  EvalRow row;
  row.config = "pairs:doc-doc";
  row.mentions = 4;
  row.correct = 1;
  row.accuracy = 0.25;
  const std::string line = ToJsonLine(row);
  for (const char *field : {"\"config\"", "\"mentions\"", "\"correct\"", "\"in_candidates\"",
                            "\"accuracy\"", "\"gold_recall\"", "\"mean_queries\"",
                            "\"mismatches\""}) {
    CHECK(line.find(field) != std::string::npos);
  }
  std::ostringstream out;
  WriteReport({{row, row}}, out);
  CHECK(out.str() == line + "\n" + line + "\n");
}

TEST_CASE("ablation config names") {
  CHECK(ParseAblationConfig("full").mode == FeatureMode::kFull);
  CHECK(ParseAblationConfig("sparse-only").mode == FeatureMode::kSparseOnly);
  CHECK(ParseAblationConfig("cnn-only").pairs == kAllPairs);
  const AblationConfig p = ParseAblationConfig("pairs:doc-doc,ment-title");
  CHECK(p.mode == FeatureMode::kCnnOnly);
  CHECK(p.pairs == ((1u << PairIndex(0, 0)) | (1u << PairIndex(2, 1))));
  CHECK(p.name == "pairs:doc-doc,ment-title");
  for (int i = 0; i < kNumPairs; ++i) {
    CHECK(ParseAblationConfig("pairs:" + std::string(PairName(i))).pairs == (1u << i));
  }
  CHECK_THROWS_AS(ParseAblationConfig("pairs:"), UsageError);
  CHECK_THROWS_AS(ParseAblationConfig("pairs:doc-ment"), UsageError);
  CHECK_THROWS_AS(ParseAblationConfig("dense"), UsageError);
  CHECK(StandardAblations().size() == 5);
}

TEST_CASE("ablations train each configuration separately") {
  const SyntheticSpec spec = SmallSpec();
  World w(spec);
  const std::vector<AblationConfig> configs = {ParseAblationConfig("sparse-only"),
                                               ParseAblationConfig("pairs:doc-doc")};
  TrainOptions options;
  options.epochs = 1;
  const auto results = RunAblations(w.config, w.kb, w.data.embeddings, w.data.train,
                                    w.data.test, configs, options);
  REQUIRE(results.size() == 2);
  CHECK(results[0].eval.config == "sparse-only");
  CHECK(results[1].eval.config == "pairs:doc-doc");
  CHECK(results[0].training.epochs.size() == 1);
  for (const auto &r : results) CHECK(r.eval.accuracy <= r.eval.gold_recall);
}

TEST_CASE("synthetic generation is deterministic") {
  const SyntheticSpec spec = SmallSpec();
  testing::TempDir a, b;
  WriteSynthetic(GenerateSynthetic(spec), a.path());
  WriteSynthetic(GenerateSynthetic(spec), b.path());
  CHECK(DirContents(a.path()) == DirContents(b.path()));

  SyntheticSpec other = spec;
  other.seed = 8;
  testing::TempDir c;
  WriteSynthetic(GenerateSynthetic(other), c.path());
  CHECK(DirContents(a.path()) != DirContents(c.path()));

  const auto topics = ReadTopicMap(a.file("topics.tsv"));
  CHECK(topics == GenerateSynthetic(spec).word_topic);
}

TEST_CASE("synthetic corpus structure") {
  const SyntheticSpec spec = SmallSpec();
  const SyntheticData data = GenerateSynthetic(spec);
  CHECK(data.articles.size() == 12);
  size_t train = 0, test = 0;
  for (const auto &d : data.train) train += d.mentions.size();
  for (const auto &d : data.test) test += d.mentions.size();
  CHECK(train == 150);
  CHECK(test == 60);

  // Topic vocabularies are disjoint by construction of the map.
  std::set<int> topics;
  for (const auto &[word, topic] : data.word_topic) topics.insert(topic);
  CHECK(topics == std::set<int>{0, 1, 2, 3});

  // Every article body draws its topical words from a single topic.
  for (const auto &a : data.articles) {
    std::set<int> seen;
    for (const auto &tok : Tokenize(a.body)) {
      auto it = data.word_topic.find(ToLower(tok.surface));
      if (it != data.word_topic.end()) seen.insert(it->second);
    }
    CHECK(seen.size() == 1);
  }

  // Every mention has a gold entity from the KB.
  const KnowledgeBase kb = KnowledgeBase::Ingest(data.articles, data.anchors);
  for (const auto *split : {&data.train, &data.test}) {
    for (const auto &d : *split) {
      for (const auto &m : d.mentions) {
        REQUIRE(m.gold_entity);
        CHECK(kb.Find(*m.gold_entity) != kNullEntity);
      }
    }
  }
}

TEST_CASE("the anchor prior is misleading for a controlled fraction") {
  SyntheticSpec spec = SmallSpec();
  spec.train_mentions = 800;
  spec.test_mentions = 0;
  spec.test_group_fraction = 0.0;
  spec.context_free_fraction = 0.0;
  const SyntheticData data = GenerateSynthetic(spec);
  const KnowledgeBase kb = KnowledgeBase::Ingest(data.articles, data.anchors);
  size_t total = 0, prior_right = 0;
  for (const auto &d : data.train) {
    for (const auto &m : d.mentions) {
      // The surname is the one token with an ambiguous anchor.
      std::span<const AnchorLink> links;
      for (int i = m.start; i < m.end; ++i) {
        std::string word = ToLower(d.tokens[static_cast<size_t>(i)].surface);
        if (kb.Links(word).size() < 2 && word.ends_with('s')) word.pop_back();
        if (kb.Links(word).size() >= 2) links = kb.Links(word);
      }
      if (links.size() < 2) continue;
      ++total;
      if (kb.entity(links[0].entity).id == *m.gold_entity) ++prior_right;
    }
  }
  REQUIRE(total > 400);
  const double wrong = 1.0 - static_cast<double>(prior_right) / static_cast<double>(total);
  CHECK(wrong == doctest::Approx(spec.misleading_prior_fraction).epsilon(0.2));
}

TEST_CASE("infeasible specs are rejected") {
  SyntheticSpec spec = SmallSpec();
  spec.mention_ambiguity = 13;
  CHECK_THROWS_AS(GenerateSynthetic(spec), SpecError);
  spec = SmallSpec();
  spec.n_topics = 0;
  CHECK_THROWS_AS(ValidateSyntheticSpec(spec), SpecError);
  spec = SmallSpec();
  spec.test_group_fraction = 1.0;
  CHECK_THROWS_AS(ValidateSyntheticSpec(spec), SpecError);
  spec = SmallSpec();
  spec.misleading_prior_fraction = 1.5;
  CHECK_THROWS_AS(ValidateSyntheticSpec(spec), SpecError);
  spec = SmallSpec();
  spec.dim = 0;
  CHECK_THROWS_AS(ValidateSyntheticSpec(spec), SpecError);
}

TEST_CASE("without ambiguity the prior alone reaches gold recall") {
  SyntheticSpec spec = SmallSpec();
  spec.mention_ambiguity = 1;
  spec.misleading_prior_fraction = 0.0;
  World w(spec);
  ModelConfig config = w.config;
  config.mode = FeatureMode::kSparseOnly;
  Model model = Model::Create(config);
  TrainOptions options;
  options.epochs = 3;
  Train(&model, *w.context, w.data.train, options);
  const EvalRow row = EvaluateModel(model, *w.context, w.data.test);
  CHECK(row.gold_recall > 0.9);
  CHECK(row.accuracy == row.gold_recall);
}

TEST_CASE("filter inspection") {
  World w(SmallSpec());
  Model model = Model::Create(w.config);
  const auto bank = Granularity::kSrcDocument;
  auto &filters = model.cnn.bank(bank).filters;

  filters.row(0).setZero();
  CHECK(InspectFilter(model, w.data.embeddings, w.data.train, bank, 0, 10).empty());
  CHECK_THROWS_AS(InspectFilter(model, w.data.embeddings, w.data.train, bank, 4, 10), IndexError);
  CHECK_THROWS_AS(InspectFilter(model, w.data.embeddings, w.data.train, bank, -1, 10), IndexError);

  // A filter that only sees the first word of a window.
  const std::string word = w.data.vocabulary[0].word;
  const auto v = w.data.embeddings.Lookup(word);
  filters.row(1).setZero();
  filters.row(1).head(v.size()) = v.transpose();
  const auto all = InspectFilter(model, w.data.embeddings, w.data.train, bank, 1, 1 << 20);
  const auto top = InspectFilter(model, w.data.embeddings, w.data.train, bank, 1, 5);
  REQUIRE(all.size() > 5);
  CHECK(top.size() == 5);
  for (size_t i = 0; i < 5; ++i) CHECK(top[i].ngram == all[i].ngram);
  std::set<std::string> unique;
  for (size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].activation > 0.0);
    if (i > 0) CHECK(all[i - 1].activation >= all[i].activation);
    unique.insert(all[i].ngram);
  }
  CHECK(unique.size() == all.size());
  CHECK(all[0].ngram.rfind(word + " ", 0) == 0);
}

}  // namespace
}  // namespace clink

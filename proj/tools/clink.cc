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

// Command-line entry point: KB ingestion, training, evaluation, linking,
// filter inspection, ablation tables and synthetic data generation.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clink/corpus.h"
#include "clink/embeddings.h"
#include "clink/eval.h"
#include "clink/inspect.h"
#include "clink/kb.h"
#include "clink/model.h"
#include "clink/synthetic.h"

namespace {

using namespace clink;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct EmbeddingFlags {
  std::string path;
  std::string format = "text";

  void Register(CLI::App *app) {
    app->add_option("--embeddings", path, "Word vectors in word2vec format")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--embeddings-format", format, "text or binary")
        ->check(CLI::IsMember({"text", "binary"}));
  }

  EmbeddingTable Load() const {
    return LoadWord2Vec(path, format == "binary" ? Word2VecFormat::kBinary
                                                : Word2VecFormat::kText);
  }
};

struct HyperFlags {
  int k = 150;
  int width = 5;
  int context_window = 10;
  int doc_cap = 2000;
  int top_k = 30;
  int max_depth = 3;
  double rho = 0.95;
  double epsilon = 1e-6;
  double l2 = 0.0;
  double dense_init = 0.0;
  std::string vocab = "hashed";
  uint32_t capacity = FeatureVocabulary::kDefaultCapacity;

  void Register(CLI::App *app) {
    app->add_option("--k", k, "Filters per bank")->check(CLI::Range(1, 100000));
    app->add_option("--width", width, "Filter width in tokens")->check(CLI::Range(1, 100));
    app->add_option("--context-window", context_window, "Context tokens on each side")
        ->check(CLI::Range(0, 100000));
    app->add_option("--doc-cap", doc_cap, "Maximum document tokens")
        ->check(CLI::Range(1, 10000000));
    app->add_option("--top-k", top_k, "Candidates per query")->check(CLI::Range(1, 100000));
    app->add_option("--query-depth", max_depth, "Composed query edits")
        ->check(CLI::Range(0, 6));
    app->add_option("--rho", rho, "Adadelta decay")->check(CLI::Range(0.0, 1.0));
    app->add_option("--eps", epsilon, "Adadelta epsilon")->check(CLI::PositiveNumber);
    app->add_option("--l2", l2, "L2 penalty")->check(CLI::NonNegativeNumber);
    app->add_option("--dense-init", dense_init, "Initial dense weights");
    app->add_option("--vocab", vocab, "Feature vocabulary: hashed or interned")
        ->check(CLI::IsMember({"hashed", "interned"}));
    app->add_option("--hash-capacity", capacity, "Feature vocabulary capacity")
        ->check(CLI::Range(1u, 1u << 28));
  }

  ModelConfig ToConfig(int dim, uint64_t seed) const {
    ModelConfig c;
    c.k = k;
    c.width = width;
    c.dim = dim;
    c.views.context_window = context_window;
    c.views.doc_cap = doc_cap;
    c.top_k = top_k;
    c.queries.max_depth = max_depth;
    c.rho = rho;
    c.epsilon = epsilon;
    c.l2 = l2;
    c.dense_init = dense_init;
    c.seed = seed;
    return c;
  }

  FeatureVocabulary MakeVocab() const {
    return vocab == "interned" ? FeatureVocabulary::Interned(capacity)
                               : FeatureVocabulary::Hashed(capacity);
  }
};

constexpr const char *kConfigHelp =
    "Feature configuration: full, sparse-only, cnn-only, or "
    "pairs:<p>[,<p>...] with <p> in ment-title, ment-doc, context-title, "
    "context-doc, doc-title, doc-doc (CNN-only restricted to those cosines)";

std::vector<Document> LoadCorpus(const std::string &path) {
  return ReadCorpusFile(path);
}

template <typename Record, typename Reader>
std::vector<Record> ReadLines(const std::string &path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return reader(in);
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

// Writes to `path`, or standard output when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string &path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*file_) throw Error("cannot write " + path);
    }
  }
  std::ostream &stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void ApplyConfig(const std::string &spec, ModelConfig *config) {
  const AblationConfig ac = ParseAblationConfig(spec);
  config->mode = ac.mode;
  config->pairs = ac.pairs;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Entity linking with convolutional semantic similarity features"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Progress on standard error");

  // ingest-kb
  auto *ingest = app.add_subcommand("ingest-kb", "Build the binary KB index");
  std::string articles_path, anchors_path, kb_out;
  ingest->add_option("--articles", articles_path, "Article records (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("--anchors", anchors_path, "Anchor records (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("--out", kb_out, "Output KB index")->required();

  // gen-synthetic
  auto *gen = app.add_subcommand("gen-synthetic", "Write a synthetic corpus, KB and vectors");
  SyntheticSpec spec;
  std::string gen_out;
  gen->add_option("--seed", spec.seed, "Random seed");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--topics", spec.n_topics, "Number of topics");
  gen->add_option("--vocab-per-topic", spec.vocab_per_topic, "Words per topic");
  gen->add_option("--entities", spec.n_entities, "Number of entities");
  gen->add_option("--ambiguity", spec.mention_ambiguity, "Entities per surface form");
  gen->add_option("--train-mentions", spec.train_mentions, "Training mentions");
  gen->add_option("--test-mentions", spec.test_mentions, "Test mentions");
  gen->add_option("--test-group-fraction", spec.test_group_fraction,
                  "Fraction of surname groups reserved for the test split");
  gen->add_option("--misleading-prior", spec.misleading_prior_fraction,
                  "Fraction of mentions whose most-linked candidate is wrong");
  gen->add_option("--context-free", spec.context_free_fraction,
                  "Fraction of mentions without topical context");
  gen->add_option("--dim", spec.dim, "Embedding dimension");

  // train
  auto *train = app.add_subcommand("train", "Train a model");
  EmbeddingFlags train_emb;
  HyperFlags hyper;
  std::string kb_path, corpus_path, model_out, train_config = "full";
  int epochs = 10;
  uint64_t seed = 1;
  train->add_option("--kb", kb_path, "KB index from ingest-kb")->required()->check(CLI::ExistingFile);
  train_emb.Register(train);
  train->add_option("--corpus", corpus_path, "Training corpus (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out", model_out, "Output model file")->required();
  train->add_option("--epochs", epochs, "Training epochs")->check(CLI::Range(0, 100000));
  train->add_option("--seed", seed, "Random seed (initialization and shuffling)");
  train->add_option("--config", train_config, kConfigHelp);
  hyper.Register(train);

  // evaluate
  auto *evaluate = app.add_subcommand("evaluate", "Accuracy report");
  EmbeddingFlags eval_emb;
  std::string model_path, predictions_path, report_out, eval_config;
  int threads = 1;
  evaluate->add_option("--kb", kb_path, "KB index")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--corpus", corpus_path, "Gold corpus (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  auto *eval_model = evaluate->add_option("--model", model_path, "Model file")
                         ->check(CLI::ExistingFile);
  auto *eval_preds =
      evaluate->add_option("--predictions", predictions_path, "Output of `link` to score")
          ->check(CLI::ExistingFile);
  eval_model->excludes(eval_preds);
  evaluate->add_option("--embeddings", eval_emb.path, "Word vectors (with --model)")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--embeddings-format", eval_emb.format, "text or binary")
      ->check(CLI::IsMember({"text", "binary"}));
  evaluate->add_option("--config", eval_config,
                       std::string(kConfigHelp) + "; overrides the model's own");
  evaluate->add_option("--out", report_out, "Report path (default stdout)");
  evaluate->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

  // link
  auto *link = app.add_subcommand("link", "Link the mentions of a corpus");
  EmbeddingFlags link_emb;
  std::string link_out;
  link->add_option("--kb", kb_path, "KB index")->required()->check(CLI::ExistingFile);
  link_emb.Register(link);
  link->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  link->add_option("--corpus", corpus_path, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
  link->add_option("--out", link_out, "Predictions path (default stdout)");

  // inspect-filters
  auto *inspect = app.add_subcommand("inspect-filters", "Top n-grams of a filter");
  EmbeddingFlags inspect_emb;
  std::string bank_name = "src_document";
  int row = 0, top_n = 10;
  inspect->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  inspect_emb.Register(inspect);
  inspect->add_option("--corpus", corpus_path, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
  inspect->add_option("--bank", bank_name,
                      "src_mention, src_context, src_document, tgt_title or tgt_document");
  inspect->add_option("--row", row, "Filter row")->check(CLI::NonNegativeNumber);
  auto *all_rows = inspect->add_flag("--all-rows", "Inspect every row of the bank");
  all_rows->excludes(inspect->get_option("--row"));
  inspect->add_option("--top-n", top_n, "Number of n-grams")->check(CLI::PositiveNumber);

  // ablate
  auto *ablate = app.add_subcommand(
      "ablate", "Train and evaluate one model per feature configuration");
  EmbeddingFlags ablate_emb;
  HyperFlags ablate_hyper;
  std::string train_path, test_path;
  std::vector<std::string> configs;
  ablate->add_option("--kb", kb_path, "KB index")->required()->check(CLI::ExistingFile);
  ablate_emb.Register(ablate);
  ablate->add_option("--train", train_path, "Training corpus")->required()->check(CLI::ExistingFile);
  ablate->add_option("--test", test_path, "Test corpus")->required()->check(CLI::ExistingFile);
  ablate->add_option("--configs", configs,
                     "Configurations (default: full sparse-only cnn-only "
                     "pairs:doc-doc pairs:ment-title)");
  ablate->add_option("--epochs", epochs, "Training epochs")->check(CLI::Range(0, 100000));
  ablate->add_option("--seed", seed, "Random seed");
  ablate->add_option("--out", report_out, "Report path (default stdout)");
  ablate->add_option("--threads", threads, "Evaluation threads")->check(CLI::Range(1, 256));
  ablate_hyper.Register(ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  auto log = [&](const std::string &msg) {
    if (verbosity > 0) std::cerr << msg << '\n';
  };
  auto epoch_logger = [&](const EpochReport &ep) {
    log("epoch " + std::to_string(ep.epoch) + " mean_loss=" + std::to_string(ep.mean_loss) +
        " gold_recall=" + std::to_string(ep.gold_recall));
  };

  try {
    if (ingest->parsed()) {
      const auto articles = ReadLines<ArticleRecord>(articles_path, ReadArticles);
      const auto anchors = ReadLines<AnchorRecord>(anchors_path, ReadAnchors);
      IngestStats stats;
      const KnowledgeBase kb = KnowledgeBase::Ingest(articles, anchors, &stats);
      kb.Save(kb_out);
      std::cerr << "ingested " << stats.articles << " articles, " << stats.anchors
                << " anchors (" << stats.skipped_anchors << " skipped)\n";
      return 0;
    }

    if (gen->parsed()) {
      WriteSynthetic(GenerateSynthetic(spec), gen_out);
      return 0;
    }

    if (train->parsed()) {
      const KnowledgeBase kb = KnowledgeBase::Load(kb_path);
      const EmbeddingTable table = train_emb.Load();
      const auto corpus = LoadCorpus(corpus_path);
      ModelConfig config = hyper.ToConfig(table.dim(), seed);
      ApplyConfig(train_config, &config);
      Model model = Model::Create(config, hyper.MakeVocab());
      const LinkingContext context(kb, table, config.views);
      TrainOptions options;
      options.epochs = epochs;
      options.seed = seed;
      options.compute_initial_loss = verbosity > 0;
      options.on_epoch = epoch_logger;
      const TrainingReport report = Train(&model, context, corpus, options);
      log("mean queries per mention: " + std::to_string(report.mean_queries));
      model.Save(model_out);
      return 0;
    }

    if (evaluate->parsed()) {
      const KnowledgeBase kb = KnowledgeBase::Load(kb_path);
      const auto corpus = LoadCorpus(corpus_path);
      EvalRow row;
      if (!predictions_path.empty()) {
        const auto predictions = ReadLines<Prediction>(predictions_path, ReadPredictions);
        row = ScorePredictions(predictions, corpus, kb, "predictions");
      } else {
        if (model_path.empty() || eval_emb.path.empty()) {
          std::cerr << "evaluate needs --predictions, or --model with --embeddings\n";
          return kExitUsage;
        }
        Model model = Model::Load(model_path);
        if (!eval_config.empty()) ApplyConfig(eval_config, &model.config);
        const EmbeddingTable table = eval_emb.Load();
        if (table.dim() != model.config.dim) {
          throw DimensionError("embedding dimension does not match the model");
        }
        const LinkingContext context(kb, table, model.config.views);
        row = EvaluateModel(model, context, corpus, threads, eval_config);
      }
      Output out(report_out);
      out.stream() << ToJsonLine(row) << '\n';
      return 0;
    }

    if (link->parsed()) {
      const KnowledgeBase kb = KnowledgeBase::Load(kb_path);
      const EmbeddingTable table = link_emb.Load();
      const Model model = Model::Load(model_path);
      if (table.dim() != model.config.dim) {
        throw DimensionError("embedding dimension does not match the model");
      }
      const auto corpus = LoadCorpus(corpus_path);
      const LinkingContext context(kb, table, model.config.views);
      Output out(link_out);
      for (const auto &doc : corpus) {
        for (const auto &m : doc.mentions) {
          const auto inst = PrepareMention(model, context, doc, m);
          const auto ranked = Infer(model, context, inst);
          Prediction p;
          p.doc_id = doc.doc_id;
          p.start = m.start;
          p.end = m.end;
          if (ranked.front().entity != kNullEntity) {
            p.entity = std::string(kb.IdOf(ranked.front().entity));
          }
          p.prob = ranked.front().marginal_prob;
          WritePrediction(p, out.stream());
        }
      }
      return 0;
    }

    if (inspect->parsed()) {
      const Model model = Model::Load(model_path);
      const EmbeddingTable table = inspect_emb.Load();
      const auto corpus = LoadCorpus(corpus_path);
      const Granularity bank = ParseGranularity(bank_name);
      std::vector<int> rows = {row};
      if (*all_rows) {
        rows.clear();
        for (int r = 0; r < model.cnn.bank(bank).k(); ++r) rows.push_back(r);
      }
      for (int r : rows) {
        for (const auto &a : InspectFilter(model, table, corpus, bank, r, top_n)) {
          std::cout << r << '\t' << a.activation << '\t' << a.ngram << '\n';
        }
      }
      return 0;
    }

    if (ablate->parsed()) {
      const KnowledgeBase kb = KnowledgeBase::Load(kb_path);
      const EmbeddingTable table = ablate_emb.Load();
      const auto train_docs = LoadCorpus(train_path);
      const auto test_docs = LoadCorpus(test_path);
      std::vector<AblationConfig> list;
      if (configs.empty()) {
        list = StandardAblations();
      } else {
        for (const auto &c : configs) list.push_back(ParseAblationConfig(c));
      }
      TrainOptions options;
      options.epochs = epochs;
      options.seed = seed;
      options.compute_initial_loss = false;
      options.on_epoch = epoch_logger;
      const auto results =
          RunAblations(ablate_hyper.ToConfig(table.dim(), seed), kb, table,
                       train_docs, test_docs, list, options, threads);
      Output out(report_out);
      for (const auto &r : results) out.stream() << ToJsonLine(r.eval) << '\n';
      return 0;
    }
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IndexError &e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

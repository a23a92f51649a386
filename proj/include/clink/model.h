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

#ifndef CLINK_MODEL_H_
#define CLINK_MODEL_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clink/cnn.h"
#include "clink/embeddings.h"
#include "clink/kb.h"
#include "clink/sparse.h"
#include "clink/textproc.h"

namespace clink {

// Which feature blocks take part in scoring and training.
enum class FeatureMode : uint8_t {
  kFull = 0,        // f_Q + f_E + f_C
  kSparseOnly = 1,  // f_Q + f_E; dense block frozen at zero
  kCnnOnly = 2,     // f_C plus the NULL indicator
};

std::string_view FeatureModeName(FeatureMode mode);

// Bit p enables cosine pair p (see PairIndex).
using PairMask = uint8_t;
constexpr PairMask kAllPairs = (1u << kNumPairs) - 1;

struct ModelConfig {
  int k = 150;
  int width = 5;
  int dim = 300;
  ViewConfig views;
  int top_k = 30;
  QueryOptions queries;
  FeatureMode mode = FeatureMode::kFull;
  PairMask pairs = kAllPairs;
  double l2 = 0.0;
  double rho = 0.95;
  double epsilon = 1e-6;
  // Initial value of every enabled dense weight.
  double dense_init = 0.0;
  uint64_t seed = 1;

  bool use_sparse() const { return mode != FeatureMode::kCnnOnly; }
  bool use_dense() const { return mode != FeatureMode::kSparseOnly && pairs != 0; }
  bool pair_enabled(int p) const { return use_dense() && ((pairs >> p) & 1u); }
};

// P(t, q | x) proportional to exp(w_sparse . (f_Q + f_E) + w_dense . f_C).
struct Model {
  static constexpr std::string_view kMagic = "CLMD1";

  ModelConfig config;
  FeatureVocabulary vocab;
  std::vector<double> w_sparse;  // one weight per vocabulary index
  DenseFeatures w_dense = DenseFeatures::Zero();
  CnnParams cnn;

  // Fresh model: zero sparse weights, dense weights at config.dense_init
  // for enabled pairs, filters initialized from config.seed.
  static Model Create(const ModelConfig &config,
                      FeatureVocabulary vocab = FeatureVocabulary::Hashed());

  void Save(const std::string &path) const;
  // Raises VersionError, ChecksumError or FormatError.
  static Model Load(const std::string &path);
};

// Per-entity inputs that do not depend on the parameters.
struct EntityInputs {
  TargetInputs embedded;
  std::vector<std::string> body_tokens;
};

// Everything scoring needs besides the model: the KB, the frozen word
// vectors, the tf-idf statistics and pre-embedded entity articles.
class LinkingContext {
 public:
  LinkingContext(const KnowledgeBase &kb, const EmbeddingTable &table,
                 const ViewConfig &views);

  const KnowledgeBase &kb() const { return *kb_; }
  const EmbeddingTable &table() const { return *table_; }
  const TfIdfModel &tfidf() const { return tfidf_; }
  const ViewConfig &views() const { return views_; }
  const EntityInputs &entity(EntityIndex e) const {
    return entities_[static_cast<size_t>(e)];
  }

 private:
  const KnowledgeBase *kb_;
  const EmbeddingTable *table_;
  ViewConfig views_;
  TfIdfModel tfidf_;
  std::vector<EntityInputs> entities_;
};

// A mention with all parameter-independent work done: queries, candidates,
// sparse features and embedded source views.
struct MentionInstance {
  std::string doc_id;
  Mention mention;
  std::vector<Query> queries;
  CandidateSet candidates;
  SourceInputs source;
  std::vector<SparseVector> fq;  // per query
  std::vector<SparseVector> fe;  // per (candidate, query), candidate-major
  int gold = -1;                 // candidate position of the gold entity

  size_t num_queries() const { return queries.size(); }
  size_t num_candidates() const { return candidates.size(); }
  const SparseVector &FE(size_t t, size_t q) const {
    return fe[t * queries.size() + q];
  }
  bool has_gold_annotation() const { return mention.gold_entity.has_value(); }
};

// `vocab` may grow when `grow` is set (interned vocabularies in training).
MentionInstance PrepareMention(const ModelConfig &config,
                               FeatureVocabulary *vocab, bool grow,
                               const LinkingContext &context,
                               const Document &doc, const Mention &mention);
MentionInstance PrepareMention(const Model &model,
                               const LinkingContext &context,
                               const Document &doc, const Mention &mention);

// Pair scores s(t, q) plus the forward state needed for gradients.
struct ScoreTable {
  Eigen::MatrixXd scores;                 // candidates x queries
  Eigen::MatrixXd sparse_q;               // w . f_Q, broadcast per row
  Eigen::MatrixXd sparse_e;               // w . f_E
  Eigen::VectorXd dense;                  // w_dense . f_C per candidate
  std::vector<DenseFeatures> fc;          // per candidate
  SourceEncoding source;
  std::vector<TargetEncoding> targets;    // per candidate; empty for NULL
};

// s(t, q) for every candidate and query. f_C is computed once per
// candidate unless `cache_fc` is false, in which case it is recomputed for
// every pair (used to check the cache).
ScoreTable ScorePairs(const Model &model, const LinkingContext &context,
                      const MentionInstance &instance, bool cache_fc = true);

struct ScoreBreakdown {
  double sparse_q = 0.0;
  double sparse_e = 0.0;
  double dense = 0.0;
};

struct ScoredCandidate {
  EntityIndex entity = kNullEntity;
  double marginal_prob = 0.0;
  int best_query = 0;  // index into the instance's queries
  ScoreBreakdown breakdown;
};

// Log-sum-exp of all entries.
double LogSumExp(const Eigen::Ref<const Eigen::MatrixXd> &values);

// P(t | x) = sum_q P(t, q | x), from a score table.
Eigen::VectorXd Marginals(const Eigen::MatrixXd &scores);

// Candidates sorted by marginal probability, ties by entity id.
std::vector<ScoredCandidate> RankCandidates(const KnowledgeBase &kb,
                                            const MentionInstance &instance,
                                            const ScoreTable &table);
std::vector<ScoredCandidate> Infer(const Model &model,
                                   const LinkingContext &context,
                                   const MentionInstance &instance);

// Gradient with the shape of the model parameters. The sparse part lists
// only touched coordinates, sorted and unique.
struct ModelGradient {
  std::vector<std::pair<uint32_t, double>> sparse;
  DenseFeatures dense = DenseFeatures::Zero();
  CnnGradient cnn;
};

struct LossAndGradient {
  double loss = 0.0;
  ModelGradient grad;
};

// Negative marginal log-likelihood of the gold entity and its gradient.
// nullopt when the gold entity is not among the candidates.
std::optional<LossAndGradient> ComputeLossAndGradient(
    const Model &model, const LinkingContext &context,
    const MentionInstance &instance);

// Adadelta accumulators for every parameter. Sparse coordinates are
// updated lazily: a coordinate untouched for m steps has both
// accumulators decayed by rho^m when next touched, which equals the dense
// update with zero gradients.
class AdadeltaState {
 public:
  explicit AdadeltaState(const Model &model);

  void Apply(const ModelGradient &grad, Model *model);

  int64_t steps() const { return step_; }
  // Accumulators of a sparse coordinate, brought up to the current step.
  std::pair<double, double> SparseAccumulators(uint32_t index) const;

 private:
  void Step(double g, double rho, double eps, double *eg2, double *edx2,
            double *param) const;

  double rho_;
  double eps_;
  int64_t step_ = 0;
  std::vector<double> sparse_eg2_;
  std::vector<double> sparse_edx2_;
  std::vector<int64_t> sparse_last_;
  DenseFeatures dense_eg2_ = DenseFeatures::Zero();
  DenseFeatures dense_edx2_ = DenseFeatures::Zero();
  CnnGradient cnn_eg2_;
  CnnGradient cnn_edx2_;
};

struct EpochReport {
  int epoch = 0;
  double mean_loss = 0.0;
  double gold_recall = 0.0;
  size_t examples = 0;  // gold-annotated mentions
  size_t skipped = 0;   // gold not among the candidates
};

struct TrainingReport {
  double initial_mean_loss = 0.0;
  double mean_queries = 0.0;
  std::vector<EpochReport> epochs;
};

struct TrainOptions {
  int epochs = 10;
  uint64_t seed = 1;
  bool compute_initial_loss = true;
  std::function<void(const EpochReport &)> on_epoch;
};

// Prepares every mention of the corpus, in document order.
std::vector<MentionInstance> PrepareCorpus(const ModelConfig &config,
                                           FeatureVocabulary *vocab, bool grow,
                                           const LinkingContext &context,
                                           std::span<const Document> corpus);

// Per-example Adadelta on the marginal log-likelihood, shuffling the
// example order each epoch. Raises TrainingError on a non-finite loss.
TrainingReport Train(Model *model, const LinkingContext &context,
                     std::span<const Document> corpus,
                     const TrainOptions &options);
TrainingReport Train(Model *model, const LinkingContext &context,
                     std::span<const MentionInstance> instances,
                     const TrainOptions &options);

// Mean loss over the gold-annotated mentions whose gold is a candidate.
double MeanLoss(const Model &model, const LinkingContext &context,
                std::span<const MentionInstance> instances);

}  // namespace clink

#endif  // CLINK_MODEL_H_

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

#include "clink/model.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "clink/binary_io.h"

namespace clink {

std::string_view FeatureModeName(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kFull:
      return "full";
    case FeatureMode::kSparseOnly:
      return "sparse-only";
    case FeatureMode::kCnnOnly:
      return "cnn-only";
  }
  return "unknown";
}

Model Model::Create(const ModelConfig &config, FeatureVocabulary vocab) {
  Model m;
  m.config = config;
  m.vocab = std::move(vocab);
  m.w_sparse.assign(m.vocab.capacity(), 0.0);
  for (int p = 0; p < kNumPairs; ++p) {
    m.w_dense[p] = config.pair_enabled(p) ? config.dense_init : 0.0;
  }
  m.cnn = InitCnnParams(config.k, config.width, config.dim, config.seed);
  return m;
}

LinkingContext::LinkingContext(const KnowledgeBase &kb,
                               const EmbeddingTable &table,
                               const ViewConfig &views)
    : kb_(&kb), table_(&table), views_(views) {
  tfidf_ = TfIdfModel::FromKnowledgeBase(kb, views.doc_cap);
  entities_.reserve(kb.num_entities());
  for (size_t e = 0; e < kb.num_entities(); ++e) {
    const auto &article = kb.entity(static_cast<EntityIndex>(e));
    const TargetViews tv =
        ExtractTargetViews(article.title, article.body, views.doc_cap);
    entities_.push_back({EmbedTarget(table, tv), Surfaces(tv.body)});
  }
}

namespace {

template <typename MakeBuilder>
MentionInstance PrepareMentionImpl(const ModelConfig &config,
                                   MakeBuilder make_builder,
                                   const LinkingContext &context,
                                   const Document &doc, const Mention &mention) {
  const KnowledgeBase &kb = context.kb();
  const GranularityViews views = ExtractViews(doc.tokens, mention, config.views);

  MentionInstance inst;
  inst.doc_id = doc.doc_id;
  inst.mention = mention;
  inst.queries = GenerateQueries(views.mention, config.queries);
  inst.candidates = CandidatesFor(kb, inst.queries, config.top_k);
  if (config.use_dense()) inst.source = EmbedSource(context.table(), views);

  const size_t num_q = inst.queries.size();
  const size_t num_t = inst.candidates.size();
  inst.fq.resize(num_q);
  inst.fe.resize(num_t * num_q);
  const std::vector<std::string> source_doc = Surfaces(views.document);
  for (size_t q = 0; q < num_q; ++q) {
    if (config.use_sparse()) {
      inst.fq[q] = FeaturesQ(views.mention, inst.queries[q], make_builder());
    }
  }
  for (size_t t = 0; t < num_t; ++t) {
    const EntityIndex e = inst.candidates.candidates[t];
    EntityContext ec;
    ec.entity = e;
    if (e != kNullEntity && config.use_sparse()) {
      ec.tfidf_cosine = TfIdfCosine(context.tfidf(), source_doc,
                                    context.entity(e).body_tokens);
    }
    for (size_t q = 0; q < num_q; ++q) {
      auto &slot = inst.fe[t * num_q + q];
      if (config.use_sparse()) {
        slot = FeaturesE(kb, inst.queries[q], ec, context.tfidf(), source_doc,
                         make_builder());
      } else if (e == kNullEntity) {
        FeatureBuilder b = make_builder();
        b.Add(kNullFeature);
        slot = b.Build();
      }
    }
  }

  if (mention.gold_entity) {
    const EntityIndex gold =
        *mention.gold_entity == "NIL" ? kNullEntity : kb.Find(*mention.gold_entity);
    if (gold != kNullEntity || *mention.gold_entity == "NIL") {
      inst.gold = inst.candidates.IndexOf(gold);
    }
  }
  return inst;
}

}  // namespace

MentionInstance PrepareMention(const ModelConfig &config,
                               FeatureVocabulary *vocab, bool grow,
                               const LinkingContext &context,
                               const Document &doc, const Mention &mention) {
  return PrepareMentionImpl(
      config, [&] { return FeatureBuilder(vocab, grow); }, context, doc, mention);
}

MentionInstance PrepareMention(const Model &model,
                               const LinkingContext &context,
                               const Document &doc, const Mention &mention) {
  return PrepareMentionImpl(
      model.config, [&] { return FeatureBuilder(model.vocab); }, context, doc,
      mention);
}

std::vector<MentionInstance> PrepareCorpus(const ModelConfig &config,
                                           FeatureVocabulary *vocab, bool grow,
                                           const LinkingContext &context,
                                           std::span<const Document> corpus) {
  std::vector<MentionInstance> out;
  for (const auto &doc : corpus) {
    for (const auto &m : doc.mentions) {
      out.push_back(PrepareMention(config, vocab, grow, context, doc, m));
    }
  }
  return out;
}

namespace {

DenseFeatures MaskedFeatures(const ModelConfig &config, DenseFeatures f) {
  for (int p = 0; p < kNumPairs; ++p) {
    if (!config.pair_enabled(p)) f[p] = 0.0;
  }
  return f;
}

}  // namespace

ScoreTable ScorePairs(const Model &model, const LinkingContext &context,
                      const MentionInstance &inst, bool cache_fc) {
  const auto num_t = static_cast<Eigen::Index>(inst.num_candidates());
  const auto num_q = static_cast<Eigen::Index>(inst.num_queries());
  ScoreTable table;
  table.sparse_q.resize(num_t, num_q);
  table.sparse_e.resize(num_t, num_q);
  table.dense = Eigen::VectorXd::Zero(num_t);
  table.fc.assign(static_cast<size_t>(num_t), DenseFeatures::Zero());
  table.targets.resize(static_cast<size_t>(num_t));

  for (Eigen::Index q = 0; q < num_q; ++q) {
    table.sparse_q.col(q).setConstant(inst.fq[static_cast<size_t>(q)].Dot(model.w_sparse));
  }
  for (Eigen::Index t = 0; t < num_t; ++t) {
    for (Eigen::Index q = 0; q < num_q; ++q) {
      table.sparse_e(t, q) =
          inst.FE(static_cast<size_t>(t), static_cast<size_t>(q)).Dot(model.w_sparse);
    }
  }
  table.scores = table.sparse_q + table.sparse_e;

  if (!model.config.use_dense()) return table;

  const auto &cnn = model.cnn;
  if (cache_fc) {
    table.source = EncodeSource(cnn, inst.source);
    for (Eigen::Index t = 0; t < num_t; ++t) {
      const EntityIndex e = inst.candidates.candidates[static_cast<size_t>(t)];
      if (e == kNullEntity) continue;
      auto &target = table.targets[static_cast<size_t>(t)];
      target = EncodeTarget(cnn, context.entity(e).embedded);
      table.fc[static_cast<size_t>(t)] =
          MaskedFeatures(model.config, PairFeatures(table.source, target));
      table.dense[t] = model.w_dense.dot(table.fc[static_cast<size_t>(t)]);
    }
    table.scores.colwise() += table.dense;
    return table;
  }

  // Uncached: re-encode both sides for every (t, q) pair.
  for (Eigen::Index t = 0; t < num_t; ++t) {
    const EntityIndex e = inst.candidates.candidates[static_cast<size_t>(t)];
    for (Eigen::Index q = 0; q < num_q; ++q) {
      double dense = 0.0;
      if (e != kNullEntity) {
        const auto source = EncodeSource(cnn, inst.source);
        const auto target = EncodeTarget(cnn, context.entity(e).embedded);
        const DenseFeatures f =
            MaskedFeatures(model.config, PairFeatures(source, target));
        dense = model.w_dense.dot(f);
        table.fc[static_cast<size_t>(t)] = f;
      }
      table.dense[t] = dense;
      table.scores(t, q) += dense;
    }
  }
  return table;
}

double LogSumExp(const Eigen::Ref<const Eigen::MatrixXd> &values) {
  if (values.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = values.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((values.array() - m).exp().sum());
}

Eigen::VectorXd Marginals(const Eigen::MatrixXd &scores) {
  const double lse = LogSumExp(scores);
  return (scores.array() - lse).exp().rowwise().sum();
}

std::vector<ScoredCandidate> RankCandidates(const KnowledgeBase &kb,
                                            const MentionInstance &inst,
                                            const ScoreTable &table) {
  const Eigen::VectorXd marginals = Marginals(table.scores);
  std::vector<ScoredCandidate> out;
  for (Eigen::Index t = 0; t < table.scores.rows(); ++t) {
    ScoredCandidate c;
    c.entity = inst.candidates.candidates[static_cast<size_t>(t)];
    c.marginal_prob = marginals[t];
    Eigen::Index best = 0;
    table.scores.row(t).maxCoeff(&best);
    c.best_query = static_cast<int>(best);
    c.breakdown = {table.sparse_q(t, best), table.sparse_e(t, best), table.dense[t]};
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(),
            [&kb](const ScoredCandidate &a, const ScoredCandidate &b) {
              if (a.marginal_prob != b.marginal_prob) {
                return a.marginal_prob > b.marginal_prob;
              }
              return kb.IdOf(a.entity) < kb.IdOf(b.entity);
            });
  return out;
}

std::vector<ScoredCandidate> Infer(const Model &model,
                                   const LinkingContext &context,
                                   const MentionInstance &inst) {
  return RankCandidates(context.kb(), inst, ScorePairs(model, context, inst));
}

std::optional<LossAndGradient> ComputeLossAndGradient(
    const Model &model, const LinkingContext &context,
    const MentionInstance &inst) {
  if (inst.gold < 0) return std::nullopt;
  const ModelConfig &config = model.config;
  const ScoreTable table = ScorePairs(model, context, inst);
  const Eigen::MatrixXd &s = table.scores;
  const Eigen::Index gold = inst.gold;

  const double lse_all = LogSumExp(s);
  const double lse_gold = LogSumExp(s.row(gold));
  LossAndGradient out;
  out.loss = lse_all - lse_gold;

  // dL/ds(t, q) = P(t, q | x) - [t = gold] P(q | gold, x)
  Eigen::MatrixXd coef = (s.array() - lse_all).exp().matrix();
  coef.row(gold) -= (s.row(gold).array() - lse_gold).exp().matrix();
  const Eigen::VectorXd per_query = coef.colwise().sum().transpose();
  const Eigen::VectorXd per_candidate = coef.rowwise().sum();

  std::vector<SparseVector::Entry> sparse;
  for (size_t q = 0; q < inst.num_queries(); ++q) {
    const double c = per_query[static_cast<Eigen::Index>(q)];
    for (const auto &[i, v] : inst.fq[q].entries()) sparse.emplace_back(i, c * v);
  }
  for (size_t t = 0; t < inst.num_candidates(); ++t) {
    for (size_t q = 0; q < inst.num_queries(); ++q) {
      const double c = coef(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(q));
      for (const auto &[i, v] : inst.FE(t, q).entries()) sparse.emplace_back(i, c * v);
    }
  }
  SparseVector merged(std::move(sparse));
  out.grad.sparse.assign(merged.entries().begin(), merged.entries().end());

  out.grad.cnn = CnnGradient::ZerosLike(model.cnn);
  if (config.use_dense()) {
    for (size_t t = 0; t < inst.num_candidates(); ++t) {
      out.grad.dense += per_candidate[static_cast<Eigen::Index>(t)] * table.fc[t];
    }

    DenseFeatures w_masked = MaskedFeatures(config, model.w_dense);
    std::array<Vector<double>, kNumSourceViews> source_grad;
    for (auto &g : source_grad) g = Vector<double>::Zero(model.cnn.k());
    for (size_t t = 0; t < inst.num_candidates(); ++t) {
      if (inst.candidates.candidates[t] == kNullEntity) continue;
      const double c = per_candidate[static_cast<Eigen::Index>(t)];
      if (c == 0.0) continue;
      std::array<Vector<double>, kNumTargetViews> target_grad;
      for (auto &g : target_grad) g = Vector<double>::Zero(model.cnn.k());
      PairFeaturesBackward<double>(table.source, table.targets[t], c * w_masked,
                                   &source_grad, &target_grad);
      EncodingBackward(model.cnn, kNumSourceViews, table.targets[t], target_grad,
                       &out.grad.cnn);
    }
    EncodingBackward(model.cnn, 0, table.source, source_grad, &out.grad.cnn);
  }

  if (config.l2 > 0.0) {
    const double l2 = config.l2;
    for (auto &[i, g] : out.grad.sparse) {
      out.loss += 0.5 * l2 * model.w_sparse[i] * model.w_sparse[i];
      g += l2 * model.w_sparse[i];
    }
    if (config.use_dense()) {
      const DenseFeatures w = MaskedFeatures(config, model.w_dense);
      out.loss += 0.5 * l2 * w.squaredNorm();
      out.grad.dense += l2 * w;
      for (int b = 0; b < kNumBanks; ++b) {
        out.loss += 0.5 * l2 * model.cnn.banks[b].filters.squaredNorm();
        out.grad.cnn.banks[b] += l2 * model.cnn.banks[b].filters;
      }
    }
  }
  return out;
}

AdadeltaState::AdadeltaState(const Model &model)
    : rho_(model.config.rho), eps_(model.config.epsilon) {
  sparse_eg2_.assign(model.w_sparse.size(), 0.0);
  sparse_edx2_.assign(model.w_sparse.size(), 0.0);
  sparse_last_.assign(model.w_sparse.size(), 0);
  cnn_eg2_ = CnnGradient::ZerosLike(model.cnn);
  cnn_edx2_ = CnnGradient::ZerosLike(model.cnn);
}

void AdadeltaState::Step(double g, double rho, double eps, double *eg2,
                         double *edx2, double *param) const {
  *eg2 = rho * *eg2 + (1.0 - rho) * g * g;
  const double dx = -std::sqrt(*edx2 + eps) / std::sqrt(*eg2 + eps) * g;
  *edx2 = rho * *edx2 + (1.0 - rho) * dx * dx;
  *param += dx;
}

std::pair<double, double> AdadeltaState::SparseAccumulators(uint32_t index) const {
  const double decay =
      std::pow(rho_, static_cast<double>(step_ - sparse_last_[index]));
  return {sparse_eg2_[index] * decay, sparse_edx2_[index] * decay};
}

void AdadeltaState::Apply(const ModelGradient &grad, Model *model) {
  ++step_;
  for (const auto &[i, g] : grad.sparse) {
    const int64_t missed = step_ - sparse_last_[i] - 1;
    if (missed > 0) {
      const double decay = std::pow(rho_, static_cast<double>(missed));
      sparse_eg2_[i] *= decay;
      sparse_edx2_[i] *= decay;
    }
    Step(g, rho_, eps_, &sparse_eg2_[i], &sparse_edx2_[i], &model->w_sparse[i]);
    sparse_last_[i] = step_;
  }
  if (!model->config.use_dense()) return;
  for (int p = 0; p < kNumPairs; ++p) {
    if (!model->config.pair_enabled(p)) continue;
    Step(grad.dense[p], rho_, eps_, &dense_eg2_[p], &dense_edx2_[p],
         &model->w_dense[p]);
  }
  for (int b = 0; b < kNumBanks; ++b) {
    double *param = model->cnn.banks[b].filters.data();
    const double *g = grad.cnn.banks[b].data();
    double *eg2 = cnn_eg2_.banks[b].data();
    double *edx2 = cnn_edx2_.banks[b].data();
    const Eigen::Index n = model->cnn.banks[b].filters.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      Step(g[i], rho_, eps_, &eg2[i], &edx2[i], &param[i]);
    }
  }
  ++model->cnn.revision;
}

double MeanLoss(const Model &model, const LinkingContext &context,
                std::span<const MentionInstance> instances) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto &inst : instances) {
    if (inst.gold < 0) continue;
    const ScoreTable table = ScorePairs(model, context, inst);
    sum += LogSumExp(table.scores) - LogSumExp(table.scores.row(inst.gold));
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

TrainingReport Train(Model *model, const LinkingContext &context,
                     std::span<const MentionInstance> instances,
                     const TrainOptions &options) {
  TrainingReport report;
  if (!instances.empty()) {
    double queries = 0.0;
    for (const auto &inst : instances) queries += static_cast<double>(inst.num_queries());
    report.mean_queries = queries / static_cast<double>(instances.size());
  }
  if (options.compute_initial_loss) {
    report.initial_mean_loss = MeanLoss(*model, context, instances);
  }

  std::vector<size_t> order;
  for (size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].has_gold_annotation()) order.push_back(i);
  }
  AdadeltaState state(*model);
  Rng rng(options.seed);
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    Shuffle(order, rng);
    EpochReport ep;
    ep.epoch = epoch;
    ep.examples = order.size();
    double sum = 0.0;
    for (size_t i : order) {
      const MentionInstance &inst = instances[i];
      auto lg = ComputeLossAndGradient(*model, context, inst);
      if (!lg) {
        ++ep.skipped;
        continue;
      }
      if (!std::isfinite(lg->loss)) {
        throw TrainingError("non-finite loss in epoch " + std::to_string(epoch) +
                            " on document '" + inst.doc_id + "', mention [" +
                            std::to_string(inst.mention.start) + ", " +
                            std::to_string(inst.mention.end) + ")");
      }
      sum += lg->loss;
      state.Apply(lg->grad, model);
    }
    const size_t used = ep.examples - ep.skipped;
    ep.mean_loss = used == 0 ? 0.0 : sum / static_cast<double>(used);
    ep.gold_recall = ep.examples == 0
                         ? 0.0
                         : static_cast<double>(used) / static_cast<double>(ep.examples);
    report.epochs.push_back(ep);
    if (options.on_epoch) options.on_epoch(ep);
  }
  return report;
}

TrainingReport Train(Model *model, const LinkingContext &context,
                     std::span<const Document> corpus,
                     const TrainOptions &options) {
  const bool grow = model->vocab.mode() == FeatureVocabulary::Mode::kInterned;
  const auto instances =
      PrepareCorpus(model->config, &model->vocab, grow, context, corpus);
  return Train(model, context, instances, options);
}

void Model::Save(const std::string &path) const {
  BinaryWriter w;
  w.WriteBytes(kMagic);
  w.Write<uint32_t>(static_cast<uint32_t>(config.k));
  w.Write<uint32_t>(static_cast<uint32_t>(config.width));
  w.Write<uint32_t>(static_cast<uint32_t>(config.dim));
  w.Write<int32_t>(config.views.context_window);
  w.Write<int32_t>(config.views.doc_cap);
  w.Write<int32_t>(config.top_k);
  w.Write<int32_t>(config.queries.max_depth);
  w.Write<uint8_t>(static_cast<uint8_t>(config.mode));
  w.Write<uint8_t>(config.pairs);
  w.Write<double>(config.l2);
  w.Write<double>(config.rho);
  w.Write<double>(config.epsilon);
  w.Write<double>(config.dense_init);
  w.Write<uint64_t>(config.seed);

  w.Write<uint8_t>(static_cast<uint8_t>(vocab.mode()));
  w.Write<uint32_t>(vocab.capacity());
  std::map<std::string, uint32_t> names(vocab.interned().begin(),
                                        vocab.interned().end());
  w.Write<uint32_t>(static_cast<uint32_t>(names.size()));
  for (const auto &[name, index] : names) {
    w.WriteString(name);
    w.Write<uint32_t>(index);
  }

  std::vector<uint32_t> nonzero;
  for (size_t i = 0; i < w_sparse.size(); ++i) {
    if (w_sparse[i] != 0.0) nonzero.push_back(static_cast<uint32_t>(i));
  }
  w.Write<uint32_t>(static_cast<uint32_t>(nonzero.size()));
  for (uint32_t i : nonzero) {
    w.Write<uint32_t>(i);
    w.Write<double>(w_sparse[i]);
  }
  for (int p = 0; p < kNumPairs; ++p) w.Write<double>(w_dense[p]);

  for (const auto &bank : cnn.banks) {
    w.Write<uint8_t>(static_cast<uint8_t>(bank.granularity));
    w.Write<uint32_t>(static_cast<uint32_t>(bank.k()));
    w.Write<uint32_t>(static_cast<uint32_t>(bank.width));
    w.Write<uint32_t>(static_cast<uint32_t>(bank.dim));
    for (Eigen::Index i = 0; i < bank.filters.size(); ++i) {
      w.Write<double>(bank.filters.data()[i]);
    }
  }
  w.Commit(path);
}

Model Model::Load(const std::string &path) {
  const std::string payload = ReadChecksummedFile(path, kMagic);
  BinaryReader r(payload);
  ModelConfig c;
  c.k = static_cast<int>(r.Read<uint32_t>());
  c.width = static_cast<int>(r.Read<uint32_t>());
  c.dim = static_cast<int>(r.Read<uint32_t>());
  c.views.context_window = r.Read<int32_t>();
  c.views.doc_cap = r.Read<int32_t>();
  c.top_k = r.Read<int32_t>();
  c.queries.max_depth = r.Read<int32_t>();
  const auto mode = r.Read<uint8_t>();
  if (mode > static_cast<uint8_t>(FeatureMode::kCnnOnly)) {
    throw FormatError(path + ": unknown feature mode");
  }
  c.mode = static_cast<FeatureMode>(mode);
  c.pairs = r.Read<uint8_t>();
  c.l2 = r.Read<double>();
  c.rho = r.Read<double>();
  c.epsilon = r.Read<double>();
  c.dense_init = r.Read<double>();
  c.seed = r.Read<uint64_t>();

  Model m;
  m.config = c;
  const auto vocab_mode = r.Read<uint8_t>();
  const auto capacity = r.Read<uint32_t>();
  if (vocab_mode == static_cast<uint8_t>(FeatureVocabulary::Mode::kHashed)) {
    m.vocab = FeatureVocabulary::Hashed(capacity);
  } else if (vocab_mode == static_cast<uint8_t>(FeatureVocabulary::Mode::kInterned)) {
    m.vocab = FeatureVocabulary::Interned(capacity);
  } else {
    throw FormatError(path + ": unknown vocabulary mode");
  }
  const auto num_names = r.Read<uint32_t>();
  std::unordered_map<std::string, uint32_t> names;
  for (uint32_t i = 0; i < num_names; ++i) {
    std::string name = r.ReadString();
    names.emplace(std::move(name), r.Read<uint32_t>());
  }
  m.vocab.set_interned(std::move(names));

  m.w_sparse.assign(capacity, 0.0);
  const auto nonzero = r.Read<uint32_t>();
  for (uint32_t j = 0; j < nonzero; ++j) {
    const auto i = r.Read<uint32_t>();
    if (i >= capacity) throw FormatError(path + ": sparse index out of range");
    m.w_sparse[i] = r.Read<double>();
  }
  for (int p = 0; p < kNumPairs; ++p) m.w_dense[p] = r.Read<double>();

  for (int b = 0; b < kNumBanks; ++b) {
    auto &bank = m.cnn.banks[b];
    const auto g = r.Read<uint8_t>();
    if (g != b) throw FormatError(path + ": filter banks out of order");
    bank.granularity = static_cast<Granularity>(g);
    const auto k = r.Read<uint32_t>();
    bank.width = static_cast<int>(r.Read<uint32_t>());
    bank.dim = static_cast<int>(r.Read<uint32_t>());
    if (static_cast<int>(k) != c.k || bank.width != c.width || bank.dim != c.dim) {
      throw DimensionError(path + ": filter bank shape disagrees with config");
    }
    bank.filters.resize(k, static_cast<Eigen::Index>(bank.dim) * bank.width);
    for (Eigen::Index i = 0; i < bank.filters.size(); ++i) {
      bank.filters.data()[i] = r.Read<double>();
    }
  }
  if (!r.done()) throw FormatError(path + ": trailing data");
  return m;
}

}  // namespace clink

// Gradient-descent training for both models. Parameter gradients come from
// backpropagation through the unrolled graphs; runs are bit-reproducible
// from (config, seed, dataset).
#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "advseq/data.hpp"
#include "advseq/diff.hpp"
#include "advseq/linalg.hpp"
#include "advseq/models.hpp"

namespace advseq {

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  Loss loss = Loss::MeanSquaredError;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  int report_every = 0;    // 0 = silent
  int hidden_dim = 32;
  int batch_size = 16;     // classifier minibatch; 0 = full batch (sequential)
  bool clip_gradients = false;
  double clip_norm = 5.0;
};

struct TrainReport {
  std::vector<double> loss_curve;  // one entry per epoch
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double final_accuracy = 0.0;  // classifier only
  double wall_seconds = 0.0;    // not persisted; reports must be reproducible
};

struct RnnParamGrads {
  Mat w_in, w, w_out;
  Vec b_h, b_y;

  static RnnParamGrads zeros_like(const VanillaRnnParams& p) {
    return {Mat(p.w_in.rows, p.w_in.cols), Mat(p.w.rows, p.w.cols),
            Mat(p.w_out.rows, p.w_out.cols), Vec(p.b_h.dim()), Vec(p.b_y.dim())};
  }
};

// Gradients of the per-pair mean squared error with respect to every
// parameter, accumulated into g. Returns the pair's loss.
inline double rnn_param_gradients(const VanillaRnnParams& p, const Sequence& x,
                                  const Sequence& y_true, RnnParamGrads& g) {
  const RnnTrace tr = rnn_forward(p, x);
  if (tr.outputs.len() != y_true.len() || tr.outputs.width() != y_true.width())
    throw ShapeError("rnn_param_gradients: target shape mismatch");
  const std::size_t T = x.len();
  const double scale = 2.0 / static_cast<double>(T * p.output_dim());

  double loss = 0.0;
  Vec dh(p.hidden_dim());
  for (std::size_t t = T; t-- > 0;) {
    Vec dy(p.output_dim());
    for (std::size_t c = 0; c < p.output_dim(); ++c) {
      const double err = tr.outputs.steps[t][c] - y_true.steps[t][c];
      loss += err * err;
      dy[c] = scale * err;
    }
    outer_acc(g.w_out, dy, tr.hidden.steps[t]);
    add_inplace(g.b_y, dy);
    add_inplace(dh, matvec_t(p.w_out, dy));
    Vec da(p.hidden_dim());
    for (std::size_t k = 0; k < p.hidden_dim(); ++k)
      da[k] = dh[k] * (1.0 - tr.hidden.steps[t][k] * tr.hidden.steps[t][k]);
    outer_acc(g.w_in, da, x.steps[t]);
    add_inplace(g.b_h, da);
    if (t > 0) outer_acc(g.w, da, tr.hidden.steps[t - 1]);
    dh = matvec_t(p.w, da);
  }
  return loss / static_cast<double>(T * p.output_dim());
}

struct LstmParamGrads {
  Mat embedding;
  Mat wi, wf, wo, wg;
  Vec bi, bf, bo, bg;
  Mat w_out;
  Vec b_out;

  static LstmParamGrads zeros_like(const LstmClassifierParams& p) {
    const std::size_t h = p.hidden_dim();
    const std::size_t z = p.embed_dim() + h;
    return {Mat(p.vocab_size(), p.embed_dim()),
            Mat(h, z), Mat(h, z), Mat(h, z), Mat(h, z),
            Vec(h), Vec(h), Vec(h), Vec(h),
            Mat(2, h), Vec(2)};
  }
};

// Cross-entropy gradients for one sentence, accumulated into g.
// Returns the sentence loss -log p(label).
inline double lstm_param_gradients(const LstmClassifierParams& p,
                                   const TokenSequence& s, int label,
                                   LstmParamGrads& g) {
  if (label != 0 && label != 1)
    throw ConfigError("lstm_param_gradients: label must be 0 or 1");
  const LstmTrace tr = lstm_classify(p, s);
  const std::size_t T = s.len();
  const std::size_t H = p.hidden_dim();
  const std::size_t E = p.embed_dim();

  const double loss = -tr.logits[static_cast<std::size_t>(label)] + logsumexp(tr.logits);

  Vec dlogits(2);
  for (std::size_t j = 0; j < 2; ++j)
    dlogits[j] = tr.probs[j] - (static_cast<int>(j) == label ? 1.0 : 0.0);
  outer_acc(g.w_out, dlogits, tr.pooled);
  add_inplace(g.b_out, dlogits);

  Vec dpooled = matvec_t(p.w_out, dlogits);
  for (std::size_t k = 0; k < H; ++k) dpooled[k] /= static_cast<double>(T);

  Vec dh(H);
  Vec dc(H);
  for (std::size_t t = T; t-- > 0;) {
    add_inplace(dh, dpooled);
    const Vec& i = tr.gate_i.steps[t];
    const Vec& f = tr.gate_f.steps[t];
    const Vec& o = tr.gate_o.steps[t];
    const Vec& gc = tr.gate_g.steps[t];
    const Vec& c = tr.cell.steps[t];
    const Vec* c_prev = (t > 0) ? &tr.cell.steps[t - 1] : nullptr;

    Vec da_i(H), da_f(H), da_o(H), da_g(H);
    for (std::size_t k = 0; k < H; ++k) {
      const double tc = std::tanh(c[k]);
      const double do_k = dh[k] * tc;
      const double dc_k = dc[k] + dh[k] * o[k] * (1.0 - tc * tc);
      const double cp = c_prev ? (*c_prev)[k] : 0.0;
      da_i[k] = dc_k * gc[k] * i[k] * (1.0 - i[k]);
      da_f[k] = dc_k * cp * f[k] * (1.0 - f[k]);
      da_o[k] = do_k * o[k] * (1.0 - o[k]);
      da_g[k] = dc_k * i[k] * (1.0 - gc[k] * gc[k]);
      dc[k] = dc_k * f[k];
    }

    const Vec h_prev = (t > 0) ? tr.hidden.steps[t - 1] : Vec(H);
    const Vec z = concat(tr.inputs.steps[t], h_prev);
    outer_acc(g.wi, da_i, z);
    outer_acc(g.wf, da_f, z);
    outer_acc(g.wo, da_o, z);
    outer_acc(g.wg, da_g, z);
    add_inplace(g.bi, da_i);
    add_inplace(g.bf, da_f);
    add_inplace(g.bo, da_o);
    add_inplace(g.bg, da_g);

    Vec dz = matvec_t(p.gate_input.w, da_i);
    add_inplace(dz, matvec_t(p.gate_forget.w, da_f));
    add_inplace(dz, matvec_t(p.gate_output.w, da_o));
    add_inplace(dz, matvec_t(p.gate_candidate.w, da_g));

    const auto row = static_cast<std::size_t>(s.tokens[t]);
    for (std::size_t k = 0; k < E; ++k) g.embedding(row, k) += dz[k];
    dh = slice(dz, E, E + H);
  }
  return loss;
}

namespace detail {

inline Mat uniform_mat(Rng& rng, std::size_t r, std::size_t c, double s) {
  Mat m(r, c);
  for (double& x : m.data) x = rng.next_uniform(-s, s);
  return m;
}

inline Vec uniform_vec(Rng& rng, std::size_t n, double s) {
  Vec v(n);
  for (double& x : v.data) x = rng.next_uniform(-s, s);
  return v;
}

inline double grads_sq_norm(const LstmParamGrads& g) {
  double s = 0.0;
  for (const Mat* m : {&g.embedding, &g.wi, &g.wf, &g.wo, &g.wg, &g.w_out})
    for (double x : m->data) s += x * x;
  for (const Vec* v : {&g.bi, &g.bf, &g.bo, &g.bg, &g.b_out})
    for (double x : v->data) s += x * x;
  return s;
}

inline void scale_grads(LstmParamGrads& g, double s) {
  for (Mat* m : {&g.embedding, &g.wi, &g.wf, &g.wo, &g.wg, &g.w_out})
    for (double& x : m->data) x *= s;
  for (Vec* v : {&g.bi, &g.bf, &g.bo, &g.bg, &g.b_out})
    for (double& x : v->data) x *= s;
}

// Fisher-Yates with the project Rng; std::shuffle is implementation-defined.
inline void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_int(0, static_cast<int>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace detail

inline VanillaRnnParams init_rnn_params(std::size_t input_dim, std::size_t hidden_dim,
                                        std::size_t output_dim, std::uint64_t seed,
                                        double init_scale) {
  Rng rng(seed);
  VanillaRnnParams p;
  p.w_in = detail::uniform_mat(rng, hidden_dim, input_dim, init_scale);
  p.w = detail::uniform_mat(rng, hidden_dim, hidden_dim, init_scale);
  p.w_out = detail::uniform_mat(rng, output_dim, hidden_dim, init_scale);
  p.b_h = detail::uniform_vec(rng, hidden_dim, init_scale);
  p.b_y = detail::uniform_vec(rng, output_dim, init_scale);
  return p;
}

// Embeddings start from the dictionary's vectors (trained jointly with the
// rest); gate and head weights start uniform in [-init_scale, init_scale].
inline LstmClassifierParams init_lstm_params(const EmbeddingDictionary& dict,
                                             std::size_t hidden_dim,
                                             std::uint64_t seed, double init_scale) {
  Rng rng(seed);
  LstmClassifierParams p;
  p.embedding = dict.vectors;
  const std::size_t z = dict.embed_dim() + hidden_dim;
  for (LstmGate* g : {&p.gate_input, &p.gate_forget, &p.gate_output, &p.gate_candidate}) {
    g->w = detail::uniform_mat(rng, hidden_dim, z, init_scale);
    g->b = detail::uniform_vec(rng, hidden_dim, init_scale);
  }
  p.w_out = detail::uniform_mat(rng, 2, hidden_dim, init_scale);
  p.b_out = detail::uniform_vec(rng, 2, init_scale);
  return p;
}

inline double evaluate_mse(const VanillaRnnParams& p, const SeqPairSet& set) {
  double s = 0.0;
  for (const auto& [in, target] : set.pairs)
    s += sequence_mse(rnn_forward(p, in).outputs, target);
  return s / static_cast<double>(set.pairs.size());
}

inline double evaluate_accuracy(const LstmClassifierParams& p,
                                const LabeledCorpus& corpus) {
  if (corpus.items.empty()) throw ConfigError("evaluate_accuracy: empty corpus");
  std::size_t correct = 0;
  for (const auto& [tokens, label] : corpus.items)
    if (predict_class(p, tokens) == label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(corpus.items.size());
}

inline double evaluate_cross_entropy(const LstmClassifierParams& p,
                                     const LabeledCorpus& corpus) {
  double s = 0.0;
  for (const auto& [tokens, label] : corpus.items) {
    const LstmTrace tr = lstm_classify(p, tokens);
    s += -tr.logits[static_cast<std::size_t>(label)] + logsumexp(tr.logits);
  }
  return s / static_cast<double>(corpus.items.size());
}

// Gradient descent on the mean squared error over the pair set.
// batch_size 0 runs full-batch updates; batch_size 1 is per-pair descent.
inline std::pair<VanillaRnnParams, TrainReport> train_sequential(
    const SeqPairSet& set, const TrainConfig& cfg) {
  if (set.pairs.empty()) throw ConfigError("train_sequential: empty pair set");
  if (cfg.epochs < 0 || !(cfg.learning_rate > 0.0) || !(cfg.init_scale > 0.0))
    throw ConfigError("train_sequential: bad epochs/learning_rate/init_scale");
  if (cfg.loss != Loss::MeanSquaredError)
    throw ConfigError("train_sequential: loss must be mean_squared_error");

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t in_dim = set.pairs[0].first.width();
  const std::size_t out_dim = set.pairs[0].second.width();
  VanillaRnnParams p = init_rnn_params(
      in_dim, static_cast<std::size_t>(cfg.hidden_dim), out_dim,
      derive_seed(cfg.seed, "train.sequential.init"), cfg.init_scale);

  TrainReport report;
  report.initial_loss = evaluate_mse(p, set);
  const std::size_t n = set.pairs.size();
  const std::size_t batch =
      cfg.batch_size <= 0 ? n : std::min(static_cast<std::size_t>(cfg.batch_size), n);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      RnnParamGrads g = RnnParamGrads::zeros_like(p);
      for (std::size_t k = start; k < stop; ++k)
        epoch_loss += rnn_param_gradients(p, set.pairs[k].first, set.pairs[k].second, g);
      const double lr = cfg.learning_rate / static_cast<double>(stop - start);
      axpy(p.w_in, -lr, g.w_in);
      axpy(p.w, -lr, g.w);
      axpy(p.w_out, -lr, g.w_out);
      axpy(p.b_h, -lr, g.b_h);
      axpy(p.b_y, -lr, g.b_y);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      throw TrainError("train_sequential: loss diverged at epoch " +
                       std::to_string(epoch + 1));
    report.loss_curve.push_back(epoch_loss);
  }
  report.final_loss = evaluate_mse(p, set);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(p), std::move(report)};
}

// Minibatch gradient descent on cross-entropy; the visit order reshuffles
// every epoch from the run seed.
inline std::pair<LstmClassifierParams, TrainReport> train_classifier(
    const LabeledCorpus& corpus, const EmbeddingDictionary& dict,
    const TrainConfig& cfg) {
  if (corpus.items.empty()) throw ConfigError("train_classifier: empty corpus");
  if (cfg.epochs < 0 || !(cfg.learning_rate > 0.0) || cfg.batch_size < 1)
    throw ConfigError("train_classifier: bad epochs/learning_rate/batch_size");
  if (cfg.loss != Loss::CrossEntropy)
    throw ConfigError("train_classifier: loss must be cross_entropy");
  for (const auto& [tokens, label] : corpus.items)
    if (label != 0 && label != 1)
      throw ConfigError("train_classifier: labels must be binary");

  const auto t0 = std::chrono::steady_clock::now();
  LstmClassifierParams p = init_lstm_params(
      dict, static_cast<std::size_t>(cfg.hidden_dim),
      derive_seed(cfg.seed, "train.classifier.init"), cfg.init_scale);

  Rng shuffle_rng(derive_seed(cfg.seed, "train.classifier.shuffle"));
  std::vector<std::size_t> order(corpus.items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainReport report;
  report.initial_loss = evaluate_cross_entropy(p, corpus);
  const std::size_t n = corpus.items.size();
  const auto batch = std::min(static_cast<std::size_t>(cfg.batch_size), n);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    detail::shuffle_indices(order, shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      LstmParamGrads g = LstmParamGrads::zeros_like(p);
      for (std::size_t k = start; k < stop; ++k) {
        const auto& [tokens, label] = corpus.items[order[k]];
        epoch_loss += lstm_param_gradients(p, tokens, label, g);
      }
      double lr = cfg.learning_rate / static_cast<double>(stop - start);
      if (cfg.clip_gradients) {
        const double norm =
            std::sqrt(detail::grads_sq_norm(g)) / static_cast<double>(stop - start);
        if (norm > cfg.clip_norm) lr *= cfg.clip_norm / norm;
      }
      axpy(p.embedding, -lr, g.embedding);
      axpy(p.gate_input.w, -lr, g.wi);
      axpy(p.gate_forget.w, -lr, g.wf);
      axpy(p.gate_output.w, -lr, g.wo);
      axpy(p.gate_candidate.w, -lr, g.wg);
      axpy(p.gate_input.b, -lr, g.bi);
      axpy(p.gate_forget.b, -lr, g.bf);
      axpy(p.gate_output.b, -lr, g.bo);
      axpy(p.gate_candidate.b, -lr, g.bg);
      axpy(p.w_out, -lr, g.w_out);
      axpy(p.b_out, -lr, g.b_out);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      throw TrainError("train_classifier: loss diverged at epoch " +
                       std::to_string(epoch + 1));
    report.loss_curve.push_back(epoch_loss);
  }
  report.final_loss = evaluate_cross_entropy(p, corpus);
  report.final_accuracy = evaluate_accuracy(p, corpus);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(p), std::move(report)};
}

}  // namespace advseq

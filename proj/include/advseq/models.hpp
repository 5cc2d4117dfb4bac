// The two network architectures: a vanilla sequence-to-sequence RNN
// (tanh hidden state, affine output per step) and an LSTM binary classifier
// (embedding -> LSTM -> mean pooling -> softmax). Forward passes are pure
// and return full traces so the differentiation module can reuse them.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "advseq/linalg.hpp"

namespace advseq {

// Time-ordered list of fixed-width real vectors.
struct Sequence {
  std::vector<Vec> steps;

  Sequence() = default;
  static Sequence zeros(std::size_t len, std::size_t width) {
    Sequence s;
    s.steps.assign(len, Vec(width));
    return s;
  }

  std::size_t len() const { return steps.size(); }
  std::size_t width() const { return steps.empty() ? 0 : steps[0].dim(); }

  void validate() const {
    if (steps.empty()) throw ShapeError("Sequence: no steps");
    for (const Vec& v : steps)
      if (v.dim() != steps[0].dim())
        throw ShapeError("Sequence: step widths differ, " +
                         std::to_string(steps[0].dim()) + " vs " +
                         std::to_string(v.dim()));
  }

  bool operator==(const Sequence&) const = default;
};

// Token ids into an embedding dictionary; id 0 is the out-of-vocabulary
// keyword.
struct TokenSequence {
  std::vector<int> tokens;

  std::size_t len() const { return tokens.size(); }
  bool operator==(const TokenSequence&) const = default;
};

struct VanillaRnnParams {
  Mat w_in;   // hidden x input
  Mat w;      // hidden x hidden
  Mat w_out;  // output x hidden
  Vec b_h;    // hidden
  Vec b_y;    // output

  std::size_t input_dim() const { return w_in.cols; }
  std::size_t hidden_dim() const { return w_in.rows; }
  std::size_t output_dim() const { return w_out.rows; }

  void validate() const {
    if (w.rows != hidden_dim() || w.cols != hidden_dim())
      throw ShapeError("VanillaRnnParams: w is " + shape_str(w) +
                       ", expected " + std::to_string(hidden_dim()) + "x" +
                       std::to_string(hidden_dim()));
    if (w_out.cols != hidden_dim())
      throw ShapeError("VanillaRnnParams: w_out is " + shape_str(w_out) +
                       ", hidden dim is " + std::to_string(hidden_dim()));
    if (b_h.dim() != hidden_dim() || b_y.dim() != output_dim())
      throw ShapeError("VanillaRnnParams: bias dims " +
                       std::to_string(b_h.dim()) + "/" + std::to_string(b_y.dim()) +
                       " do not match " + std::to_string(hidden_dim()) + "/" +
                       std::to_string(output_dim()));
    if (!is_finite(w_in) || !is_finite(w) || !is_finite(w_out) ||
        !is_finite(b_h) || !is_finite(b_y))
      throw ConfigError("VanillaRnnParams: non-finite entries");
  }
};

struct TanhActivation {
  static double apply(double a) { return std::tanh(a); }
  // derivative expressed through the activation output
  static double deriv_from_output(double h) { return 1.0 - h * h; }
};

// Test hook: with the squashing removed the network is linear and its
// input Jacobian no longer depends on the input.
struct IdentityActivation {
  static double apply(double a) { return a; }
  static double deriv_from_output(double) { return 1.0; }
};

struct RnnTrace {
  Sequence outputs;
  Sequence hidden;
};

// h(t) = act(w_in x(t) + w h(t-1) + b_h), h(0) = 0; y(t) = w_out h(t) + b_y.
template <class Act = TanhActivation>
inline RnnTrace rnn_forward(const VanillaRnnParams& p, const Sequence& x) {
  x.validate();
  if (x.width() != p.input_dim())
    throw ShapeError("rnn_forward: input width " + std::to_string(x.width()) +
                     ", model expects " + std::to_string(p.input_dim()));
  RnnTrace tr;
  tr.outputs.steps.reserve(x.len());
  tr.hidden.steps.reserve(x.len());
  Vec h(p.hidden_dim());
  for (const Vec& xt : x.steps) {
    Vec a = matvec(p.w_in, xt);
    add_inplace(a, matvec(p.w, h));
    add_inplace(a, p.b_h);
    for (std::size_t i = 0; i < a.dim(); ++i) a[i] = Act::apply(a[i]);
    h = a;
    Vec y = matvec(p.w_out, h);
    add_inplace(y, p.b_y);
    tr.hidden.steps.push_back(h);
    tr.outputs.steps.push_back(std::move(y));
  }
  return tr;
}

// Gate weights act on concat(x_t, h_{t-1}).
struct LstmGate {
  Mat w;  // hidden x (embed + hidden)
  Vec b;  // hidden
};

struct LstmClassifierParams {
  Mat embedding;  // vocab x embed
  LstmGate gate_input;
  LstmGate gate_forget;
  LstmGate gate_output;
  LstmGate gate_candidate;
  Mat w_out;  // 2 x hidden
  Vec b_out;  // 2

  std::size_t vocab_size() const { return embedding.rows; }
  std::size_t embed_dim() const { return embedding.cols; }
  std::size_t hidden_dim() const { return gate_input.w.rows; }
  static constexpr std::size_t n_classes() { return 2; }

  void validate() const {
    if (vocab_size() < 2) throw ConfigError("LstmClassifierParams: vocab_size < 2");
    const std::size_t z = embed_dim() + hidden_dim();
    for (const LstmGate* g :
         {&gate_input, &gate_forget, &gate_output, &gate_candidate}) {
      if (g->w.rows != hidden_dim() || g->w.cols != z)
        throw ShapeError("LstmClassifierParams: gate weight is " +
                         shape_str(g->w) + ", expected " +
                         std::to_string(hidden_dim()) + "x" + std::to_string(z));
      if (g->b.dim() != hidden_dim())
        throw ShapeError("LstmClassifierParams: gate bias dim " +
                         std::to_string(g->b.dim()));
    }
    if (w_out.rows != n_classes() || w_out.cols != hidden_dim())
      throw ShapeError("LstmClassifierParams: w_out is " + shape_str(w_out) +
                       ", expected 2x" + std::to_string(hidden_dim()));
    if (b_out.dim() != n_classes())
      throw ShapeError("LstmClassifierParams: b_out dim " +
                       std::to_string(b_out.dim()));
  }
};

// Everything the backward passes need, kept per step.
struct LstmTrace {
  Sequence inputs;  // embedded tokens
  Sequence gate_i, gate_f, gate_o, gate_g;
  Sequence cell;    // c_t
  Sequence hidden;  // h_t
  Vec pooled;
  Vec logits;
  Vec probs;

  int predicted() const { return logits[1] > logits[0] ? 1 : 0; }
};

inline Vec embedding_row(const LstmClassifierParams& p, int token) {
  if (token < 0 || static_cast<std::size_t>(token) >= p.vocab_size())
    throw ConfigError("token id " + std::to_string(token) +
                      " outside vocabulary of size " +
                      std::to_string(p.vocab_size()));
  Vec e(p.embed_dim());
  for (std::size_t k = 0; k < p.embed_dim(); ++k) e[k] = p.embedding(token, k);
  return e;
}

inline Sequence embed_tokens(const LstmClassifierParams& p, const TokenSequence& s) {
  if (s.tokens.empty()) throw ConfigError("embed_tokens: empty token sequence");
  Sequence seq;
  seq.steps.reserve(s.len());
  for (int t : s.tokens) seq.steps.push_back(embedding_row(p, t));
  return seq;
}

// LSTM recurrence over an already-embedded sequence, h(0) = c(0) = 0,
// mean pooling over hidden states, affine softmax head.
inline LstmTrace lstm_forward_embedded(const LstmClassifierParams& p,
                                       const Sequence& emb) {
  emb.validate();
  if (emb.width() != p.embed_dim())
    throw ShapeError("lstm_forward_embedded: input width " +
                     std::to_string(emb.width()) + ", model expects " +
                     std::to_string(p.embed_dim()));
  const std::size_t T = emb.len();
  LstmTrace tr;
  tr.inputs = emb;
  Vec h(p.hidden_dim());
  Vec c(p.hidden_dim());
  Vec pooled(p.hidden_dim());
  for (std::size_t t = 0; t < T; ++t) {
    const Vec z = concat(emb.steps[t], h);
    Vec ai = matvec(p.gate_input.w, z);
    add_inplace(ai, p.gate_input.b);
    Vec af = matvec(p.gate_forget.w, z);
    add_inplace(af, p.gate_forget.b);
    Vec ao = matvec(p.gate_output.w, z);
    add_inplace(ao, p.gate_output.b);
    Vec ag = matvec(p.gate_candidate.w, z);
    add_inplace(ag, p.gate_candidate.b);

    const Vec i = sigmoid_vec(ai);
    const Vec f = sigmoid_vec(af);
    const Vec o = sigmoid_vec(ao);
    const Vec g = tanh_vec(ag);

    Vec c_new(p.hidden_dim());
    for (std::size_t k = 0; k < p.hidden_dim(); ++k)
      c_new[k] = f[k] * c[k] + i[k] * g[k];
    c = c_new;
    for (std::size_t k = 0; k < p.hidden_dim(); ++k)
      h[k] = o[k] * std::tanh(c[k]);

    add_inplace(pooled, h);
    tr.gate_i.steps.push_back(i);
    tr.gate_f.steps.push_back(f);
    tr.gate_o.steps.push_back(o);
    tr.gate_g.steps.push_back(g);
    tr.cell.steps.push_back(c);
    tr.hidden.steps.push_back(h);
  }
  for (std::size_t k = 0; k < p.hidden_dim(); ++k)
    pooled[k] /= static_cast<double>(T);
  tr.pooled = pooled;
  tr.logits = matvec(p.w_out, pooled);
  add_inplace(tr.logits, p.b_out);
  tr.probs = softmax(tr.logits);
  return tr;
}

inline LstmTrace lstm_classify(const LstmClassifierParams& p,
                               const TokenSequence& s) {
  return lstm_forward_embedded(p, embed_tokens(p, s));
}

// argmax of the logits; ties break toward class 0.
inline int predict_class(const LstmClassifierParams& p, const TokenSequence& s) {
  return lstm_classify(p, s).predicted();
}

}  // namespace advseq

// Exact input-output derivatives for both models, obtained by unfolding the
// recurrent graph over time and propagating sensitivities backwards per
// output step (or per logit). A central finite-difference evaluator serves
// as the independent oracle.
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "advseq/linalg.hpp"
#include "advseq/models.hpp"

namespace advseq {

// blocks(i, j) holds d(output step j) / d(input step i), out_dim x in_dim.
// Blocks with i > j stay exactly zero: a forward-in-time network cannot let
// future inputs affect past outputs.
struct JacobianTensor {
  std::size_t input_len = 0;
  std::size_t output_len = 0;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<Mat> blocks_;  // row-major over (i, j)

  static JacobianTensor zeros(std::size_t t_in, std::size_t t_out,
                              std::size_t in_dim, std::size_t out_dim) {
    JacobianTensor j;
    j.input_len = t_in;
    j.output_len = t_out;
    j.in_dim = in_dim;
    j.out_dim = out_dim;
    j.blocks_.assign(t_in * t_out, Mat(out_dim, in_dim));
    return j;
  }

  Mat& block(std::size_t i, std::size_t j) { return blocks_[i * output_len + j]; }
  const Mat& block(std::size_t i, std::size_t j) const {
    return blocks_[i * output_len + j];
  }
};

// Analytic Jacobian of the vanilla RNN. One backward sweep per output step j:
// starting from d y_j / d h_j = w_out, walk k = j..0 multiplying in the
// activation derivative at step k, emit the w_in branch as block (k, j) and
// carry the recurrent branch through w.
template <class Act = TanhActivation>
inline JacobianTensor rnn_jacobian(const VanillaRnnParams& p, const Sequence& x) {
  const RnnTrace tr = rnn_forward<Act>(p, x);
  const std::size_t T = x.len();
  JacobianTensor jac = JacobianTensor::zeros(T, T, p.input_dim(), p.output_dim());
  for (std::size_t j = 0; j < T; ++j) {
    Mat g = p.w_out;  // d y_j / d h_k, k starts at j
    for (std::size_t k = j + 1; k-- > 0;) {
      Vec dact(p.hidden_dim());
      for (std::size_t m = 0; m < p.hidden_dim(); ++m)
        dact[m] = Act::deriv_from_output(tr.hidden.steps[k][m]);
      const Mat d = scale_cols(g, dact);  // d y_j / d preact_k
      jac.block(k, j) = matmul(d, p.w_in);
      if (k > 0) g = matmul(d, p.w);
    }
  }
  return jac;
}

// Per (word position i, logit j) gradient of the classifier with respect to
// the embedding input at position i. Gradients are taken against the logits,
// not the probabilities.
struct EmbeddingJacobian {
  std::size_t seq_len = 0;
  std::size_t embed_dim = 0;
  std::vector<std::array<Vec, 2>> grads_;  // [position][logit]

  const Vec& grad(std::size_t pos, int logit) const { return grads_[pos][logit]; }
  Vec& grad(std::size_t pos, int logit) { return grads_[pos][logit]; }
};

namespace detail {

// Backpropagation through mean pooling and the unrolled LSTM for one logit.
// Writes d logit / d x_t into out[t].
inline void lstm_backward_logit(const LstmClassifierParams& p, const LstmTrace& tr,
                                int logit, std::vector<Vec>& out) {
  const std::size_t T = tr.inputs.len();
  const std::size_t H = p.hidden_dim();
  const std::size_t E = p.embed_dim();
  out.assign(T, Vec(E));

  // d logit / d pooled = w_out row; pooling spreads it as 1/T per step.
  Vec dpooled(H);
  for (std::size_t k = 0; k < H; ++k)
    dpooled[k] = p.w_out(static_cast<std::size_t>(logit), k) / static_cast<double>(T);

  Vec dh(H);
  Vec dc(H);
  for (std::size_t t = T; t-- > 0;) {
    add_inplace(dh, dpooled);
    const Vec& i = tr.gate_i.steps[t];
    const Vec& f = tr.gate_f.steps[t];
    const Vec& o = tr.gate_o.steps[t];
    const Vec& g = tr.gate_g.steps[t];
    const Vec& c = tr.cell.steps[t];
    const Vec* c_prev = (t > 0) ? &tr.cell.steps[t - 1] : nullptr;

    Vec da_i(H), da_f(H), da_o(H), da_g(H);
    for (std::size_t k = 0; k < H; ++k) {
      const double tc = std::tanh(c[k]);
      const double do_k = dh[k] * tc;
      const double dc_k = dc[k] + dh[k] * o[k] * (1.0 - tc * tc);
      const double cp = c_prev ? (*c_prev)[k] : 0.0;
      da_i[k] = dc_k * g[k] * i[k] * (1.0 - i[k]);
      da_f[k] = dc_k * cp * f[k] * (1.0 - f[k]);
      da_o[k] = do_k * o[k] * (1.0 - o[k]);
      da_g[k] = dc_k * i[k] * (1.0 - g[k] * g[k]);
      dc[k] = dc_k * f[k];
    }

    Vec dz = matvec_t(p.gate_input.w, da_i);
    add_inplace(dz, matvec_t(p.gate_forget.w, da_f));
    add_inplace(dz, matvec_t(p.gate_output.w, da_o));
    add_inplace(dz, matvec_t(p.gate_candidate.w, da_g));

    out[t] = slice(dz, 0, E);
    dh = slice(dz, E, E + H);
  }
}

}  // namespace detail

inline EmbeddingJacobian embedding_jacobian_from_trace(
    const LstmClassifierParams& p, const LstmTrace& tr) {
  EmbeddingJacobian jac;
  jac.seq_len = tr.inputs.len();
  jac.embed_dim = p.embed_dim();
  jac.grads_.assign(jac.seq_len, {Vec(jac.embed_dim), Vec(jac.embed_dim)});
  std::vector<Vec> dx;
  for (int logit = 0; logit < 2; ++logit) {
    detail::lstm_backward_logit(p, tr, logit, dx);
    for (std::size_t t = 0; t < jac.seq_len; ++t) jac.grads_[t][logit] = dx[t];
  }
  return jac;
}

inline EmbeddingJacobian classifier_embedding_jacobian(
    const LstmClassifierParams& p, const TokenSequence& s) {
  return embedding_jacobian_from_trace(p, lstm_classify(p, s));
}

enum class Loss { MeanSquaredError, CrossEntropy };

inline std::string loss_name(Loss loss) {
  return loss == Loss::MeanSquaredError ? "mean_squared_error" : "cross_entropy";
}

// Mean over every step and coordinate.
inline double sequence_mse(const Sequence& pred, const Sequence& target) {
  if (pred.len() != target.len() || pred.width() != target.width())
    throw ShapeError("sequence_mse: " + std::to_string(pred.len()) + "x" +
                     std::to_string(pred.width()) + " vs " +
                     std::to_string(target.len()) + "x" +
                     std::to_string(target.width()));
  double s = 0.0;
  for (std::size_t t = 0; t < pred.len(); ++t)
    for (std::size_t c = 0; c < pred.width(); ++c) {
      const double d = pred.steps[t][c] - target.steps[t][c];
      s += d * d;
    }
  return s / static_cast<double>(pred.len() * pred.width());
}

// Per input step, d(scalar loss) / d x(t).
struct CostGradient {
  std::vector<Vec> step_grads;
};

// Exact gradient of the sequence loss with respect to every input-step
// coordinate, via one backward sweep over the unfolded graph.
template <class Act = TanhActivation>
inline CostGradient cost_input_gradient(const VanillaRnnParams& p,
                                        const Sequence& x, const Sequence& y_true,
                                        Loss loss) {
  if (loss != Loss::MeanSquaredError)
    throw ConfigError("cost_input_gradient: " + loss_name(loss) +
                      " is not defined for the sequential model");
  const RnnTrace tr = rnn_forward<Act>(p, x);
  if (tr.outputs.len() != y_true.len() || tr.outputs.width() != y_true.width())
    throw ShapeError("cost_input_gradient: target is " +
                     std::to_string(y_true.len()) + "x" +
                     std::to_string(y_true.width()) + ", model output is " +
                     std::to_string(tr.outputs.len()) + "x" +
                     std::to_string(tr.outputs.width()));
  const std::size_t T = x.len();
  const double scale = 2.0 / static_cast<double>(T * p.output_dim());

  CostGradient grad;
  grad.step_grads.assign(T, Vec(p.input_dim()));
  Vec dh(p.hidden_dim());
  for (std::size_t t = T; t-- > 0;) {
    Vec dy(p.output_dim());
    for (std::size_t c = 0; c < p.output_dim(); ++c)
      dy[c] = scale * (tr.outputs.steps[t][c] - y_true.steps[t][c]);
    add_inplace(dh, matvec_t(p.w_out, dy));
    Vec da(p.hidden_dim());
    for (std::size_t k = 0; k < p.hidden_dim(); ++k)
      da[k] = dh[k] * Act::deriv_from_output(tr.hidden.steps[t][k]);
    grad.step_grads[t] = matvec_t(p.w_in, da);
    dh = matvec_t(p.w, da);
  }
  return grad;
}

// Central differences (f(x + h e) - f(x - h e)) / 2h per input coordinate.
// Independent of the analytic path; used as the oracle for it.
inline JacobianTensor finite_diff_jacobian(
    const std::function<Sequence(const Sequence&)>& f, const Sequence& x,
    double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_jacobian: step must be > 0");
  x.validate();
  const Sequence y0 = f(x);
  JacobianTensor jac =
      JacobianTensor::zeros(x.len(), y0.len(), x.width(), y0.width());
  Sequence probe = x;
  for (std::size_t i = 0; i < x.len(); ++i) {
    for (std::size_t c = 0; c < x.width(); ++c) {
      const double orig = probe.steps[i][c];
      probe.steps[i][c] = orig + h;
      const Sequence yp = f(probe);
      probe.steps[i][c] = orig - h;
      const Sequence ym = f(probe);
      probe.steps[i][c] = orig;
      if (yp.len() != y0.len() || yp.width() != y0.width())
        throw ShapeError("finite_diff_jacobian: function output shape varies");
      for (std::size_t j = 0; j < y0.len(); ++j)
        for (std::size_t r = 0; r < y0.width(); ++r)
          jac.block(i, j)(r, c) =
              (yp.steps[j][r] - ym.steps[j][r]) / (2.0 * h);
    }
  }
  return jac;
}

}  // namespace advseq

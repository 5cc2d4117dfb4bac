// The three crafting procedures: the one-shot gradient-sign perturbation for
// continuous inputs, the greedy word-swap attack on the classifier, and the
// Jacobian-guided attack that steers chosen steps of a sequential output.
#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "advseq/data.hpp"
#include "advseq/diff.hpp"
#include "advseq/linalg.hpp"
#include "advseq/models.hpp"

namespace advseq {

template <class SeqT>
struct AttackOutcome {
  SeqT adversarial;
  bool success = false;
  std::vector<int> changed_positions;
  double perturbation_norm = 0.0;  // inf-norm for continuous, swap count for tokens
  int iterations = 0;
  std::string note;
};

struct FgsmConfig {
  double epsilon = 0.1;
};

// x* = x + epsilon * sign(d loss / d x). Every coordinate moves by exactly
// +epsilon, -epsilon, or not at all. success records whether the loss
// strictly increased; with epsilon 0 the input is returned unchanged and
// success is false.
inline AttackOutcome<Sequence> fgsm(const VanillaRnnParams& p, const Sequence& x,
                                    const Sequence& y_true, Loss loss,
                                    const FgsmConfig& cfg) {
  if (!(cfg.epsilon >= 0.0) || !std::isfinite(cfg.epsilon))
    throw ConfigError("fgsm: epsilon must be finite and >= 0");
  const CostGradient grad = cost_input_gradient(p, x, y_true, loss);
  AttackOutcome<Sequence> out;
  out.adversarial = x;
  out.iterations = 1;
  for (std::size_t t = 0; t < x.len(); ++t) {
    bool touched = false;
    for (std::size_t c = 0; c < x.width(); ++c) {
      const double step = cfg.epsilon * sgn(grad.step_grads[t][c]);
      if (step != 0.0) {
        out.adversarial.steps[t][c] += step;
        touched = true;
        out.perturbation_norm = std::max(out.perturbation_norm, std::fabs(step));
      }
    }
    if (touched) out.changed_positions.push_back(static_cast<int>(t));
  }
  const double before = sequence_mse(rnn_forward(p, x).outputs, y_true);
  const double after = sequence_mse(rnn_forward(p, out.adversarial).outputs, y_true);
  out.success = after > before;
  return out;
}

struct WordSwapConfig {
  int max_changed_words = 1;
};

inline int word_swap_budget(std::size_t seq_len, double fraction = 0.25) {
  const auto b = static_cast<int>(
      std::ceil(fraction * static_cast<double>(seq_len)));
  return std::clamp(b, 1, static_cast<int>(seq_len));
}

// One greedy swap step, recorded for the heuristic-vs-oracle audit.
struct SwapRecord {
  int position;
  int old_token;
  int new_token;
  double logit_before;  // current-class logit before the swap
  double logit_after;
};

struct WordSwapResult {
  AttackOutcome<TokenSequence> outcome;
  int original_class = 0;
  int final_class = 0;
  std::vector<SwapRecord> swaps;
};

// Greedy word-swap attack. Positions are visited in descending L1 saliency
// of the current-class logit gradient, recomputed after every swap. The
// replacement is the dictionary word whose embedding-difference sign pattern
// best matches the direction that lowers the current-class logit; ties break
// toward the lowest token id. Candidate distances are measured in the
// model's embedding space, the space the Jacobian lives in; the dictionary
// supplies the candidate id set.
inline WordSwapResult craft_word_swap(const LstmClassifierParams& p,
                                      const TokenSequence& s,
                                      const EmbeddingDictionary& dict,
                                      const WordSwapConfig& cfg) {
  dict.validate();
  if (dict.vocab_size() != p.vocab_size())
    throw ShapeError("craft_word_swap: dictionary has " +
                     std::to_string(dict.vocab_size()) + " words, model has " +
                     std::to_string(p.vocab_size()));
  if (cfg.max_changed_words < 1)
    throw ConfigError("craft_word_swap: budget must be >= 1");
  const std::size_t len = s.len();
  const int budget = std::min(cfg.max_changed_words, static_cast<int>(len));

  WordSwapResult res;
  LstmTrace tr = lstm_classify(p, s);
  const int y = tr.predicted();
  res.original_class = y;
  res.outcome.adversarial = s;
  TokenSequence& adv = res.outcome.adversarial;

  std::vector<char> visited(len, 0);
  while (static_cast<int>(res.swaps.size()) < budget) {
    if (tr.predicted() != y) break;
    const EmbeddingJacobian jac = embedding_jacobian_from_trace(p, tr);

    int pos = -1;
    double best_saliency = -1.0;
    for (std::size_t i = 0; i < len; ++i) {
      if (visited[i]) continue;
      const double sal = l1_norm(jac.grad(i, y));
      if (sal > best_saliency) {
        best_saliency = sal;
        pos = static_cast<int>(i);
      }
    }
    if (pos < 0) break;  // every position already visited
    visited[static_cast<std::size_t>(pos)] = 1;

    // Direction that decreases the current-class logit.
    Vec dir(p.embed_dim());
    for (std::size_t k = 0; k < p.embed_dim(); ++k)
      dir[k] = -sgn(jac.grad(static_cast<std::size_t>(pos), y)[k]);

    const int cur_token = adv.tokens[static_cast<std::size_t>(pos)];
    const Vec cur_emb = embedding_row(p, cur_token);
    int best_z = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int z = 0; z < static_cast<int>(p.vocab_size()); ++z) {
      if (z == cur_token) continue;
      double dist = 0.0;
      for (std::size_t k = 0; k < p.embed_dim(); ++k)
        dist += std::fabs(sgn(p.embedding(static_cast<std::size_t>(z), k) -
                              cur_emb[k]) -
                          dir[k]);
      if (dist < best_dist) {
        best_dist = dist;
        best_z = z;
      }
    }
    if (best_z < 0) break;

    const double logit_before = tr.logits[y];
    adv.tokens[static_cast<std::size_t>(pos)] = best_z;
    tr = lstm_classify(p, adv);
    res.swaps.push_back({pos, cur_token, best_z, logit_before, tr.logits[y]});
    res.outcome.changed_positions.push_back(pos);
  }

  res.final_class = tr.predicted();
  res.outcome.success = res.final_class != y;
  res.outcome.iterations = static_cast<int>(res.swaps.size());
  res.outcome.perturbation_norm =
      static_cast<double>(res.outcome.changed_positions.size());
  return res;
}

// One targeted scalar of the output sequence: steer step/coord toward the
// desired value. The perturbation direction follows sgn(J) * sgn(desired).
struct SeqTarget {
  int step;
  int coord;
  double desired;
};

struct SequentialAttackConfig {
  std::vector<SeqTarget> targets;
  double delta = 0.25;           // acceptance margin per target
  double off_target_ratio = 2.0; // required on/off influence ratio, >= 1
  double step_size = 0.02;
  int max_iters = 100;
};

// Jacobian-guided steering of targeted output steps. Each iteration scores
// every input coordinate by its influence on the target relative to its
// strongest influence on any other output scalar, perturbs the selective
// ones, and re-evaluates. Satisfied targets are left alone. Input steps
// after the last targeted step score exactly zero and are never touched.
inline AttackOutcome<Sequence> craft_sequential(const VanillaRnnParams& p,
                                                const Sequence& x,
                                                const SequentialAttackConfig& cfg) {
  constexpr double kOffTargetFloor = 1e-12;
  x.validate();
  if (cfg.targets.empty())
    throw ConfigError("craft_sequential: no targets given");
  if (!(cfg.delta > 0.0) || !(cfg.step_size > 0.0) || cfg.max_iters < 1 ||
      !(cfg.off_target_ratio >= 1.0))
    throw ConfigError("craft_sequential: bad config (delta/step/iters/ratio)");
  const std::size_t T = x.len();
  for (const SeqTarget& t : cfg.targets) {
    if (t.step < 0 || static_cast<std::size_t>(t.step) >= T ||
        t.coord < 0 || static_cast<std::size_t>(t.coord) >= p.output_dim())
      throw ConfigError("craft_sequential: target (" + std::to_string(t.step) +
                        ", " + std::to_string(t.coord) + ") out of range");
  }

  AttackOutcome<Sequence> out;
  out.adversarial = x;
  Sequence& adv = out.adversarial;
  Sequence current = rnn_forward(p, adv).outputs;

  auto satisfied = [&](const SeqTarget& t) {
    return std::fabs(current.steps[static_cast<std::size_t>(t.step)]
                                  [static_cast<std::size_t>(t.coord)] -
                     t.desired) < cfg.delta;
  };
  auto all_satisfied = [&] {
    return std::all_of(cfg.targets.begin(), cfg.targets.end(), satisfied);
  };

  if (all_satisfied()) {
    out.success = true;
    return out;
  }

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const JacobianTensor jac = rnn_jacobian(p, adv);
    Sequence delta_x = Sequence::zeros(T, p.input_dim());
    bool selected_any = false;

    for (const SeqTarget& t : cfg.targets) {
      if (satisfied(t)) continue;
      const auto tj = static_cast<std::size_t>(t.step);
      const auto tc = static_cast<std::size_t>(t.coord);
      for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t cin = 0; cin < p.input_dim(); ++cin) {
          const double on = std::fabs(jac.block(i, tj)(tc, cin));
          double off = 0.0;
          for (std::size_t k = 0; k < T; ++k)
            for (std::size_t r = 0; r < p.output_dim(); ++r) {
              if (k == tj && r == tc) continue;
              off = std::max(off, std::fabs(jac.block(i, k)(r, cin)));
            }
          if (on / (off + kOffTargetFloor) >= cfg.off_target_ratio) {
            delta_x.steps[i][cin] +=
                cfg.step_size * sgn(jac.block(i, tj)(tc, cin)) * sgn(t.desired);
            selected_any = true;
          }
        }
      }
    }

    out.iterations = iter + 1;
    if (!selected_any) {
      out.note = "no input coordinate passed the selectivity threshold";
      break;
    }
    for (std::size_t i = 0; i < T; ++i)
      add_inplace(adv.steps[i], delta_x.steps[i]);
    current = rnn_forward(p, adv).outputs;
    if (all_satisfied()) {
      out.success = true;
      break;
    }
  }

  for (std::size_t i = 0; i < T; ++i) {
    const double d = linf_norm(sub(adv.steps[i], x.steps[i]));
    if (d > 0.0) out.changed_positions.push_back(static_cast<int>(i));
    out.perturbation_norm = std::max(out.perturbation_norm, d);
  }
  return out;
}

}  // namespace advseq

// shared builders for the attack/training/serialization tests
#pragma once

#include "advseq/data.hpp"
#include "advseq/linalg.hpp"
#include "advseq/models.hpp"

namespace testutil {

using namespace advseq;

inline Sequence random_sequence(Rng& rng, std::size_t len, std::size_t width,
                                double lo = -1.5, double hi = 1.5) {
  Sequence s = Sequence::zeros(len, width);
  for (auto& step : s.steps)
    for (double& x : step.data) x = rng.next_uniform(lo, hi);
  return s;
}

inline LstmClassifierParams random_lstm(Rng& rng, std::size_t vocab,
                                        std::size_t embed, std::size_t hidden,
                                        double scale = 0.6) {
  LstmClassifierParams p;
  p.embedding = Mat(vocab, embed);
  for (double& x : p.embedding.data) x = rng.next_uniform(-scale, scale);
  const std::size_t z = embed + hidden;
  for (LstmGate* g :
       {&p.gate_input, &p.gate_forget, &p.gate_output, &p.gate_candidate}) {
    g->w = Mat(hidden, z);
    g->b = Vec(hidden);
    for (double& x : g->w.data) x = rng.next_uniform(-scale, scale);
    for (double& x : g->b.data) x = rng.next_uniform(-scale, scale);
  }
  p.w_out = Mat(2, hidden);
  p.b_out = Vec(2);
  for (double& x : p.w_out.data) x = rng.next_uniform(-scale, scale);
  for (double& x : p.b_out.data) x = rng.next_uniform(-scale, scale);
  return p;
}

inline TokenSequence random_tokens(Rng& rng, std::size_t len, std::size_t vocab) {
  TokenSequence s;
  for (std::size_t i = 0; i < len; ++i)
    s.tokens.push_back(static_cast<int>(rng.next_int(0, static_cast<int>(vocab) - 1)));
  return s;
}

inline EmbeddingDictionary dict_from_embedding(const Mat& embedding) {
  std::vector<std::string> words;
  words.emplace_back("unk");
  for (std::size_t i = 1; i < embedding.rows; ++i)
    words.push_back("t" + std::to_string(i));
  return EmbeddingDictionary::build(std::move(words), embedding);
}

}  // namespace testutil

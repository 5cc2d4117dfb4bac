// Embedding dictionary, tokenization, and the two synthetic generators:
// a cue-word sentiment corpus (desk-scale stand-in for a review dataset)
// and correlated input/output sequence pairs for the sequential model.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advseq/linalg.hpp"
#include "advseq/models.hpp"

namespace advseq {

// id 0 is reserved for the out-of-vocabulary keyword.
struct EmbeddingDictionary {
  std::vector<std::string> words;           // index == token id
  std::unordered_map<std::string, int> ids;
  Mat vectors;                              // vocab x embed

  std::size_t vocab_size() const { return words.size(); }
  std::size_t embed_dim() const { return vectors.cols; }

  int id_of(const std::string& w) const {
    auto it = ids.find(w);
    return it == ids.end() ? 0 : it->second;
  }

  const std::string& word_of(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= words.size())
      throw ConfigError("word_of: id " + std::to_string(id) + " out of range");
    return words[static_cast<std::size_t>(id)];
  }

  Vec embedding(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size())
      throw ConfigError("embedding: id " + std::to_string(id) + " out of range");
    Vec e(embed_dim());
    for (std::size_t k = 0; k < embed_dim(); ++k)
      e[k] = vectors(static_cast<std::size_t>(id), k);
    return e;
  }

  void validate() const {
    if (vocab_size() < 2) throw ConfigError("dictionary needs at least 2 words");
    if (vectors.rows != vocab_size())
      throw ShapeError("dictionary: " + std::to_string(vocab_size()) +
                       " words but embedding matrix is " + shape_str(vectors));
    if (!is_finite(vectors))
      throw ConfigError("dictionary: non-finite embedding entries");
    for (std::size_t i = 0; i < words.size(); ++i) {
      auto it = ids.find(words[i]);
      if (it == ids.end() || it->second != static_cast<int>(i))
        throw ConfigError("dictionary: word/id tables out of sync at id " +
                          std::to_string(i));
    }
  }

  static EmbeddingDictionary build(std::vector<std::string> word_list,
                                   Mat embedding) {
    EmbeddingDictionary d;
    d.words = std::move(word_list);
    d.vectors = std::move(embedding);
    for (std::size_t i = 0; i < d.words.size(); ++i)
      d.ids.emplace(d.words[i], static_cast<int>(i));
    d.validate();
    return d;
  }
};

// Lowercase, split on anything that is not a letter or digit, map unknown
// words to id 0.
inline TokenSequence tokenize(const std::string& text,
                              const EmbeddingDictionary& dict) {
  TokenSequence seq;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      seq.tokens.push_back(dict.id_of(word));
      word.clear();
    }
  };
  for (const char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u))
      word.push_back(static_cast<char>(std::tolower(u)));
    else
      flush();
  }
  flush();
  if (seq.tokens.empty())
    throw ConfigError("tokenize: no tokens in input text");
  return seq;
}

inline std::string detokenize(const TokenSequence& s,
                              const EmbeddingDictionary& dict) {
  std::string out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += dict.word_of(s.tokens[i]);
  }
  return out;
}

struct LabeledCorpus {
  std::vector<std::pair<TokenSequence, int>> items;  // label in {0, 1}
  std::string split = "train";
};

struct CorpusConfig {
  int vocab_size = 500;
  int embed_dim = 16;
  int n_items = 200;
  int min_len = 8;
  int max_len = 20;
  double cue_rate = 0.15;  // chance of a cue word per slot
};

// Sentences mix neutral filler with at least one cue word of the sentence's
// label class; labels alternate so any prefix is balanced within one.
// Embeddings start as standard normal draws and get trained jointly later.
inline std::pair<LabeledCorpus, EmbeddingDictionary> generate_synthetic_corpus(
    std::uint64_t seed, const CorpusConfig& cfg) {
  if (cfg.vocab_size < 20)
    throw ConfigError("generate_synthetic_corpus: vocab_size must be >= 20");
  if (cfg.n_items < 1 || cfg.min_len < 1 || cfg.max_len < cfg.min_len ||
      cfg.embed_dim < 1)
    throw ConfigError("generate_synthetic_corpus: infeasible configuration");

  const int n_cue = std::max(2, cfg.vocab_size / 10);
  const int n_filler = cfg.vocab_size - 1 - 2 * n_cue;
  if (n_filler < 1)
    throw ConfigError("generate_synthetic_corpus: vocabulary too small for cue sets");

  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(cfg.vocab_size));
  words.emplace_back("unk");
  std::vector<int> pos_ids, neg_ids, filler_ids;
  for (int i = 0; i < n_cue; ++i) {
    pos_ids.push_back(static_cast<int>(words.size()));
    words.push_back("pos" + std::to_string(i));
  }
  for (int i = 0; i < n_cue; ++i) {
    neg_ids.push_back(static_cast<int>(words.size()));
    words.push_back("neg" + std::to_string(i));
  }
  for (int i = 0; i < n_filler; ++i) {
    filler_ids.push_back(static_cast<int>(words.size()));
    words.push_back("w" + std::to_string(i));
  }

  Rng rng(seed);
  Mat emb(static_cast<std::size_t>(cfg.vocab_size),
          static_cast<std::size_t>(cfg.embed_dim));
  for (double& x : emb.data) x = rng.next_normal(0.0, 1.0);
  EmbeddingDictionary dict = EmbeddingDictionary::build(std::move(words), std::move(emb));

  LabeledCorpus corpus;
  corpus.items.reserve(static_cast<std::size_t>(cfg.n_items));
  for (int n = 0; n < cfg.n_items; ++n) {
    const int label = (n % 2 == 0) ? 1 : 0;
    const auto& cues = (label == 1) ? pos_ids : neg_ids;
    const auto len =
        static_cast<std::size_t>(rng.next_int(cfg.min_len, cfg.max_len));
    TokenSequence s;
    s.tokens.reserve(len);
    bool has_cue = false;
    for (std::size_t k = 0; k < len; ++k) {
      if (rng.next_unit() < cfg.cue_rate) {
        s.tokens.push_back(cues[static_cast<std::size_t>(
            rng.next_int(0, static_cast<int>(cues.size()) - 1))]);
        has_cue = true;
      } else {
        s.tokens.push_back(filler_ids[static_cast<std::size_t>(
            rng.next_int(0, static_cast<int>(filler_ids.size()) - 1))]);
      }
    }
    if (!has_cue) {
      const auto slot = static_cast<std::size_t>(
          rng.next_int(0, static_cast<int>(len) - 1));
      s.tokens[slot] = cues[static_cast<std::size_t>(
          rng.next_int(0, static_cast<int>(cues.size()) - 1))];
    }
    corpus.items.emplace_back(std::move(s), label);
  }
  return {std::move(corpus), std::move(dict)};
}

// One designated input source feeds each output coordinate.
struct CorrelationTarget {
  int out_coord;
  int src_coord;
  int lag;  // 1 or 2
  double alpha;
};

struct SeqPairConfig {
  int n_pairs = 100;
  int len = 10;
  int in_width = 5;
  int out_width = 3;
  double alpha = 1.0;
};

struct SeqPairSet {
  std::vector<std::pair<Sequence, Sequence>> pairs;
  SeqPairConfig config;
  std::vector<CorrelationTarget> correlation;
  std::uint64_t seed = 0;
};

// Inputs are standard normal, outputs are N(0, 1e-4) noise plus
// alpha * input[j - lag][src] on each output coordinate's designated source.
// Sources are drawn without replacement so each output coordinate listens to
// a distinct input coordinate; the map is part of the dataset metadata.
inline SeqPairSet generate_correlated_pairs(std::uint64_t seed,
                                            const SeqPairConfig& cfg) {
  if (cfg.n_pairs < 1 || cfg.len < 3 || cfg.in_width < 1 || cfg.out_width < 1)
    throw ConfigError("generate_correlated_pairs: infeasible configuration");
  if (cfg.out_width > cfg.in_width)
    throw ConfigError(
        "generate_correlated_pairs: out_width exceeds in_width, distinct "
        "sources are impossible");

  Rng rng(seed);
  SeqPairSet set;
  set.config = cfg;
  set.seed = seed;

  std::vector<int> candidates(static_cast<std::size_t>(cfg.in_width));
  for (int i = 0; i < cfg.in_width; ++i) candidates[static_cast<std::size_t>(i)] = i;
  for (int c = 0; c < cfg.out_width; ++c) {
    const auto pick = static_cast<std::size_t>(
        rng.next_int(0, static_cast<int>(candidates.size()) - 1));
    const int src = candidates[pick];
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
    const int lag = 1 + static_cast<int>(rng.next_u64() & 1u);
    set.correlation.push_back({c, src, lag, cfg.alpha});
  }

  set.pairs.reserve(static_cast<std::size_t>(cfg.n_pairs));
  for (int n = 0; n < cfg.n_pairs; ++n) {
    Sequence in = Sequence::zeros(static_cast<std::size_t>(cfg.len),
                                  static_cast<std::size_t>(cfg.in_width));
    Sequence out = Sequence::zeros(static_cast<std::size_t>(cfg.len),
                                   static_cast<std::size_t>(cfg.out_width));
    for (auto& step : in.steps)
      for (double& x : step.data) x = rng.next_normal(0.0, 1.0);
    for (auto& step : out.steps)
      for (double& x : step.data) x = rng.next_normal(0.0, 1e-4);
    for (const CorrelationTarget& t : set.correlation) {
      for (int j = t.lag; j < cfg.len; ++j)
        out.steps[static_cast<std::size_t>(j)][static_cast<std::size_t>(t.out_coord)] +=
            t.alpha *
            in.steps[static_cast<std::size_t>(j - t.lag)][static_cast<std::size_t>(t.src_coord)];
    }
    set.pairs.emplace_back(std::move(in), std::move(out));
  }
  return set;
}

}  // namespace advseq

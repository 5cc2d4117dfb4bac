// Dataset file formats.
//   dictionary: "vocab_size embed_dim format" header, word/id lines, then
//               the embedding matrix as CSV rows or raw little-endian floats
//   corpus:     UTF-8, one "label<TAB>text" per line
//   pair set:   CSV (pair_id, step, role, coord, value) plus a JSON metadata
//               file carrying the correlation map and the generator seed
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advseq/data.hpp"
#include "advseq/linalg.hpp"
#include "advseq/serialize.hpp"

namespace advseq {

// %.17g round-trips any finite double exactly through strtod.
inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("");
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad number '" + s + "' in " + context);
  }
}

inline std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string file_hash_hex(const std::string& path) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(detail::read_file(path))));
  return buf;
}

// ---- dictionary ----

inline void save_dictionary(const std::string& path, const EmbeddingDictionary& dict,
                            bool binary_embeddings = false) {
  dict.validate();
  std::string buf;
  buf += std::to_string(dict.vocab_size()) + " " + std::to_string(dict.embed_dim()) +
         " " + (binary_embeddings ? "bin" : "csv") + "\n";
  for (std::size_t i = 0; i < dict.vocab_size(); ++i)
    buf += dict.words[i] + " " + std::to_string(i) + "\n";
  if (binary_embeddings) {
    for (double x : dict.vectors.data) detail::put_f64(buf, x);
  } else {
    for (std::size_t r = 0; r < dict.vectors.rows; ++r) {
      for (std::size_t c = 0; c < dict.vectors.cols; ++c) {
        if (c > 0) buf += ",";
        buf += fmt_double(dict.vectors(r, c));
      }
      buf += "\n";
    }
  }
  detail::write_file(path, buf);
}

inline EmbeddingDictionary load_dictionary(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  std::istringstream in(bytes);
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty dictionary file: " + path);
  std::istringstream hs(header);
  std::size_t vocab = 0, embed = 0;
  std::string format;
  if (!(hs >> vocab >> embed >> format) || vocab < 2 || embed < 1 ||
      (format != "csv" && format != "bin"))
    throw FormatError("bad dictionary header '" + header + "' in " + path);

  std::vector<std::string> words(vocab);
  for (std::size_t i = 0; i < vocab; ++i) {
    std::string line;
    if (!std::getline(in, line))
      throw FormatError("dictionary word list truncated: " + path);
    std::istringstream ls(line);
    std::string word;
    std::size_t id = 0;
    if (!(ls >> word >> id) || id != i)
      throw FormatError("bad dictionary word line '" + line + "' in " + path);
    words[i] = word;
  }

  Mat vectors(vocab, embed);
  if (format == "csv") {
    for (std::size_t r = 0; r < vocab; ++r) {
      std::string line;
      if (!std::getline(in, line))
        throw FormatError("dictionary embedding rows truncated: " + path);
      std::istringstream ls(line);
      std::string cell;
      for (std::size_t c = 0; c < embed; ++c) {
        if (!std::getline(ls, cell, ','))
          throw FormatError("short embedding row in " + path);
        vectors(r, c) = parse_double(cell, path);
      }
    }
  } else {
    const auto payload_at = static_cast<std::size_t>(in.tellg());
    const std::size_t need = vocab * embed * 8;
    if (bytes.size() < payload_at + need)
      throw FormatError("dictionary embedding payload truncated: " + path);
    detail::Reader r(bytes.substr(payload_at, need), path);
    for (double& x : vectors.data) x = r.f64();
  }
  return EmbeddingDictionary::build(std::move(words), std::move(vectors));
}

// ---- corpus ----

inline void save_corpus(const std::string& path, const LabeledCorpus& corpus,
                        const EmbeddingDictionary& dict) {
  std::string buf;
  for (const auto& [tokens, label] : corpus.items)
    buf += std::to_string(label) + "\t" + detokenize(tokens, dict) + "\n";
  detail::write_file(path, buf);
}

inline LabeledCorpus load_corpus(const std::string& path,
                                 const EmbeddingDictionary& dict,
                                 const std::string& split = "train") {
  const std::string bytes = detail::read_file(path);
  std::istringstream in(bytes);
  LabeledCorpus corpus;
  corpus.split = split;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || (line[0] != '0' && line[0] != '1') || tab != 1)
      throw FormatError("corpus line " + std::to_string(lineno) +
                        " must be 'label<TAB>text' in " + path);
    const int label = line[0] - '0';
    corpus.items.emplace_back(tokenize(line.substr(tab + 1), dict), label);
  }
  if (corpus.items.empty()) throw FormatError("corpus file has no items: " + path);
  return corpus;
}

// ---- sequence pair sets ----

inline void save_seqpairs(const std::string& csv_path, const std::string& meta_path,
                          const SeqPairSet& set) {
  std::string buf = "pair_id,step,role,coord,value\n";
  for (std::size_t n = 0; n < set.pairs.size(); ++n) {
    const auto& [in, out] = set.pairs[n];
    for (std::size_t t = 0; t < in.len(); ++t)
      for (std::size_t c = 0; c < in.width(); ++c)
        buf += std::to_string(n) + "," + std::to_string(t) + ",in," +
               std::to_string(c) + "," + fmt_double(in.steps[t][c]) + "\n";
    for (std::size_t t = 0; t < out.len(); ++t)
      for (std::size_t c = 0; c < out.width(); ++c)
        buf += std::to_string(n) + "," + std::to_string(t) + ",out," +
               std::to_string(c) + "," + fmt_double(out.steps[t][c]) + "\n";
  }
  detail::write_file(csv_path, buf);

  nlohmann::json meta;
  meta["seed"] = set.seed;
  meta["n_pairs"] = set.config.n_pairs;
  meta["len"] = set.config.len;
  meta["in_width"] = set.config.in_width;
  meta["out_width"] = set.config.out_width;
  meta["alpha"] = set.config.alpha;
  meta["correlation"] = nlohmann::json::array();
  for (const CorrelationTarget& t : set.correlation)
    meta["correlation"].push_back({{"out_coord", t.out_coord},
                                   {"src_coord", t.src_coord},
                                   {"lag", t.lag},
                                   {"alpha", t.alpha}});
  detail::write_file(meta_path, meta.dump(2) + "\n");
}

inline SeqPairSet load_seqpairs(const std::string& csv_path,
                                const std::string& meta_path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(detail::read_file(meta_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("bad pair-set metadata " + meta_path + ": " + e.what());
  }

  SeqPairSet set;
  try {
    set.seed = meta.at("seed").get<std::uint64_t>();
    set.config.n_pairs = meta.at("n_pairs").get<int>();
    set.config.len = meta.at("len").get<int>();
    set.config.in_width = meta.at("in_width").get<int>();
    set.config.out_width = meta.at("out_width").get<int>();
    set.config.alpha = meta.at("alpha").get<double>();
    for (const auto& t : meta.at("correlation"))
      set.correlation.push_back({t.at("out_coord").get<int>(),
                                 t.at("src_coord").get<int>(),
                                 t.at("lag").get<int>(),
                                 t.at("alpha").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("incomplete pair-set metadata " + meta_path + ": " + e.what());
  }

  set.pairs.assign(
      static_cast<std::size_t>(set.config.n_pairs),
      {Sequence::zeros(static_cast<std::size_t>(set.config.len),
                       static_cast<std::size_t>(set.config.in_width)),
       Sequence::zeros(static_cast<std::size_t>(set.config.len),
                       static_cast<std::size_t>(set.config.out_width))});

  std::istringstream in(detail::read_file(csv_path));
  std::string line;
  if (!std::getline(in, line) || line != "pair_id,step,role,coord,value")
    throw FormatError("bad pair-set CSV header in " + csv_path);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string pair_s, step_s, role, coord_s, value_s;
    if (!std::getline(ls, pair_s, ',') || !std::getline(ls, step_s, ',') ||
        !std::getline(ls, role, ',') || !std::getline(ls, coord_s, ',') ||
        !std::getline(ls, value_s))
      throw FormatError("short CSV row at line " + std::to_string(lineno) +
                        " in " + csv_path);
    const auto ctx = csv_path + " line " + std::to_string(lineno);
    const auto pair_id = static_cast<std::size_t>(parse_double(pair_s, ctx));
    const auto step = static_cast<std::size_t>(parse_double(step_s, ctx));
    const auto coord = static_cast<std::size_t>(parse_double(coord_s, ctx));
    if (pair_id >= set.pairs.size() ||
        step >= static_cast<std::size_t>(set.config.len))
      throw FormatError("row out of range at line " + std::to_string(lineno) +
                        " in " + csv_path);
    Sequence& seq =
        role == "in" ? set.pairs[pair_id].first : set.pairs[pair_id].second;
    if (role != "in" && role != "out")
      throw FormatError("bad role '" + role + "' at line " +
                        std::to_string(lineno) + " in " + csv_path);
    if (coord >= seq.width())
      throw FormatError("coord out of range at line " + std::to_string(lineno) +
                        " in " + csv_path);
    seq.steps[step][coord] = parse_double(value_s, ctx);
  }
  return set;
}

}  // namespace advseq

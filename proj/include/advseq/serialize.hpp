// Versioned binary model container: magic, format version, architecture tag,
// shape header, then the parameter payload as little-endian 64-bit floats.
// A JSON sidecar (<path>.json) carries dims and whatever run metadata the
// caller supplies. Round-trips are bit-exact.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advseq/linalg.hpp"
#include "advseq/models.hpp"

namespace advseq {

inline constexpr char kModelMagic[8] = {'S', 'E', 'Q', 'M', 'D', 'L', '0', '1'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind : std::uint32_t { VanillaRnn = 1, LstmClassifier = 2 };

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& buf, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    pos_ += 8;
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
  }

  void raw(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw FormatError("model file truncated: " + path_);
  }
  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

inline void put_mat(std::string& buf, const Mat& m) {
  for (double x : m.data) put_f64(buf, x);
}

inline void put_vec(std::string& buf, const Vec& v) {
  for (double x : v.data) put_f64(buf, x);
}

inline Mat get_mat(Reader& r, std::size_t rows, std::size_t cols) {
  Mat m(rows, cols);
  for (double& x : m.data) x = r.f64();
  return m;
}

inline Vec get_vec(Reader& r, std::size_t n) {
  Vec v(n);
  for (double& x : v.data) x = r.f64();
  return v;
}

}  // namespace detail

inline void save_model(const std::string& path, const VanillaRnnParams& p,
                       const nlohmann::json& metadata = {}) {
  p.validate();
  std::string buf;
  buf.append(kModelMagic, sizeof kModelMagic);
  detail::put_u32(buf, kModelFormatVersion);
  detail::put_u32(buf, static_cast<std::uint32_t>(ModelKind::VanillaRnn));
  detail::put_u32(buf, static_cast<std::uint32_t>(p.input_dim()));
  detail::put_u32(buf, static_cast<std::uint32_t>(p.hidden_dim()));
  detail::put_u32(buf, static_cast<std::uint32_t>(p.output_dim()));
  detail::put_mat(buf, p.w_in);
  detail::put_mat(buf, p.w);
  detail::put_mat(buf, p.w_out);
  detail::put_vec(buf, p.b_h);
  detail::put_vec(buf, p.b_y);
  detail::write_file(path, buf);

  nlohmann::json side = metadata;
  side["arch"] = "vanilla_rnn";
  side["format_version"] = kModelFormatVersion;
  side["input_dim"] = p.input_dim();
  side["hidden_dim"] = p.hidden_dim();
  side["output_dim"] = p.output_dim();
  detail::write_file(path + ".json", side.dump(2) + "\n");
}

inline void save_model(const std::string& path, const LstmClassifierParams& p,
                       const nlohmann::json& metadata = {}) {
  p.validate();
  std::string buf;
  buf.append(kModelMagic, sizeof kModelMagic);
  detail::put_u32(buf, kModelFormatVersion);
  detail::put_u32(buf, static_cast<std::uint32_t>(ModelKind::LstmClassifier));
  detail::put_u32(buf, static_cast<std::uint32_t>(p.vocab_size()));
  detail::put_u32(buf, static_cast<std::uint32_t>(p.embed_dim()));
  detail::put_u32(buf, static_cast<std::uint32_t>(p.hidden_dim()));
  detail::put_u32(buf, static_cast<std::uint32_t>(p.n_classes()));
  detail::put_mat(buf, p.embedding);
  for (const LstmGate* g :
       {&p.gate_input, &p.gate_forget, &p.gate_output, &p.gate_candidate}) {
    detail::put_mat(buf, g->w);
    detail::put_vec(buf, g->b);
  }
  detail::put_mat(buf, p.w_out);
  detail::put_vec(buf, p.b_out);
  detail::write_file(path, buf);

  nlohmann::json side = metadata;
  side["arch"] = "lstm_classifier";
  side["format_version"] = kModelFormatVersion;
  side["vocab_size"] = p.vocab_size();
  side["embed_dim"] = p.embed_dim();
  side["hidden_dim"] = p.hidden_dim();
  side["n_classes"] = p.n_classes();
  detail::write_file(path + ".json", side.dump(2) + "\n");
}

namespace detail {

inline Reader open_model(const std::string& path, ModelKind expected) {
  Reader r(read_file(path), path);
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kModelMagic, 8) != 0)
    throw FormatError("not a model file (bad magic): " + path);
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw FormatError("unsupported model format version " +
                      std::to_string(version) + ": " + path);
  const std::uint32_t kind = r.u32();
  if (kind != static_cast<std::uint32_t>(expected))
    throw FormatError("model architecture mismatch in " + path);
  return r;
}

}  // namespace detail

inline ModelKind peek_model_kind(const std::string& path) {
  detail::Reader r(detail::read_file(path), path);
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kModelMagic, 8) != 0)
    throw FormatError("not a model file (bad magic): " + path);
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw FormatError("unsupported model format version " +
                      std::to_string(version) + ": " + path);
  const std::uint32_t kind = r.u32();
  if (kind != 1 && kind != 2)
    throw FormatError("unknown architecture tag " + std::to_string(kind) +
                      " in " + path);
  return static_cast<ModelKind>(kind);
}

inline VanillaRnnParams load_rnn_model(const std::string& path) {
  detail::Reader r = detail::open_model(path, ModelKind::VanillaRnn);
  const std::size_t in = r.u32();
  const std::size_t hidden = r.u32();
  const std::size_t out = r.u32();
  VanillaRnnParams p;
  p.w_in = detail::get_mat(r, hidden, in);
  p.w = detail::get_mat(r, hidden, hidden);
  p.w_out = detail::get_mat(r, out, hidden);
  p.b_h = detail::get_vec(r, hidden);
  p.b_y = detail::get_vec(r, out);
  if (!r.exhausted()) throw FormatError("trailing bytes in model file: " + path);
  p.validate();
  return p;
}

inline LstmClassifierParams load_lstm_model(const std::string& path) {
  detail::Reader r = detail::open_model(path, ModelKind::LstmClassifier);
  const std::size_t vocab = r.u32();
  const std::size_t embed = r.u32();
  const std::size_t hidden = r.u32();
  const std::size_t classes = r.u32();
  if (classes != 2)
    throw FormatError("classifier model must have 2 classes: " + path);
  LstmClassifierParams p;
  p.embedding = detail::get_mat(r, vocab, embed);
  for (LstmGate* g :
       {&p.gate_input, &p.gate_forget, &p.gate_output, &p.gate_candidate}) {
    g->w = detail::get_mat(r, hidden, embed + hidden);
    g->b = detail::get_vec(r, hidden);
  }
  p.w_out = detail::get_mat(r, 2, hidden);
  p.b_out = detail::get_vec(r, 2);
  if (!r.exhausted()) throw FormatError("trailing bytes in model file: " + path);
  p.validate();
  return p;
}

}  // namespace advseq

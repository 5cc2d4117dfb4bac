// advseq command line: dataset generation, training, evaluation, Jacobian
// dumps, and the three attacks, glued into reproducible runs. Every command
// is deterministic from its config and --seed; report files never contain
// timestamps or absolute paths, so identical runs produce identical bytes.
//
// Exit codes: 0 success, 2 usage/config/format, 3 I/O, 4 numeric failure.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "advseq/advseq.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace advseq;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::string basename_of(const std::string& path) {
  return fs::path(path).filename().string();
}

// Missing input files are a usage error (exit 2), not an I/O failure.
void require_input_file(const std::string& path) {
  if (path.empty()) return;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec))
    throw ConfigError("input file not found: " + path);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

json dataset_stanza(const std::string& path) {
  return {{"file", basename_of(path)}, {"hash", file_hash_hex(path)}};
}

void write_json(const std::string& path, const json& j) {
  detail::write_file(path, j.dump(2) + "\n");
}

// Applies --config file values to options the user did not set on the
// command line. Unknown keys are rejected.
class ConfigFile {
 public:
  void load(const std::string& path) {
    require_input_file(path);
    try {
      values_ = json::parse(detail::read_file(path));
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + path + ": " + e.what());
    }
    if (!values_.is_object())
      throw ConfigError("config file " + path + " must hold a JSON object");
    path_ = path;
  }

  void apply(CLI::App* cmd) {
    if (values_.is_null()) return;
    for (const auto& [key, value] : values_.items()) {
      CLI::Option* opt = cmd->get_option_no_throw("--" + key);
      if (opt == nullptr)
        throw ConfigError("config file " + path_ + ": unknown key '" + key +
                          "' for this command");
      if (opt->count() > 0) continue;  // command line wins
      std::string text;
      if (value.is_string())
        text = value.get<std::string>();
      else
        text = value.dump();
      opt->add_result(text);
      opt->run_callback();
    }
  }

 private:
  json values_;
  std::string path_;
};

// Deterministic parallel map over [0, n): results land in a pre-sized
// vector, so the output order never depends on the number of workers.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : workers) t.join();
}

std::string pairs_meta_path(const std::string& csv_path) {
  std::string p = csv_path;
  const auto pos = p.rfind(".csv");
  if (pos != std::string::npos && pos == p.size() - 4)
    p.replace(pos, 4, "_meta.json");
  else
    p += "_meta.json";
  return p;
}

// ---- gen ----

struct GenCorpusArgs {
  int vocab = 500;
  int embed_dim = 16;
  int n_train = 200;
  int n_test = 50;
  int min_len = 8;
  int max_len = 20;
  double cue_rate = 0.15;
  bool binary_embeddings = false;
  std::uint64_t seed = 42;
  std::string out;
};

int run_gen_corpus(const GenCorpusArgs& a) {
  CorpusConfig cfg;
  cfg.vocab_size = a.vocab;
  cfg.embed_dim = a.embed_dim;
  cfg.n_items = a.n_train + a.n_test;
  cfg.min_len = a.min_len;
  cfg.max_len = a.max_len;
  cfg.cue_rate = a.cue_rate;
  auto [corpus, dict] =
      generate_synthetic_corpus(derive_seed(a.seed, "gen.corpus"), cfg);

  LabeledCorpus train, test;
  train.split = "train";
  test.split = "test";
  for (std::size_t i = 0; i < corpus.items.size(); ++i)
    (i < static_cast<std::size_t>(a.n_train) ? train : test)
        .items.push_back(corpus.items[i]);

  ensure_out_dir(a.out);
  const std::string dict_path = a.out + "/dict.txt";
  const std::string train_path = a.out + "/corpus_train.txt";
  const std::string test_path = a.out + "/corpus_test.txt";
  save_dictionary(dict_path, dict, a.binary_embeddings);
  save_corpus(train_path, train, dict);
  save_corpus(test_path, test, dict);

  json meta;
  meta["artifact_version"] = kVersion;
  meta["command"] = "gen corpus";
  meta["seed"] = a.seed;
  meta["config"] = {{"vocab", a.vocab},     {"embed_dim", a.embed_dim},
                    {"n_train", a.n_train}, {"n_test", a.n_test},
                    {"min_len", a.min_len}, {"max_len", a.max_len},
                    {"cue_rate", a.cue_rate}};
  meta["files"] = {{"dict", dataset_stanza(dict_path)},
                   {"train", dataset_stanza(train_path)},
                   {"test", dataset_stanza(test_path)}};
  write_json(a.out + "/gen_meta.json", meta);
  std::cerr << "wrote " << a.n_train << " train / " << a.n_test
            << " test sentences, vocab " << a.vocab << " -> " << a.out << "\n";
  return 0;
}

struct GenPairsArgs {
  int n_pairs = 100;
  int len = 10;
  int in_width = 5;
  int out_width = 3;
  double alpha = 1.0;
  std::uint64_t seed = 42;
  std::string out;
};

int run_gen_seqpairs(const GenPairsArgs& a) {
  SeqPairConfig cfg;
  cfg.n_pairs = a.n_pairs;
  cfg.len = a.len;
  cfg.in_width = a.in_width;
  cfg.out_width = a.out_width;
  cfg.alpha = a.alpha;
  const SeqPairSet set =
      generate_correlated_pairs(derive_seed(a.seed, "gen.seqpairs"), cfg);

  ensure_out_dir(a.out);
  const std::string csv_path = a.out + "/pairs.csv";
  const std::string meta_path = a.out + "/pairs_meta.json";
  save_seqpairs(csv_path, meta_path, set);

  json meta;
  meta["artifact_version"] = kVersion;
  meta["command"] = "gen seqpairs";
  meta["seed"] = a.seed;
  meta["config"] = {{"n_pairs", a.n_pairs},   {"len", a.len},
                    {"in_width", a.in_width}, {"out_width", a.out_width},
                    {"alpha", a.alpha}};
  meta["files"] = {{"pairs", dataset_stanza(csv_path)},
                   {"pairs_meta", dataset_stanza(meta_path)}};
  write_json(a.out + "/gen_meta.json", meta);
  std::cerr << "wrote " << a.n_pairs << " pairs -> " << a.out << "\n";
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string pairs;   // sequential
  std::string corpus;  // classifier
  std::string dict;
  int epochs = 0;  // defaults set per subcommand
  double lr = 0.0;
  int hidden = 32;
  double init_scale = 0.1;
  int batch = 0;
  bool clip = false;
  double clip_norm = 5.0;
  std::uint64_t seed = 42;
  std::string out;
};

void write_train_outputs(const std::string& out_dir, const std::string& command,
                         const TrainArgs& a, const json& dataset,
                         const TrainReport& report, bool classifier) {
  json rep;
  rep["artifact_version"] = kVersion;
  rep["command"] = command;
  rep["seed"] = a.seed;
  rep["config"] = {{"epochs", a.epochs},
                   {"lr", a.lr},
                   {"hidden", a.hidden},
                   {"init_scale", a.init_scale},
                   {"batch", a.batch}};
  if (classifier) {
    rep["config"]["clip"] = a.clip;
    rep["config"]["clip_norm"] = a.clip_norm;
  }
  rep["dataset"] = dataset;
  rep["epochs_run"] = report.loss_curve.size();
  rep["initial_loss"] = report.initial_loss;
  rep["final_loss"] = report.final_loss;
  if (classifier) rep["final_accuracy"] = report.final_accuracy;
  rep["model_file"] = "model.bin";
  rep["loss_curve_file"] = "loss_curve.csv";
  write_json(out_dir + "/train_report.json", rep);

  std::string curve = "epoch,loss\n";
  for (std::size_t e = 0; e < report.loss_curve.size(); ++e)
    curve += std::to_string(e + 1) + "," + fmt_double(report.loss_curve[e]) + "\n";
  detail::write_file(out_dir + "/loss_curve.csv", curve);
  // timing goes to stderr only; report files must be byte-reproducible
  std::cerr << command << ": " << report.loss_curve.size() << " epochs in "
            << report.wall_seconds << "s, final loss " << report.final_loss
            << (classifier ? ", accuracy " + std::to_string(report.final_accuracy)
                           : "")
            << "\n";
}

int run_train_sequential(const TrainArgs& a) {
  require_input_file(a.pairs);
  require_input_file(pairs_meta_path(a.pairs));
  const SeqPairSet set = load_seqpairs(a.pairs, pairs_meta_path(a.pairs));
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.loss = Loss::MeanSquaredError;
  cfg.seed = a.seed;
  cfg.init_scale = a.init_scale;
  cfg.hidden_dim = a.hidden;
  cfg.batch_size = a.batch;
  const auto [model, report] = train_sequential(set, cfg);

  ensure_out_dir(a.out);
  json side;
  side["seed"] = a.seed;
  side["training"] = {{"epochs", a.epochs},
                      {"lr", a.lr},
                      {"batch", a.batch},
                      {"loss", "mean_squared_error"}};
  side["dataset"] = dataset_stanza(a.pairs);
  save_model(a.out + "/model.bin", model, side);
  write_train_outputs(a.out, "train sequential", a, dataset_stanza(a.pairs),
                      report, false);
  return 0;
}

int run_train_classifier(const TrainArgs& a) {
  require_input_file(a.corpus);
  require_input_file(a.dict);
  const EmbeddingDictionary dict = load_dictionary(a.dict);
  const LabeledCorpus corpus = load_corpus(a.corpus, dict);
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.loss = Loss::CrossEntropy;
  cfg.seed = a.seed;
  cfg.init_scale = a.init_scale;
  cfg.hidden_dim = a.hidden;
  cfg.batch_size = a.batch;
  cfg.clip_gradients = a.clip;
  cfg.clip_norm = a.clip_norm;
  const auto [model, report] = train_classifier(corpus, dict, cfg);

  ensure_out_dir(a.out);
  json side;
  side["seed"] = a.seed;
  side["training"] = {{"epochs", a.epochs},
                      {"lr", a.lr},
                      {"batch", a.batch},
                      {"loss", "cross_entropy"}};
  side["dataset"] = dataset_stanza(a.corpus);
  side["dictionary"] = dataset_stanza(a.dict);
  save_model(a.out + "/model.bin", model, side);
  write_train_outputs(a.out, "train classifier", a, dataset_stanza(a.corpus),
                      report, true);
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string model;
  std::string data;
  std::string dict;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  require_input_file(a.model);
  require_input_file(a.data);
  require_input_file(a.dict);
  json rep;
  rep["artifact_version"] = kVersion;
  rep["command"] = "eval";
  rep["model"] = dataset_stanza(a.model);
  rep["dataset"] = dataset_stanza(a.data);
  const ModelKind kind = peek_model_kind(a.model);
  if (kind == ModelKind::VanillaRnn) {
    const VanillaRnnParams model = load_rnn_model(a.model);
    require_input_file(pairs_meta_path(a.data));
    const SeqPairSet set = load_seqpairs(a.data, pairs_meta_path(a.data));
    rep["kind"] = "sequential";
    rep["mse"] = evaluate_mse(model, set);
    rep["n_items"] = set.pairs.size();
  } else {
    if (a.dict.empty())
      throw ConfigError("eval: --dict is required for classifier models");
    const LstmClassifierParams model = load_lstm_model(a.model);
    const EmbeddingDictionary dict = load_dictionary(a.dict);
    const LabeledCorpus corpus = load_corpus(a.data, dict);
    rep["kind"] = "classifier";
    rep["accuracy"] = evaluate_accuracy(model, corpus);
    rep["cross_entropy"] = evaluate_cross_entropy(model, corpus);
    rep["n_items"] = corpus.items.size();
  }
  std::cout << rep.dump(2) << "\n";
  if (!a.out.empty()) write_json(a.out, rep);
  return 0;
}

// ---- jacobian ----

struct JacobianArgs {
  std::string model;
  std::string data;
  int index = 0;
  int random_len = 0;
  std::uint64_t seed = 42;
  std::string out;
};

int run_jacobian(const JacobianArgs& a) {
  require_input_file(a.model);
  require_input_file(a.data);
  if (peek_model_kind(a.model) != ModelKind::VanillaRnn)
    throw ConfigError(
        "jacobian: only sequential models have an input/output step tensor; "
        "use a vanilla RNN model file");
  const VanillaRnnParams model = load_rnn_model(a.model);

  Sequence x;
  if (a.random_len > 0) {
    Rng rng(derive_seed(a.seed, "jacobian.random"));
    x = Sequence::zeros(static_cast<std::size_t>(a.random_len), model.input_dim());
    for (auto& step : x.steps)
      for (double& v : step.data) v = rng.next_normal(0.0, 1.0);
  } else {
    if (a.data.empty())
      throw ConfigError("jacobian: give --data with --index, or --random-len");
    require_input_file(pairs_meta_path(a.data));
    const SeqPairSet set = load_seqpairs(a.data, pairs_meta_path(a.data));
    if (a.index < 0 || static_cast<std::size_t>(a.index) >= set.pairs.size())
      throw ConfigError("jacobian: --index " + std::to_string(a.index) +
                        " out of range, dataset has " +
                        std::to_string(set.pairs.size()) + " pairs");
    x = set.pairs[static_cast<std::size_t>(a.index)].first;
  }

  const JacobianTensor jac = rnn_jacobian(model, x);
  std::string csv = "in_step,in_coord";
  for (std::size_t j = 0; j < jac.output_len; ++j)
    for (std::size_t r = 0; r < jac.out_dim; ++r)
      csv += ",dout_s" + std::to_string(j) + "_c" + std::to_string(r);
  csv += "\n";
  for (std::size_t i = 0; i < jac.input_len; ++i)
    for (std::size_t c = 0; c < jac.in_dim; ++c) {
      csv += std::to_string(i) + "," + std::to_string(c);
      for (std::size_t j = 0; j < jac.output_len; ++j)
        for (std::size_t r = 0; r < jac.out_dim; ++r)
          csv += "," + fmt_double(jac.block(i, j)(r, c));
      csv += "\n";
    }
  detail::write_file(a.out, csv);
  std::cerr << "jacobian: " << jac.input_len << "x" << jac.output_len
            << " blocks -> " << a.out << "\n";
  return 0;
}

// ---- attack ----

struct AttackArgs {
  std::string model;
  std::string data;  // pairs csv or corpus
  std::string dict;
  double epsilon = 0.1;
  double budget_frac = 0.25;
  std::vector<std::string> targets;
  double delta = 0.25;
  double ratio = 2.0;
  double step_size = 0.02;
  int max_iters = 200;
  int jobs = 1;
  std::uint64_t seed = 42;
  std::string out;
};

json attack_report_header(const std::string& command, const AttackArgs& a,
                          const json& config) {
  json rep;
  rep["artifact_version"] = kVersion;
  rep["command"] = command;
  rep["seed"] = a.seed;
  rep["config"] = config;
  rep["model"] = dataset_stanza(a.model);
  rep["dataset"] = dataset_stanza(a.data);
  return rep;
}

int run_attack_fgsm(const AttackArgs& a) {
  require_input_file(a.model);
  require_input_file(a.data);
  if (peek_model_kind(a.model) != ModelKind::VanillaRnn)
    throw ConfigError(
        "attack fgsm: the gradient-sign attack needs continuous inputs; "
        "token-sequence classifier models are not supported");
  const VanillaRnnParams model = load_rnn_model(a.model);
  require_input_file(pairs_meta_path(a.data));
  const SeqPairSet set = load_seqpairs(a.data, pairs_meta_path(a.data));

  struct Row {
    double loss_before, loss_after, norm;
    bool success;
    std::size_t changed;
  };
  std::vector<Row> rows(set.pairs.size());
  std::vector<json> items(set.pairs.size());
  parallel_for(set.pairs.size(), a.jobs, [&](std::size_t i) {
    const auto& [x, y_true] = set.pairs[i];
    const auto out =
        fgsm(model, x, y_true, Loss::MeanSquaredError, FgsmConfig{a.epsilon});
    const double before = sequence_mse(rnn_forward(model, x).outputs, y_true);
    const double after =
        sequence_mse(rnn_forward(model, out.adversarial).outputs, y_true);
    rows[i] = {before, after, out.perturbation_norm, out.success,
               out.changed_positions.size()};
    json item;
    item["id"] = i;
    item["loss_before"] = before;
    item["loss_after"] = after;
    item["perturbation_norm"] = out.perturbation_norm;
    item["changed_steps"] = out.changed_positions;
    item["success"] = out.success;
    items[i] = std::move(item);
  });

  ensure_out_dir(a.out);
  std::string jsonl;
  for (const json& item : items) jsonl += item.dump() + "\n";
  detail::write_file(a.out + "/attacks.jsonl", jsonl);

  std::string csv =
      "id,loss_before,loss_after,perturbation_norm,changed_steps,success\n";
  double succ = 0, norm_sum = 0, non_decrease = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    csv += std::to_string(i) + "," + fmt_double(r.loss_before) + "," +
           fmt_double(r.loss_after) + "," + fmt_double(r.norm) + "," +
           std::to_string(r.changed) + "," + (r.success ? "1" : "0") + "\n";
    succ += r.success ? 1 : 0;
    norm_sum += r.norm;
    non_decrease += (r.loss_after >= r.loss_before) ? 1 : 0;
  }
  const auto n = static_cast<double>(rows.size());
  csv += "mean," + fmt_double(succ / n) + ",," + fmt_double(norm_sum / n) +
         ",," + fmt_double(succ / n) + "\n";
  detail::write_file(a.out + "/summary.csv", csv);

  json rep = attack_report_header("attack fgsm", a, {{"epsilon", a.epsilon}});
  rep["n_items"] = rows.size();
  rep["success_rate"] = succ / n;
  rep["loss_non_decrease_rate"] = non_decrease / n;
  rep["mean_perturbation_norm"] = norm_sum / n;
  write_json(a.out + "/attack_report.json", rep);
  std::cerr << "fgsm: success rate " << succ / n << " over " << rows.size()
            << " inputs -> " << a.out << "\n";
  return 0;
}

int run_attack_wordswap(const AttackArgs& a) {
  require_input_file(a.model);
  require_input_file(a.data);
  require_input_file(a.dict);
  if (peek_model_kind(a.model) != ModelKind::LstmClassifier)
    throw ConfigError("attack wordswap: needs a classifier model file");
  const LstmClassifierParams model = load_lstm_model(a.model);
  const EmbeddingDictionary dict = load_dictionary(a.dict);
  const LabeledCorpus corpus = load_corpus(a.data, dict);

  struct Row {
    int label, orig_class, final_class;
    bool correct, success;
    std::size_t len, changed;
    int reducing, swaps;
  };
  std::vector<Row> rows(corpus.items.size());
  std::vector<json> items(corpus.items.size());
  parallel_for(corpus.items.size(), a.jobs, [&](std::size_t i) {
    const auto& [tokens, label] = corpus.items[i];
    const int budget = word_swap_budget(tokens.len(), a.budget_frac);
    const WordSwapResult res =
        craft_word_swap(model, tokens, dict, WordSwapConfig{budget});
    int reducing = 0;
    for (const SwapRecord& s : res.swaps)
      if (s.logit_after < s.logit_before) ++reducing;
    rows[i] = {label,
               res.original_class,
               res.final_class,
               res.original_class == label,
               res.outcome.success,
               tokens.len(),
               res.outcome.changed_positions.size(),
               reducing,
               static_cast<int>(res.swaps.size())};
    json item;
    item["id"] = i;
    item["label"] = label;
    item["original_class"] = res.original_class;
    item["final_class"] = res.final_class;
    item["original_text"] = detokenize(tokens, dict);
    item["adversarial_text"] = detokenize(res.outcome.adversarial, dict);
    item["changed_positions"] = res.outcome.changed_positions;
    item["n_changed"] = res.outcome.changed_positions.size();
    item["budget"] = budget;
    item["success"] = res.outcome.success;
    items[i] = std::move(item);
  });

  ensure_out_dir(a.out);
  std::string jsonl;
  for (const json& item : items) jsonl += item.dump() + "\n";
  detail::write_file(a.out + "/attacks.jsonl", jsonl);

  std::string csv =
      "id,label,original_class,final_class,correct,success,len,n_changed,"
      "changed_fraction\n";
  double n_correct = 0, n_flipped = 0, changed_sum = 0, frac_sum = 0;
  int reducing = 0, decisions = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const double frac = static_cast<double>(r.changed) / static_cast<double>(r.len);
    csv += std::to_string(i) + "," + std::to_string(r.label) + "," +
           std::to_string(r.orig_class) + "," + std::to_string(r.final_class) +
           "," + (r.correct ? "1" : "0") + "," + (r.success ? "1" : "0") + "," +
           std::to_string(r.len) + "," + std::to_string(r.changed) + "," +
           fmt_double(frac) + "\n";
    if (r.correct) {
      n_correct += 1;
      n_flipped += r.success ? 1 : 0;
      changed_sum += static_cast<double>(r.changed);
      frac_sum += frac;
    }
    reducing += r.reducing;
    decisions += r.swaps;
  }
  const double success_rate = n_correct > 0 ? n_flipped / n_correct : 0.0;
  const double mean_changed = n_correct > 0 ? changed_sum / n_correct : 0.0;
  const double mean_frac = n_correct > 0 ? frac_sum / n_correct : 0.0;
  csv += "mean,,,,," + fmt_double(success_rate) + ",," +
         fmt_double(mean_changed) + "," + fmt_double(mean_frac) + "\n";
  detail::write_file(a.out + "/summary.csv", csv);

  json rep =
      attack_report_header("attack wordswap", a, {{"budget_frac", a.budget_frac}});
  rep["dictionary"] = dataset_stanza(a.dict);
  rep["n_items"] = rows.size();
  rep["n_correctly_classified"] = n_correct;
  rep["success_rate"] = success_rate;
  rep["mean_changed_words"] = mean_changed;
  rep["mean_changed_fraction"] = mean_frac;
  rep["swap_decisions"] = decisions;
  rep["logit_reducing_swaps"] = reducing;
  write_json(a.out + "/attack_report.json", rep);
  std::cerr << "wordswap: flipped " << n_flipped << "/" << n_correct
            << " correctly-classified inputs, mean changed fraction " << mean_frac
            << " -> " << a.out << "\n";
  return 0;
}

std::vector<SeqTarget> parse_targets(const std::vector<std::string>& specs) {
  std::vector<SeqTarget> targets;
  for (const std::string& spec : specs) {
    SeqTarget t{};
    char trailing;
    if (std::sscanf(spec.c_str(), "%d:%d:%lf%c", &t.step, &t.coord, &t.desired,
                    &trailing) != 3)
      throw ConfigError("attack seqtarget: bad --target '" + spec +
                        "', expected step:coord:value");
    targets.push_back(t);
  }
  return targets;
}

int run_attack_seqtarget(const AttackArgs& a) {
  require_input_file(a.model);
  require_input_file(a.data);
  if (peek_model_kind(a.model) != ModelKind::VanillaRnn)
    throw ConfigError("attack seqtarget: needs a sequential model file");
  const VanillaRnnParams model = load_rnn_model(a.model);
  require_input_file(pairs_meta_path(a.data));
  const SeqPairSet set = load_seqpairs(a.data, pairs_meta_path(a.data));
  SequentialAttackConfig cfg;
  cfg.targets = parse_targets(a.targets);
  cfg.delta = a.delta;
  cfg.off_target_ratio = a.ratio;
  cfg.step_size = a.step_size;
  cfg.max_iters = a.max_iters;

  struct Row {
    bool success;
    int iterations;
    double targeted_mean, untargeted_max, norm;
  };
  std::vector<Row> rows(set.pairs.size());
  std::vector<json> items(set.pairs.size());
  parallel_for(set.pairs.size(), a.jobs, [&](std::size_t i) {
    const Sequence& x = set.pairs[i].first;
    const Sequence before = rnn_forward(model, x).outputs;
    const auto out = craft_sequential(model, x, cfg);
    const Sequence after = rnn_forward(model, out.adversarial).outputs;

    double targeted_sum = 0;
    double untargeted_max = 0;
    for (std::size_t j = 0; j < after.len(); ++j)
      for (std::size_t c = 0; c < after.width(); ++c) {
        const double d = std::fabs(after.steps[j][c] - before.steps[j][c]);
        const bool targeted = std::any_of(
            cfg.targets.begin(), cfg.targets.end(), [&](const SeqTarget& t) {
              return static_cast<std::size_t>(t.step) == j &&
                     static_cast<std::size_t>(t.coord) == c;
            });
        if (targeted)
          targeted_sum += d;
        else
          untargeted_max = std::max(untargeted_max, d);
      }
    const double targeted_mean =
        targeted_sum / static_cast<double>(cfg.targets.size());
    rows[i] = {out.success, out.iterations, targeted_mean, untargeted_max,
               out.perturbation_norm};
    json item;
    item["id"] = i;
    item["success"] = out.success;
    item["iterations"] = out.iterations;
    item["changed_input_steps"] = out.changed_positions;
    item["perturbation_norm"] = out.perturbation_norm;
    item["targeted_mean_abs_change"] = targeted_mean;
    item["untargeted_max_abs_change"] = untargeted_max;
    if (!out.note.empty()) item["note"] = out.note;
    items[i] = std::move(item);
  });

  ensure_out_dir(a.out);
  std::string jsonl;
  for (const json& item : items) jsonl += item.dump() + "\n";
  detail::write_file(a.out + "/attacks.jsonl", jsonl);

  std::string csv =
      "id,success,iterations,targeted_mean_abs_change,untargeted_max_abs_change,"
      "perturbation_norm\n";
  double succ = 0, t_sum = 0, u_sum = 0, norm_sum = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    csv += std::to_string(i) + "," + (r.success ? "1" : "0") + "," +
           std::to_string(r.iterations) + "," + fmt_double(r.targeted_mean) +
           "," + fmt_double(r.untargeted_max) + "," + fmt_double(r.norm) + "\n";
    succ += r.success ? 1 : 0;
    t_sum += r.targeted_mean;
    u_sum += r.untargeted_max;
    norm_sum += r.norm;
  }
  const auto n = static_cast<double>(rows.size());
  csv += "mean," + fmt_double(succ / n) + ",," + fmt_double(t_sum / n) + "," +
         fmt_double(u_sum / n) + "," + fmt_double(norm_sum / n) + "\n";
  detail::write_file(a.out + "/summary.csv", csv);

  json cfg_json = {{"delta", a.delta},
                   {"ratio", a.ratio},
                   {"step_size", a.step_size},
                   {"max_iters", a.max_iters},
                   {"targets", json::array()}};
  for (const SeqTarget& t : cfg.targets)
    cfg_json["targets"].push_back(
        {{"step", t.step}, {"coord", t.coord}, {"desired", t.desired}});
  json rep = attack_report_header("attack seqtarget", a, cfg_json);
  rep["n_items"] = rows.size();
  rep["success_rate"] = succ / n;
  rep["mean_targeted_abs_change"] = t_sum / n;
  rep["mean_untargeted_max_abs_change"] = u_sum / n;
  write_json(a.out + "/attack_report.json", rep);
  std::cerr << "seqtarget: success rate " << succ / n << " over " << rows.size()
            << " inputs -> " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial input sequences for small recurrent networks"};
  app.require_subcommand(1);

  ConfigFile config;
  std::string config_path;

  // gen
  CLI::App* gen = app.add_subcommand("gen", "generate synthetic datasets");
  gen->require_subcommand(1);
  GenCorpusArgs gc;
  CLI::App* gen_corpus = gen->add_subcommand("corpus", "cue-word sentiment corpus");
  gen_corpus->add_option("--vocab", gc.vocab, "dictionary size");
  gen_corpus->add_option("--embed-dim", gc.embed_dim, "embedding width");
  gen_corpus->add_option("--n-train", gc.n_train, "training sentences");
  gen_corpus->add_option("--n-test", gc.n_test, "held-out sentences");
  gen_corpus->add_option("--min-len", gc.min_len, "shortest sentence");
  gen_corpus->add_option("--max-len", gc.max_len, "longest sentence");
  gen_corpus->add_option("--cue-rate", gc.cue_rate, "per-slot cue probability");
  gen_corpus->add_flag("--binary-embeddings", gc.binary_embeddings,
                       "store dictionary embeddings as raw floats");
  gen_corpus->add_option("--seed", gc.seed, "root seed");
  gen_corpus->add_option("--out", gc.out, "output directory")->required();
  gen_corpus->add_option("--config", config_path, "JSON config file");

  GenPairsArgs gp;
  CLI::App* gen_pairs = gen->add_subcommand("seqpairs", "correlated sequence pairs");
  gen_pairs->add_option("--n-pairs", gp.n_pairs, "number of pairs");
  gen_pairs->add_option("--len", gp.len, "steps per sequence");
  gen_pairs->add_option("--in-width", gp.in_width, "input values per step");
  gen_pairs->add_option("--out-width", gp.out_width, "output values per step");
  gen_pairs->add_option("--alpha", gp.alpha, "correlation injection strength");
  gen_pairs->add_option("--seed", gp.seed, "root seed");
  gen_pairs->add_option("--out", gp.out, "output directory")->required();
  gen_pairs->add_option("--config", config_path, "JSON config file");

  // train
  CLI::App* train = app.add_subcommand("train", "train a model");
  train->require_subcommand(1);
  TrainArgs ts;
  ts.epochs = 400;
  ts.lr = 1e-3;
  ts.batch = 1;
  CLI::App* train_seq = train->add_subcommand("sequential", "vanilla RNN on pair data");
  train_seq->add_option("--pairs", ts.pairs, "pairs CSV")->required();
  train_seq->add_option("--epochs", ts.epochs, "training epochs");
  train_seq->add_option("--lr", ts.lr, "learning rate");
  train_seq->add_option("--hidden", ts.hidden, "hidden state width");
  train_seq->add_option("--init-scale", ts.init_scale, "uniform init range");
  train_seq->add_option("--batch", ts.batch, "pairs per update, 0 = full batch");
  train_seq->add_option("--seed", ts.seed, "root seed");
  train_seq->add_option("--out", ts.out, "output directory")->required();
  train_seq->add_option("--config", config_path, "JSON config file");

  TrainArgs tc;
  tc.epochs = 100;
  tc.lr = 0.3;
  tc.batch = 16;
  CLI::App* train_clf =
      train->add_subcommand("classifier", "LSTM classifier on a corpus");
  train_clf->add_option("--corpus", tc.corpus, "labeled corpus file")->required();
  train_clf->add_option("--dict", tc.dict, "dictionary file")->required();
  train_clf->add_option("--epochs", tc.epochs, "training epochs");
  train_clf->add_option("--lr", tc.lr, "learning rate");
  train_clf->add_option("--hidden", tc.hidden, "LSTM hidden width");
  train_clf->add_option("--init-scale", tc.init_scale, "uniform init range");
  train_clf->add_option("--batch", tc.batch, "sentences per update");
  train_clf->add_flag("--clip", tc.clip, "clip gradient norm");
  train_clf->add_option("--clip-norm", tc.clip_norm, "gradient norm ceiling");
  train_clf->add_option("--seed", tc.seed, "root seed");
  train_clf->add_option("--out", tc.out, "output directory")->required();
  train_clf->add_option("--config", config_path, "JSON config file");

  // eval
  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
  eval_cmd->add_option("--model", ev.model, "model file")->required();
  eval_cmd->add_option("--data", ev.data, "pairs CSV or corpus file")->required();
  eval_cmd->add_option("--dict", ev.dict, "dictionary (classifier only)");
  eval_cmd->add_option("--out", ev.out, "also write metrics JSON here");
  eval_cmd->add_option("--config", config_path, "JSON config file");

  // jacobian
  JacobianArgs ja;
  CLI::App* jac_cmd =
      app.add_subcommand("jacobian", "dump the input/output Jacobian tensor");
  jac_cmd->add_option("--model", ja.model, "sequential model file")->required();
  jac_cmd->add_option("--data", ja.data, "pairs CSV to draw the input from");
  jac_cmd->add_option("--index", ja.index, "pair index within --data");
  jac_cmd->add_option("--random-len", ja.random_len,
                      "use a seeded random input of this length instead");
  jac_cmd->add_option("--seed", ja.seed, "root seed");
  jac_cmd->add_option("--out", ja.out, "output CSV")->required();
  jac_cmd->add_option("--config", config_path, "JSON config file");

  // attack
  CLI::App* attack = app.add_subcommand("attack", "craft adversarial inputs");
  attack->require_subcommand(1);
  AttackArgs af;
  CLI::App* atk_fgsm = attack->add_subcommand("fgsm", "gradient-sign perturbation");
  atk_fgsm->add_option("--model", af.model, "sequential model file")->required();
  atk_fgsm->add_option("--data", af.data, "pairs CSV")->required();
  atk_fgsm->add_option("--epsilon", af.epsilon, "perturbation magnitude");
  atk_fgsm->add_option("--jobs", af.jobs, "parallel workers");
  atk_fgsm->add_option("--seed", af.seed, "root seed");
  atk_fgsm->add_option("--out", af.out, "output directory")->required();
  atk_fgsm->add_option("--config", config_path, "JSON config file");

  AttackArgs aw;
  CLI::App* atk_swap = attack->add_subcommand("wordswap", "dictionary word-swap attack");
  atk_swap->add_option("--model", aw.model, "classifier model file")->required();
  atk_swap->add_option("--corpus", aw.data, "corpus file")->required();
  atk_swap->add_option("--dict", aw.dict, "dictionary file")->required();
  atk_swap->add_option("--budget-frac", aw.budget_frac,
                       "changed-word budget as a fraction of length");
  atk_swap->add_option("--jobs", aw.jobs, "parallel workers");
  atk_swap->add_option("--seed", aw.seed, "root seed");
  atk_swap->add_option("--out", aw.out, "output directory")->required();
  atk_swap->add_option("--config", config_path, "JSON config file");

  AttackArgs as;
  CLI::App* atk_seq = attack->add_subcommand("seqtarget", "steer targeted output steps");
  atk_seq->add_option("--model", as.model, "sequential model file")->required();
  atk_seq->add_option("--data", as.data, "pairs CSV")->required();
  atk_seq->add_option("--target", as.targets, "step:coord:value, repeatable")
      ->required();
  atk_seq->add_option("--delta", as.delta, "acceptance margin per target");
  atk_seq->add_option("--ratio", as.ratio, "on/off influence selectivity");
  atk_seq->add_option("--step-size", as.step_size, "per-iteration step");
  atk_seq->add_option("--max-iters", as.max_iters, "iteration budget");
  atk_seq->add_option("--jobs", as.jobs, "parallel workers");
  atk_seq->add_option("--seed", as.seed, "root seed");
  atk_seq->add_option("--out", as.out, "output directory")->required();
  atk_seq->add_option("--config", config_path, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!config_path.empty()) {
      config.load(config_path);
      for (CLI::App* cmd : {gen_corpus, gen_pairs, train_seq, train_clf, eval_cmd,
                            jac_cmd, atk_fgsm, atk_swap, atk_seq})
        if (cmd->parsed()) config.apply(cmd);
    }
    if (gen_corpus->parsed()) return run_gen_corpus(gc);
    if (gen_pairs->parsed()) return run_gen_seqpairs(gp);
    if (train_seq->parsed()) return run_train_sequential(ts);
    if (train_clf->parsed()) return run_train_classifier(tc);
    if (eval_cmd->parsed()) return run_eval(ev);
    if (jac_cmd->parsed()) return run_jacobian(ja);
    if (atk_fgsm->parsed()) return run_attack_fgsm(af);
    if (atk_swap->parsed()) return run_attack_wordswap(aw);
    if (atk_seq->parsed()) return run_attack_seqtarget(as);
  } catch (const TrainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

// Copyright 2026 The subicap Authors.
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

// subicap command line. Every subcommand that writes a file also writes
// <file>.manifest.json beside it.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/core.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "subicap/analysis.hpp"
#include "subicap/baseline.hpp"
#include "subicap/corpus.hpp"
#include "subicap/decoding.hpp"
#include "subicap/error.hpp"
#include "subicap/model.hpp"
#include "subicap/synthetic.hpp"
#include "subicap/text.hpp"
#include "subicap/unigram.hpp"

#ifndef SUBICAP_VERSION
#define SUBICAP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subicap;

namespace {

using Clock = std::chrono::steady_clock;

// Options shared by many subcommands. Flags win over the --config file,
// which wins over these defaults (CLI11 resolves the precedence).
struct Options {
  std::string corpus;
  std::string algo = "unigram";
  size_t vocab_size = 1000;
  std::vector<size_t> vocab_sizes;
  size_t merges = 1000;
  int64_t min_freq = kDefaultMinWordFreq;
  std::string out;
  uint64_t seed = 0;
  size_t beam = 2;
  bool greedy = false;
  size_t max_len = 0;  // 0: model maximum
  size_t d_model = 32;
  size_t layers = 2;
  size_t heads = 2;
  size_t d_ff = 0;  // 0: 2 × d_model
  std::string model;
  std::string vocab;
  std::string checkpoint;
  std::string regions;
  std::string generated;
  size_t images = 10;
  size_t steps = 2000;
  double lr = 5e-4;
  double target_accuracy = 0.0;
  bool ids = false;
};

struct Run {
  std::string name;
  CLI::App* app = nullptr;
  Clock::time_point start = Clock::now();
  std::chrono::system_clock::time_point wall = std::chrono::system_clock::now();
  json inputs = json::object();
};

json resolved_config(const CLI::App& app) {
  json cfg = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help") continue;
    const std::string key = opt->get_lnames()[0];
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() > 1) {
        cfg[key] = r;
      } else if (opt->get_type_size() == 0) {
        cfg[key] = true;
      } else {
        cfg[key] = r.back();
      }
    } else if (opt->get_type_size() == 0) {
      cfg[key] = false;
    } else if (!opt->get_default_str().empty()) {
      cfg[key] = opt->get_default_str();
    }
  }
  return cfg;
}

void write_manifest(const Run& run, const Options& o, const std::vector<fs::path>& outputs,
                    const std::string& config_file) {
  if (outputs.empty()) return;
  json m;
  m["subcommand"] = run.name;
  m["version"] = SUBICAP_VERSION;
  m["config"] = resolved_config(*run.app);
  m["config_file"] = config_file;
  m["seed"] = o.seed;
  m["inputs"] = run.inputs;
  m["outputs"] = json::array();
  for (const auto& p : outputs) m["outputs"].push_back(p.string());
  m["started_at"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(run.wall)));
  m["duration_seconds"] = std::chrono::duration<double>(Clock::now() - run.start).count();
  const fs::path path = outputs.front().string() + ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << m.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path sidecar_for(const Options& o) {
  if (!o.regions.empty()) return o.regions;
  return fs::path(o.corpus).replace_extension(".regions.json");
}

ModelConfig model_config(const Options& o, size_t vocab_size) {
  ModelConfig cfg;
  cfg.d_model = o.d_model;
  cfg.n_enc_layers = o.layers;
  cfg.n_dec_layers = o.layers;
  cfg.n_heads = o.heads;
  cfg.d_ff = o.d_ff ? o.d_ff : 2 * o.d_model;
  cfg.vocab_size = vocab_size;
  if (o.max_len) cfg.max_seq_len = o.max_len;
  cfg.validate();
  return cfg;
}

// ---- subcommands ----------------------------------------------------------

std::vector<fs::path> cmd_train_tokenizer(const Options& o, Run& run) {
  run.inputs["corpus"] = o.corpus;
  const Corpus corpus = load_corpus(o.corpus);
  spdlog::info("{} captions, {} distinct words, {} characters", corpus.captions.size(),
               corpus.word_counts.size(), corpus.char_inventory.size());
  if (o.algo == "unigram") {
    TrainerConfig cfg;
    cfg.target_vocab_size = o.vocab_size;
    const SubwordVocab vocab = train_unigram(corpus, cfg);
    save_vocab(vocab, o.out);
    spdlog::info("unigram vocabulary: {} pieces", vocab.num_pieces());
  } else if (o.algo == "bpe") {
    const BpeModel model = train_bpe(corpus, o.merges);
    save_bpe(model, o.out);
    spdlog::info("bpe: {} merges, {} symbols", model.merges.size(), model.vocab.size());
  } else {
    const WordVocab vocab = train_word_vocab(corpus, o.min_freq);
    save_word_vocab(vocab, o.out);
    spdlog::info("word vocabulary: {} entries", vocab.size());
  }
  return {o.out};
}

// Tokenizer for encode/decode, chosen by --algo.
struct LoadedTokenizer {
  std::optional<SubwordVocab> unigram;
  std::optional<BpeModel> bpe;
  std::optional<WordVocab> words;
};

LoadedTokenizer load_tokenizer(const Options& o) {
  LoadedTokenizer t;
  if (o.algo == "unigram") {
    t.unigram = load_vocab(o.model);
  } else if (o.algo == "bpe") {
    t.bpe = load_bpe(o.model);
  } else {
    t.words = load_word_vocab(o.model);
  }
  return t;
}

std::string encode_line(const std::string& line, const LoadedTokenizer& t, bool ids) {
  const std::string text = normalize_text(line);
  std::vector<std::string> pieces;
  if (t.unigram) {
    const TokenSequence seq = encode(text, *t.unigram);
    if (ids) {
      std::vector<std::string> out;
      for (PieceId id : seq.ids) out.push_back(std::to_string(id));
      return join_words(out);
    }
    pieces = seq.pieces;
  } else if (t.bpe) {
    pieces = bpe_tokenize(text, *t.bpe);
  } else {
    pieces = word_tokenize(text, *t.words);
  }
  return join_words(pieces);
}

std::string decode_line(const std::string& line, const LoadedTokenizer& t, bool ids) {
  const auto tokens = split_words(line);
  if (ids) {
    if (!t.unigram) throw Error(ErrorKind::kInvalidArgument, "--ids needs --algo unigram");
    std::vector<PieceId> out;
    for (const auto& tok : tokens) {
      try {
        out.push_back(static_cast<PieceId>(std::stol(tok)));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kParse, "not a piece id: '" + tok + "'");
      }
    }
    return decode_ids(out, *t.unigram);
  }
  if (t.words) return join_words(tokens);
  return detokenize(tokens);
}

std::vector<fs::path> cmd_stream(const Options& o, Run& run, bool encoding) {
  run.inputs["model"] = o.model;
  const LoadedTokenizer t = load_tokenizer(o);
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) throw Error(ErrorKind::kIo, "cannot write '" + o.out + "'");
  }
  std::ostream& out = o.out.empty() ? std::cout : file;
  std::string line;
  size_t n = 0;
  while (std::getline(std::cin, line)) {
    ++n;
    try {
      out << (encoding ? encode_line(line, t, o.ids) : decode_line(line, t, o.ids)) << '\n';
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("line {}: {}", n, e.what()));
    }
  }
  if (o.out.empty()) return {};
  return {o.out};
}

// JSON goes to --out (text beside it as .txt); text also to stdout.
std::vector<fs::path> emit_report(const Options& o, const json& j, const std::string& text) {
  std::cout << text;
  if (o.out.empty()) return {};
  write_text(o.out, j.dump(2) + "\n");
  const fs::path txt = fs::path(o.out).replace_extension(".txt");
  write_text(txt, text);
  return {o.out, txt};
}

std::vector<fs::path> cmd_sweep(const Options& o, Run& run) {
  run.inputs["corpus"] = o.corpus;
  const Corpus corpus = load_corpus(o.corpus);
  TrainerConfig cfg;
  const std::vector<size_t> ks =
      o.vocab_sizes.empty() ? std::vector<size_t>{300, 500, 1000, 2000} : o.vocab_sizes;
  const SweepReport r = vocab_sweep(corpus, ks, cfg);
  return emit_report(o, to_json(r), to_text(r));
}

std::vector<fs::path> cmd_report(const Options& o, Run& run) {
  run.inputs["corpus"] = o.corpus;
  run.inputs["generated"] = o.generated;
  const Corpus training = load_corpus(o.corpus);
  std::vector<std::string> generated;
  std::istringstream in(read_text(o.generated));
  std::string line;
  while (std::getline(in, line)) {
    // Accept both bare captions and "image_id<TAB>caption".
    const auto tab = line.find('\t');
    if (tab != std::string::npos) line = line.substr(tab + 1);
    if (!line.empty()) generated.push_back(normalize_text(line));
  }
  const UniquenessReport r = uniqueness_report(generated, training);
  return emit_report(o, to_json(r), to_text(r));
}

std::vector<fs::path> cmd_params(const Options& o, Run&) {
  // Any valid vocabulary passes validation; param_count takes V separately.
  const ModelConfig dims = model_config(o, kNumControlPieces + 1);
  std::vector<ParamCount> counts;
  const std::vector<size_t> vs = o.vocab_sizes.empty() ? std::vector<size_t>{9486, 1085} : o.vocab_sizes;
  for (size_t v : vs) counts.push_back(param_count(v, dims));
  return emit_report(o, to_json(counts), to_text(counts));
}

std::vector<fs::path> cmd_stats(const Options& o, Run& run) {
  run.inputs["corpus"] = o.corpus;
  const CorpusStats s = corpus_stats(load_corpus(o.corpus));
  const json j = {{"num_captions", s.num_captions},
                  {"num_images", s.num_images},
                  {"total_words", s.total_words},
                  {"distinct_words", s.distinct_words},
                  {"avg_caption_length_words", s.avg_caption_length_words}};
  std::cout << j.dump(2) << '\n';
  if (o.out.empty()) return {};
  write_text(o.out, j.dump(2) + "\n");
  return {o.out};
}

std::vector<fs::path> cmd_synth(const Options& o, Run&) {
  Options with_corpus = o;
  with_corpus.corpus = o.out;
  const fs::path sidecar = sidecar_for(with_corpus);
  save_synthetic(synthetic_regions(o.seed, o.images), o.out, sidecar);
  spdlog::info("{} synthetic images written to {} and {}", o.images, o.out, sidecar.string());
  return {o.out, sidecar};
}

std::vector<Example> make_examples(const std::vector<SyntheticImage>& images,
                                   const SubwordVocab& vocab, const ModelConfig& cfg) {
  std::vector<Example> examples;
  size_t longest = 0;
  for (const auto& img : images) {
    examples.push_back({img.regions, frame_sequence(encode(img.caption, vocab).ids, cfg)});
    longest = std::max(longest, examples.back().sequence.size());
  }
  for (auto& e : examples) e.sequence.resize(longest, kPadId);
  return examples;
}

std::vector<fs::path> cmd_train_lm(const Options& o, Run& run) {
  const fs::path sidecar = sidecar_for(o);
  run.inputs = {{"corpus", o.corpus}, {"regions", sidecar.string()}, {"vocab", o.vocab}};
  const auto images = load_synthetic(o.corpus, sidecar);
  const SubwordVocab vocab = load_vocab(o.vocab);
  const ModelConfig cfg = model_config(o, vocab.size());
  const auto examples = make_examples(images, vocab, cfg);
  ModelParams params = init_params(cfg, o.seed);
  spdlog::info("{} images, vocabulary {}, {} parameters", images.size(), vocab.size(),
               params.num_scalars());
  OptimConfig optim;
  optim.learning_rate = o.lr;
  AdamState state;
  for (size_t step = 0; step < o.steps; ++step) {
    const StepResult r = train_step(examples, params, cfg, optim, state);
    if (step == 0) spdlog::info("step 0 loss {:.4f} (ln V = {:.4f})", r.loss, std::log(static_cast<double>(vocab.size())));
    spdlog::debug("step {} loss {:.6f} accuracy {:.4f} lr {:.2e}", step, r.loss, r.accuracy, r.learning_rate);
    if ((step + 1) % 100 == 0) spdlog::info("step {} loss {:.4f} accuracy {:.4f}", step + 1, r.loss, r.accuracy);
    if (!std::isfinite(r.loss)) throw Error(ErrorKind::kNumerical, fmt::format("loss diverged at step {}", step));
    if (o.target_accuracy > 0.0 && r.accuracy >= o.target_accuracy) {
      spdlog::info("target accuracy reached at step {}", step);
      break;
    }
  }
  spdlog::info("final accuracy {:.4f}", token_accuracy(examples, params, cfg));
  save_checkpoint(o.out, cfg, params);
  return {o.out};
}

std::vector<fs::path> cmd_generate(const Options& o, Run& run) {
  const fs::path sidecar = sidecar_for(o);
  run.inputs = {{"corpus", o.corpus}, {"regions", sidecar.string()}, {"vocab", o.vocab},
                {"checkpoint", o.checkpoint}};
  const auto [cfg, params] = load_checkpoint(o.checkpoint);
  const SubwordVocab vocab = load_vocab(o.vocab);
  if (vocab.size() != cfg.vocab_size) {
    throw Error(ErrorKind::kShapeMismatch,
                fmt::format("checkpoint expects vocabulary {} but '{}' has {}", cfg.vocab_size, o.vocab,
                            vocab.size()));
  }
  const size_t max_len = o.max_len ? o.max_len : cfg.max_seq_len - 1;
  std::string text;
  for (const auto& img : load_synthetic(o.corpus, sidecar)) {
    validate_regions(img.regions, cfg.d_in);
    const Matrix enc = encoder_forward(img.regions, params, cfg);
    const Hypothesis h =
        o.greedy ? greedy_decode(model_next_token(enc, params, cfg), kBosId, kEosId, max_len)
                 : beam_search(enc, params, cfg, o.beam, max_len);
    text += img.image_id + "\t" + decode_ids(h.ids, vocab) + "\n";
  }
  if (o.out.empty()) {
    std::cout << text;
    return {};
  }
  write_text(o.out, text);
  return {o.out};
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("subicap");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("SUBICAP_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  Options o;
  CLI::App app{"subicap: subword tokenizers and a toy relational captioner"};
  app.set_version_flag("--version", SUBICAP_VERSION);
  app.set_config("--config", "", "TOML/INI file; flags override it")->configurable(false);
  app.require_subcommand(1);

  const std::vector<std::string> algos = {"unigram", "bpe", "word"};
  std::vector<Run> runs;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    runs.push_back({name, s});
    return s;
  };

  auto* train_tok = sub("train-tokenizer", "train a unigram, BPE or word vocabulary");
  train_tok->add_option("--corpus", o.corpus, "TSV corpus")->required();
  train_tok->add_option("--algo", o.algo)->check(CLI::IsMember(algos))->capture_default_str();
  train_tok->add_option("--vocab-size", o.vocab_size, "unigram piece count")->capture_default_str();
  train_tok->add_option("--merges", o.merges, "BPE merge count")->capture_default_str();
  train_tok->add_option("--min-freq", o.min_freq, "word baseline threshold")->capture_default_str();
  train_tok->add_option("--out", o.out)->required();
  train_tok->add_option("--seed", o.seed)->capture_default_str();

  for (const char* name : {"encode", "decode"}) {
    auto* s = sub(name, std::string(name) + " stdin lines");
    s->add_option("--model", o.model, "tokenizer file")->required();
    s->add_option("--algo", o.algo)->check(CLI::IsMember(algos))->capture_default_str();
    s->add_flag("--ids", o.ids, "piece ids instead of pieces (unigram)");
    s->add_option("--out", o.out, "output file; default stdout");
  }

  auto* sweep = sub("sweep", "unigram vocabulary-size sweep");
  sweep->add_option("--corpus", o.corpus)->required();
  sweep->add_option("--vocab-size", o.vocab_sizes, "repeatable; default 300 500 1000 2000");
  sweep->add_option("--out", o.out, "JSON report; text goes beside it");
  sweep->add_option("--seed", o.seed)->capture_default_str();

  auto* report = sub("report", "uniqueness of generated captions");
  report->add_option("--corpus", o.corpus, "training corpus")->required();
  report->add_option("--generated", o.generated, "one caption per line")->required();
  report->add_option("--out", o.out);

  auto* params = sub("params", "parameter counts per vocabulary size");
  params->add_option("--vocab", o.vocab_sizes, "repeatable");
  params->add_option("--d-model", o.d_model)->capture_default_str();
  params->add_option("--layers", o.layers)->capture_default_str();
  params->add_option("--heads", o.heads)->capture_default_str();
  params->add_option("--d-ff", o.d_ff, "default 2 x d-model");
  params->add_option("--out", o.out);

  auto* stats = sub("stats", "corpus statistics");
  stats->add_option("--corpus", o.corpus)->required();
  stats->add_option("--out", o.out);

  auto* synth = sub("synth", "write a synthetic region/caption set");
  synth->add_option("--images", o.images)->capture_default_str();
  synth->add_option("--seed", o.seed)->capture_default_str();
  synth->add_option("--out", o.out, "corpus TSV")->required();
  synth->add_option("--regions", o.regions, "sidecar; default <out>.regions.json");

  auto* train_lm = sub("train-lm", "train the captioner on a synthetic set");
  auto* generate = sub("generate", "caption every image of a synthetic set");
  for (CLI::App* s : {train_lm, generate}) {
    s->add_option("--corpus", o.corpus, "synthetic corpus TSV")->required();
    s->add_option("--regions", o.regions, "sidecar; default <corpus>.regions.json");
    s->add_option("--vocab", o.vocab, "unigram vocabulary")->required();
    s->add_option("--max-len", o.max_len);
  }
  train_lm->add_option("--out", o.out, "checkpoint")->required();
  train_lm->add_option("--seed", o.seed)->capture_default_str();
  train_lm->add_option("--steps", o.steps)->capture_default_str();
  train_lm->add_option("--lr", o.lr)->capture_default_str();
  train_lm->add_option("--target-accuracy", o.target_accuracy, "stop once reached; 0 disables")
      ->capture_default_str();
  train_lm->add_option("--d-model", o.d_model)->capture_default_str();
  train_lm->add_option("--layers", o.layers)->capture_default_str();
  train_lm->add_option("--heads", o.heads)->capture_default_str();
  train_lm->add_option("--d-ff", o.d_ff, "default 2 x d-model");
  generate->add_option("--checkpoint", o.checkpoint)->required();
  generate->add_option("--beam", o.beam)->check(CLI::PositiveNumber)->capture_default_str();
  generate->add_flag("--greedy", o.greedy);
  generate->add_option("--out", o.out, "default stdout");
  generate->add_option("--seed", o.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "subicap: error: usage: " << e.what() << '\n';
    return 2;
  }

  std::string config_file;
  if (auto* c = app.get_config_ptr(); c && c->count() > 0) config_file = c->as<std::string>();

  for (Run& run : runs) {
    if (!run.app->parsed()) continue;
    try {
      std::vector<fs::path> outputs;
      if (run.name == "train-tokenizer") outputs = cmd_train_tokenizer(o, run);
      else if (run.name == "encode") outputs = cmd_stream(o, run, true);
      else if (run.name == "decode") outputs = cmd_stream(o, run, false);
      else if (run.name == "sweep") outputs = cmd_sweep(o, run);
      else if (run.name == "report") outputs = cmd_report(o, run);
      else if (run.name == "params") outputs = cmd_params(o, run);
      else if (run.name == "stats") outputs = cmd_stats(o, run);
      else if (run.name == "synth") outputs = cmd_synth(o, run);
      else if (run.name == "train-lm") outputs = cmd_train_lm(o, run);
      else if (run.name == "generate") outputs = cmd_generate(o, run);
      write_manifest(run, o, outputs, config_file);
    } catch (const Error& e) {
      std::cerr << "subicap: error: " << error_kind_name(e.kind()) << ": " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "subicap: error: internal: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}

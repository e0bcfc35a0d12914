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

#include "subicap/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "subicap/error.hpp"
#include "subicap/text.hpp"

namespace subicap {

TokenizationStats measure_tokenization(const Corpus& corpus, const Tokenizer& tokenize,
                                       std::string_view unk) {
  TokenizationStats stats;
  std::set<std::string> used;
  size_t unknown = 0;
  for (const auto& caption : corpus.captions) {
    const auto tokens = tokenize(caption.text);
    stats.total_tokens += tokens.size();
    stats.max_tokens = std::max(stats.max_tokens, tokens.size());
    for (const auto& t : tokens) {
      if (t == unk) ++unknown;
      used.insert(t);
    }
  }
  stats.distinct_pieces = used.size();
  if (!corpus.captions.empty()) {
    stats.mean_tokens =
        static_cast<double>(stats.total_tokens) / static_cast<double>(corpus.captions.size());
  }
  if (stats.total_tokens > 0) {
    stats.oov_rate = static_cast<double>(unknown) / static_cast<double>(stats.total_tokens);
  }
  return stats;
}

SweepReport vocab_sweep(const Corpus& corpus, const std::vector<size_t>& ks,
                        const TrainerConfig& cfg) {
  if (ks.empty()) throw Error(ErrorKind::kInvalidArgument, "sweep grid is empty");
  std::vector<size_t> grid = ks;
  std::sort(grid.begin(), grid.end());
  SweepReport report;
  for (size_t k : grid) {
    TrainerConfig c = cfg;
    c.target_vocab_size = k;
    const SubwordVocab vocab = train_unigram(corpus, c);
    SweepRow row;
    row.requested_k = k;
    row.vocab_size = vocab.num_pieces();
    row.stats = measure_tokenization(corpus, [&](std::string_view text) {
      return viterbi_segment(text, vocab).pieces;
    });
    report.rows.push_back(row);
  }
  return report;
}

UniquenessReport uniqueness_report(const std::vector<std::string>& generated,
                                   const Corpus& training) {
  if (generated.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "uniqueness report needs at least one caption");
  }
  std::unordered_set<std::string> train_set;
  for (const auto& c : training.captions) train_set.insert(c.text);
  std::unordered_set<std::string> distinct;
  size_t novel = 0;
  size_t words = 0;
  for (const auto& g : generated) {
    distinct.insert(g);
    if (!train_set.count(g)) ++novel;
    words += split_words_view(g).size();
  }
  const auto n = static_cast<double>(generated.size());
  UniquenessReport r;
  r.num_generated = generated.size();
  r.pct_distinct_within_set = 100.0 * static_cast<double>(distinct.size()) / n;
  r.pct_novel_vs_training = 100.0 * static_cast<double>(novel) / n;
  r.avg_length_words = static_cast<double>(words) / n;
  return r;
}

ParamCount param_count(size_t vocab_size, const ModelConfig& dims) {
  if (dims.d_model == 0 || dims.n_heads == 0 || dims.d_ff == 0 || dims.d_in == 0) {
    throw Error(ErrorKind::kInvalidArgument, "model dimensions must be positive");
  }
  const size_t d = dims.d_model;
  const size_t ff = dims.d_ff;
  const size_t attention = 4 * (d * d + d);
  const size_t layer_norm = 2 * d;
  const size_t ffn = d * ff + ff + ff * d + d;
  const size_t geometry = 4 * dims.geo_embed_dim * dims.n_heads;

  ParamCount pc;
  pc.vocab_size = vocab_size;
  pc.model_dim = d;
  pc.embedding_params = vocab_size * d;
  pc.output_params = vocab_size * d;
  pc.core_params = dims.d_in * d + d +
                   dims.n_enc_layers * (attention + geometry + ffn + 2 * layer_norm) +
                   dims.n_dec_layers * (2 * attention + ffn + 3 * layer_norm);
  pc.total = pc.core_params + pc.embedding_params + pc.output_params;
  return pc;
}

nlohmann::json to_json(const SweepReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"requested_k", r.requested_k},
                    {"vocab_size", r.vocab_size},
                    {"mean_tokens", r.stats.mean_tokens},
                    {"max_tokens", r.stats.max_tokens},
                    {"oov_rate", r.stats.oov_rate},
                    {"distinct_pieces", r.stats.distinct_pieces}});
  }
  return {{"rows", rows}};
}

nlohmann::json to_json(const UniquenessReport& r) {
  return {{"num_generated", r.num_generated},
          {"pct_distinct_within_set", r.pct_distinct_within_set},
          {"pct_novel_vs_training", r.pct_novel_vs_training},
          {"avg_length_words", r.avg_length_words}};
}

nlohmann::json to_json(const std::vector<ParamCount>& counts) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : counts) {
    rows.push_back({{"vocab_size", c.vocab_size},
                    {"model_dim", c.model_dim},
                    {"embedding_params", c.embedding_params},
                    {"output_params", c.output_params},
                    {"core_params", c.core_params},
                    {"total", c.total}});
  }
  nlohmann::json out = {{"rows", rows}};
  if (counts.size() >= 2) {
    const auto a = static_cast<int64_t>(counts.front().total);
    const auto b = static_cast<int64_t>(counts.back().total);
    out["delta"] = a - b;
  }
  return out;
}

std::string to_text(const SweepReport& report) {
  std::string out = fmt::format("{:>10} {:>10} {:>12} {:>10} {:>9} {:>10}\n", "requested", "vocab",
                                "mean_tokens", "max_tokens", "oov_rate", "distinct");
  for (const auto& r : report.rows) {
    out += fmt::format("{:>10} {:>10} {:>12.4f} {:>10} {:>9.4f} {:>10}\n", r.requested_k,
                       r.vocab_size, r.stats.mean_tokens, r.stats.max_tokens, r.stats.oov_rate,
                       r.stats.distinct_pieces);
  }
  return out;
}

std::string to_text(const UniquenessReport& r) {
  return fmt::format(
      "{:<26}{:>10}\n{:<26}{:>10.2f}\n{:<26}{:>10.2f}\n{:<26}{:>10.2f}\n", "generated",
      r.num_generated, "distinct_within_set_pct", r.pct_distinct_within_set,
      "novel_vs_training_pct", r.pct_novel_vs_training, "avg_length_words", r.avg_length_words);
}

std::string to_text(const std::vector<ParamCount>& counts) {
  std::string out = fmt::format("{:>10} {:>8} {:>12} {:>12} {:>12} {:>12}\n", "vocab", "dim",
                                "embedding", "output", "core", "total");
  for (const auto& c : counts) {
    out += fmt::format("{:>10} {:>8} {:>12} {:>12} {:>12} {:>12}\n", c.vocab_size, c.model_dim,
                       c.embedding_params, c.output_params, c.core_params, c.total);
  }
  if (counts.size() >= 2) {
    const auto a = static_cast<int64_t>(counts.front().total);
    const auto b = static_cast<int64_t>(counts.back().total);
    out += fmt::format("delta {}\n", a - b);
  }
  return out;
}

}  // namespace subicap

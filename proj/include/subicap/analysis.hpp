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

// Vocabulary-size tradeoffs, caption uniqueness and parameter arithmetic.
//
// JSON key names (stable):
//   sweep:      {"rows": [{"requested_k", "vocab_size", "mean_tokens",
//                "max_tokens", "oov_rate", "distinct_pieces"}]}
//   uniqueness: {"num_generated", "pct_distinct_within_set",
//                "pct_novel_vs_training", "avg_length_words"}
//   params:     {"rows": [{"vocab_size", "model_dim", "embedding_params",
//                "output_params", "core_params", "total"}], "delta"}

#ifndef SUBICAP_ANALYSIS_HPP_
#define SUBICAP_ANALYSIS_HPP_

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "subicap/corpus.hpp"
#include "subicap/model.hpp"
#include "subicap/unigram.hpp"

namespace subicap {

struct TokenizationStats {
  double mean_tokens = 0.0;
  size_t max_tokens = 0;
  double oov_rate = 0.0;
  size_t distinct_pieces = 0;
  size_t total_tokens = 0;
};

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

// Tokens equal to `unk` count as out-of-vocabulary.
TokenizationStats measure_tokenization(const Corpus& corpus, const Tokenizer& tokenize,
                                       std::string_view unk = "<unk>");

struct SweepRow {
  size_t requested_k = 0;
  size_t vocab_size = 0;  // pieces, control pieces excluded
  TokenizationStats stats;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // ascending requested_k
};

SweepReport vocab_sweep(const Corpus& corpus, const std::vector<size_t>& ks,
                        const TrainerConfig& cfg);

struct UniquenessReport {
  size_t num_generated = 0;
  double pct_distinct_within_set = 0.0;
  double pct_novel_vs_training = 0.0;
  double avg_length_words = 0.0;
};

// Throws Error(kInvalidArgument) when `generated` is empty.
UniquenessReport uniqueness_report(const std::vector<std::string>& generated,
                                   const Corpus& training);

struct ParamCount {
  size_t vocab_size = 0;
  size_t model_dim = 0;
  size_t embedding_params = 0;
  size_t output_params = 0;
  size_t core_params = 0;
  size_t total = 0;
};

// Counts every tensor of the relational model with untied input embedding
// and output projection; `dims.vocab_size` is ignored.
ParamCount param_count(size_t vocab_size, const ModelConfig& dims);

nlohmann::json to_json(const SweepReport& report);
nlohmann::json to_json(const UniquenessReport& report);
nlohmann::json to_json(const std::vector<ParamCount>& counts);

std::string to_text(const SweepReport& report);
std::string to_text(const UniquenessReport& report);
std::string to_text(const std::vector<ParamCount>& counts);

}  // namespace subicap

#endif  // SUBICAP_ANALYSIS_HPP_

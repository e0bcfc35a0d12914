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

// Word-level and byte-pair-encoding baselines.

#ifndef SUBICAP_BASELINE_HPP_
#define SUBICAP_BASELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "subicap/corpus.hpp"

namespace subicap {

inline constexpr std::string_view kUnkWord = "<unk>";
inline constexpr int64_t kDefaultMinWordFreq = 5;

class WordVocab {
 public:
  WordVocab() = default;
  WordVocab(std::vector<std::string> words, int64_t min_freq);

  // Specials first: <pad>, <bos>, <eos>, <unk>.
  const std::vector<std::string>& words() const { return words_; }
  int64_t min_freq() const { return min_freq_; }
  size_t size() const { return words_.size(); }
  bool contains(std::string_view word) const;
  static bool is_special(std::string_view word);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, size_t> index_;
  int64_t min_freq_ = 1;
};

// Keeps words with count >= min_freq, by descending count then lexicographic.
WordVocab train_word_vocab(const Corpus& corpus, int64_t min_freq = kDefaultMinWordFreq);
// Out-of-vocabulary words become "<unk>".
std::vector<std::string> word_tokenize(std::string_view text, const WordVocab& vocab);

void save_word_vocab(const WordVocab& vocab, const std::filesystem::path& path);
WordVocab load_word_vocab(const std::filesystem::path& path);

struct BpeModel {
  std::vector<std::pair<std::string, std::string>> merges;
  std::set<std::string> vocab;  // characters plus every merged symbol

  bool operator==(const BpeModel&) const = default;
};

// Merges the most frequent adjacent symbol pair inside words, ties broken by
// (left, right) lexicographically; stops early when no pair occurs twice.
BpeModel train_bpe(const Corpus& corpus, size_t num_merges);

// Applies merges in training order within each word and emits pieces with
// the same continuation markers as the unigram tokenizer.
std::vector<std::string> bpe_tokenize(std::string_view text, const BpeModel& model);

// Symbols of one word after applying the merges, unmarked.
std::vector<std::string> bpe_segment_word(std::u32string_view word, const BpeModel& model);

// "#bpe" header, then "left right" per merge.
void save_bpe(const BpeModel& model, const std::filesystem::path& path);
std::string bpe_to_string(const BpeModel& model);
BpeModel load_bpe(const std::filesystem::path& path);
BpeModel bpe_from_string(std::string_view text);

}  // namespace subicap

#endif  // SUBICAP_BASELINE_HPP_

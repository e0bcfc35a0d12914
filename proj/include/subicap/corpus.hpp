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

// Caption corpus ingestion.
//
// File format: UTF-8, one record per line, "image_id<TAB>caption<LF>".
// Lines whose first byte is '#' are comments; blank lines are skipped.

#ifndef SUBICAP_CORPUS_HPP_
#define SUBICAP_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace subicap {

inline constexpr size_t kDefaultMaxWords = 16;

struct Caption {
  std::string image_id;
  std::string text;  // normalized, at most max_words words

  bool operator==(const Caption&) const = default;
};

struct Corpus {
  std::vector<Caption> captions;
  // Ordered maps keep every downstream iteration deterministic.
  std::map<std::string, int64_t> word_counts;
  std::set<char32_t> char_inventory;

  bool operator==(const Corpus&) const = default;

  // Adds an already-normalized caption and updates counts and inventory.
  void add(Caption caption);
  bool empty() const { return captions.empty(); }
};

struct CorpusStats {
  int64_t num_captions = 0;
  int64_t num_images = 0;
  int64_t total_words = 0;
  int64_t distinct_words = 0;
  double avg_caption_length_words = 0.0;
};

// Normalizes and truncates to the first max_words words.
std::string prepare_caption(std::string_view raw, size_t max_words);

Corpus load_corpus(const std::filesystem::path& path,
                   size_t max_words = kDefaultMaxWords);
Corpus read_corpus(std::istream& in, size_t max_words = kDefaultMaxWords);

// Builds a corpus from raw caption strings with synthetic image ids.
Corpus corpus_from_texts(const std::vector<std::string>& texts,
                         size_t max_words = kDefaultMaxWords);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace subicap

#endif  // SUBICAP_CORPUS_HPP_

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

#include "subicap/corpus.hpp"

#include <fstream>

#include "subicap/error.hpp"
#include "subicap/text.hpp"

namespace subicap {

void Corpus::add(Caption caption) {
  for (auto word : split_words_view(caption.text)) {
    ++word_counts[std::string(word)];
  }
  for (char32_t c : utf8_to_u32(caption.text)) {
    if (c != U' ') char_inventory.insert(c);
  }
  captions.push_back(std::move(caption));
}

std::string prepare_caption(std::string_view raw, size_t max_words) {
  auto words = split_words(normalize_text(raw));
  if (words.size() > max_words) words.resize(max_words);
  return join_words(words);
}

Corpus read_corpus(std::istream& in, size_t max_words) {
  Corpus corpus;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                         ": missing tab separator");
    }
    Caption caption;
    caption.image_id = line.substr(0, tab);
    try {
      caption.text = prepare_caption(std::string_view(line).substr(tab + 1), max_words);
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    corpus.add(std::move(caption));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, size_t max_words) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot read corpus file '" + path.string() + "'");
  }
  return read_corpus(in, max_words);
}

Corpus corpus_from_texts(const std::vector<std::string>& texts, size_t max_words) {
  Corpus corpus;
  for (size_t i = 0; i < texts.size(); ++i) {
    corpus.add({"s" + std::to_string(i), prepare_caption(texts[i], max_words)});
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  for (const auto& c : corpus.captions) out << c.image_id << '\t' << c.text << '\n';
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.num_captions = static_cast<int64_t>(corpus.captions.size());
  std::set<std::string_view> images;
  for (const auto& c : corpus.captions) images.insert(c.image_id);
  stats.num_images = static_cast<int64_t>(images.size());
  for (const auto& [word, count] : corpus.word_counts) stats.total_words += count;
  stats.distinct_words = static_cast<int64_t>(corpus.word_counts.size());
  if (stats.num_captions > 0) {
    stats.avg_caption_length_words =
        static_cast<double>(stats.total_words) / static_cast<double>(stats.num_captions);
  }
  return stats;
}

}  // namespace subicap

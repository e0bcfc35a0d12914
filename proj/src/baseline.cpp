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

#include "subicap/baseline.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "subicap/error.hpp"
#include "subicap/text.hpp"
#include "subicap/unigram.hpp"

namespace subicap {
namespace {

constexpr std::string_view kWordSpecials[] = {kPadPiece, kBosPiece, kEosPiece, kUnkWord};
constexpr std::string_view kBpeHeader = "#bpe";

std::string read_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + std::string(what) + " '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

std::vector<std::string> split_chars(std::u32string_view word) {
  std::vector<std::string> symbols;
  symbols.reserve(word.size());
  for (char32_t c : word) symbols.push_back(u32_to_utf8(c));
  return symbols;
}

// Merges every non-overlapping occurrence of (left, right), scanning left to right.
bool apply_merge(std::vector<std::string>& symbols, const std::string& left,
                 const std::string& right) {
  bool changed = false;
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      ++i;
      changed = true;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
  return changed;
}

}  // namespace

// ---------------------------------------------------------------------------
// Word baseline

WordVocab::WordVocab(std::vector<std::string> words, int64_t min_freq)
    : words_(std::move(words)), min_freq_(min_freq) {
  for (size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate word '" + words_[i] + "'");
    }
  }
}

bool WordVocab::contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

bool WordVocab::is_special(std::string_view word) {
  return std::find(std::begin(kWordSpecials), std::end(kWordSpecials), word) !=
         std::end(kWordSpecials);
}

WordVocab train_word_vocab(const Corpus& corpus, int64_t min_freq) {
  std::vector<std::pair<std::string, int64_t>> kept;
  for (const auto& [word, count] : corpus.word_counts) {
    if (count >= min_freq) kept.emplace_back(word, count);
  }
  // word_counts is already lexicographic, so a stable sort on count suffices.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  for (auto s : kWordSpecials) words.emplace_back(s);
  for (auto& [word, count] : kept) words.push_back(std::move(word));
  return WordVocab(std::move(words), min_freq);
}

std::vector<std::string> word_tokenize(std::string_view text, const WordVocab& vocab) {
  std::vector<std::string> out;
  for (auto word : split_words_view(text)) {
    out.emplace_back(vocab.contains(word) && !WordVocab::is_special(word) ? word : kUnkWord);
  }
  return out;
}

void save_word_vocab(const WordVocab& vocab, const std::filesystem::path& path) {
  std::string content;
  for (const auto& w : vocab.words()) content += w + "\n";
  write_file(path, content);
}

WordVocab load_word_vocab(const std::filesystem::path& path) {
  std::istringstream in(read_file(path, "word vocabulary"));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return WordVocab(std::move(words), 1);
}

// ---------------------------------------------------------------------------
// BPE

BpeModel train_bpe(const Corpus& corpus, size_t num_merges) {
  if (corpus.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot train BPE on an empty corpus");
  }
  BpeModel model;
  std::vector<std::pair<std::vector<std::string>, int64_t>> words;
  for (const auto& [word, freq] : corpus.word_counts) {
    words.emplace_back(split_chars(utf8_to_u32(word)), freq);
  }
  for (char32_t c : corpus.char_inventory) model.vocab.insert(u32_to_utf8(c));

  for (size_t step = 0; step < num_merges; ++step) {
    std::map<std::pair<std::string, std::string>, int64_t> pair_counts;
    for (const auto& [symbols, freq] : words) {
      for (size_t i = 0; i + 1 < symbols.size(); ++i) {
        pair_counts[{symbols[i], symbols[i + 1]}] += freq;
      }
    }
    // The map is ordered, so the first maximum is the lexicographic tie winner.
    const std::pair<std::string, std::string>* best = nullptr;
    int64_t best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr || best_count < 2) break;
    const auto [left, right] = *best;
    for (auto& [symbols, freq] : words) apply_merge(symbols, left, right);
    model.vocab.insert(left + right);
    model.merges.emplace_back(left, right);
  }
  return model;
}

std::vector<std::string> bpe_segment_word(std::u32string_view word, const BpeModel& model) {
  auto symbols = split_chars(word);
  for (const auto& [left, right] : model.merges) {
    if (symbols.size() < 2) break;
    apply_merge(symbols, left, right);
  }
  return symbols;
}

std::vector<std::string> bpe_tokenize(std::string_view text, const BpeModel& model) {
  std::vector<std::string> out;
  for (auto word : split_words_view(text)) {
    auto marked = mark_continuations(bpe_segment_word(utf8_to_u32(word), model));
    out.insert(out.end(), marked.begin(), marked.end());
  }
  return out;
}

std::string bpe_to_string(const BpeModel& model) {
  std::string out(kBpeHeader);
  out.push_back('\n');
  for (const auto& [left, right] : model.merges) out += left + " " + right + "\n";
  return out;
}

void save_bpe(const BpeModel& model, const std::filesystem::path& path) {
  write_file(path, bpe_to_string(model));
}

BpeModel bpe_from_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kBpeHeader) {
    throw Error(ErrorKind::kParse, "BPE model must start with '#bpe'");
  }
  BpeModel model;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size() ||
        line.find(' ', space + 1) != std::string::npos) {
      throw Error(ErrorKind::kParse, "BPE line " + std::to_string(line_no) + ": expected 'left right'");
    }
    std::string left = line.substr(0, space);
    std::string right = line.substr(space + 1);
    for (const auto& side : {left, right}) {
      for (char32_t c : utf8_to_u32(side)) model.vocab.insert(u32_to_utf8(c));
    }
    model.vocab.insert(left + right);
    model.merges.emplace_back(std::move(left), std::move(right));
  }
  return model;
}

BpeModel load_bpe(const std::filesystem::path& path) {
  return bpe_from_string(read_file(path, "BPE model"));
}

}  // namespace subicap

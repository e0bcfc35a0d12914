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

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "subicap/corpus.hpp"
#include "subicap/error.hpp"
#include "subicap/text.hpp"

using namespace subicap;

namespace {

const std::filesystem::path kDesk = std::filesystem::path(SUBICAP_DATA_DIR) / "desk_corpus.tsv";

Corpus parse(const std::string& text, size_t max_words = kDefaultMaxWords) {
  std::istringstream in(text);
  return read_corpus(in, max_words);
}

}  // namespace

TEST_CASE("lines are normalized") {
  const Corpus c = parse("img1\tA Cat  sat\n");
  REQUIRE(c.captions.size() == 1);
  CHECK(c.captions[0] == Caption{"img1", "a cat sat"});
}

TEST_CASE("long captions keep their first words") {
  std::string line = "img\t";
  for (int i = 1; i <= 17; ++i) line += "w" + std::to_string(i) + " ";
  const Corpus c = parse(line);
  const auto words = split_words(c.captions[0].text);
  CHECK(words.size() == 16);
  CHECK(words.front() == "w1");
  CHECK(words.back() == "w16");
  CHECK(split_words(parse(line, 3).captions[0].text).size() == 3);
}

TEST_CASE("empty input gives an empty corpus") {
  const Corpus c = parse("");
  CHECK(c.empty());
  CHECK(c.char_inventory.empty());
  CHECK(c.word_counts.empty());
  const CorpusStats s = corpus_stats(c);
  CHECK(s.num_captions == 0);
  CHECK(s.total_words == 0);
  CHECK(s.avg_caption_length_words == 0.0);
}

TEST_CASE("comments and blank lines are skipped") {
  const Corpus c = parse("# header\n\nimg\ta\r\n");
  CHECK(c.captions.size() == 1);
  CHECK(c.captions[0].text == "a");
}

TEST_CASE("missing tab reports the line number") {
  try {
    parse("a\tok\nno tab here\n");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("unreadable file is an io error") {
  try {
    load_corpus("/nonexistent/corpus.tsv");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
}

TEST_CASE("stats on a tiny corpus") {
  const Corpus c = parse("i\ta b\ni\ta\n");
  const CorpusStats s = corpus_stats(c);
  CHECK(s.num_captions == 2);
  CHECK(s.num_images == 1);
  CHECK(s.total_words == 3);
  CHECK(s.distinct_words == 2);
  CHECK(s.avg_caption_length_words == doctest::Approx(1.5));
}

TEST_CASE("desk corpus stats match a raw line counter") {
  const Corpus c = load_corpus(kDesk);
  // Independent count straight from the file. The desk corpus is already
  // lowercase ASCII with single spaces, so no normalization is needed.
  std::ifstream in(kDesk);
  std::string line;
  std::map<std::string, long> counts;
  std::set<std::string> images;
  std::set<char> chars;
  long captions = 0, words = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    images.insert(line.substr(0, tab));
    std::istringstream ws(line.substr(tab + 1));
    std::string w;
    long n = 0;
    while (ws >> w && n < 16) {
      ++counts[w];
      for (char ch : w) chars.insert(ch);
      ++n;
    }
    words += n;
    ++captions;
  }
  const CorpusStats s = corpus_stats(c);
  CHECK(captions >= 1000);
  CHECK(s.num_captions == captions);
  CHECK(s.num_images == static_cast<int64_t>(images.size()));
  CHECK(s.total_words == words);
  CHECK(s.distinct_words == static_cast<int64_t>(counts.size()));
  CHECK(s.avg_caption_length_words == doctest::Approx(static_cast<double>(words) / captions));
  for (const auto& [w, n] : counts) CHECK(c.word_counts.at(w) == n);
  CHECK(c.char_inventory.size() == chars.size());
  for (char ch : chars) CHECK(c.char_inventory.count(static_cast<char32_t>(ch)) == 1);
}

TEST_CASE("corpus invariants and deterministic loading") {
  const Corpus a = load_corpus(kDesk);
  const Corpus b = load_corpus(kDesk);
  CHECK(a == b);
  int64_t total = 0;
  for (const auto& [w, n] : a.word_counts) total += n;
  int64_t words = 0;
  for (const auto& cap : a.captions) {
    words += static_cast<int64_t>(split_words(cap.text).size());
    CHECK(cap.text == normalize_text(cap.text));
    for (char32_t ch : utf8_to_u32(cap.text)) {
      if (ch != U' ') CHECK(a.char_inventory.count(ch) == 1);
    }
  }
  CHECK(total == words);
}

TEST_CASE("write then load round trips") {
  const Corpus a = corpus_from_texts({"A b", "c  D e"});
  const auto path = std::filesystem::temp_directory_path() / "subicap_corpus_rt.tsv";
  write_corpus(a, path);
  CHECK(load_corpus(path) == a);
  std::filesystem::remove(path);
}

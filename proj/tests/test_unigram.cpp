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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "subicap/corpus.hpp"
#include "subicap/error.hpp"
#include "subicap/text.hpp"
#include "subicap/unigram.hpp"

using namespace subicap;

namespace {

const std::filesystem::path kDesk = std::filesystem::path(SUBICAP_DATA_DIR) / "desk_corpus.tsv";

SubwordVocab vocab_of(const oracle::Scores& scores) {
  std::vector<std::pair<std::string, double>> pieces(scores.begin(), scores.end());
  return SubwordVocab::from_pieces(pieces);
}

// Random vocabulary over `alphabet`: every single character in both forms
// plus random multi-character pieces, scores normalized.
oracle::Scores random_scores(std::mt19937& rng, const std::string& alphabet, int extra,
                             size_t max_len) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::map<std::string, double> p;
  for (char c : alphabet) {
    p[std::string(1, c)] = u(rng);
    p["_" + std::string(1, c)] = u(rng);
  }
  for (int i = 0; i < extra; ++i) {
    const size_t len = 2 + rng() % (max_len - 1);
    std::string s;
    for (size_t j = 0; j < len; ++j) s += alphabet[rng() % alphabet.size()];
    p[rng() % 2 ? "_" + s : s] = u(rng);
  }
  double z = 0.0;
  for (auto& [k, v] : p) z += v;
  oracle::Scores out;
  for (auto& [k, v] : p) out[k] = std::log(v / z);
  return out;
}

std::string random_word(std::mt19937& rng, const std::string& alphabet, size_t len) {
  std::string s;
  for (size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

void check_vocab_invariants(const SubwordVocab& v) {
  double mass = 0.0;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(v.size()); ++id) {
    CHECK(std::isfinite(v.score(id)));
    CHECK(v.score(id) <= 0.0);
    mass += std::exp(v.score(id));
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  std::set<std::string> seen;
  for (PieceId id = 0; id < static_cast<PieceId>(v.size()); ++id) {
    CHECK(seen.insert(v.piece(id)).second);
    CHECK(v.id_of(v.piece(id)) == id);
  }
}

}  // namespace

TEST_CASE("continuation markers") {
  CHECK(mark_continuations(std::vector<std::string>{"head", "ed"}) ==
        std::vector<std::string>{"head", "_ed"});
  CHECK(mark_continuations(std::vector<std::string>{"a"}) == std::vector<std::string>{"a"});
  CHECK(mark_continuations(std::vector<std::string>{}).empty());
  CHECK(mark_continuations(std::vector<std::vector<std::string>>{{"climb", "ing"}, {"a"}}) ==
        std::vector<std::string>{"climb", "_ing", "a"});
  CHECK(is_continuation("_ed"));
  CHECK_FALSE(is_continuation("ed"));
  CHECK(piece_surface("_ed") == "ed");
  CHECK(piece_length("_\xC3\xA9t") == 2);
}

TEST_CASE("vocab layout reserves control ids") {
  const SubwordVocab v = SubwordVocab::from_probabilities({{"a", 0.5}, {"_a", 0.5}});
  CHECK(v.size() == 5);
  CHECK(v.num_pieces() == 2);
  CHECK(v.piece(kPadId) == "<pad>");
  CHECK(v.piece(kBosId) == "<bos>");
  CHECK(v.piece(kEosId) == "<eos>");
  CHECK(v.is_control(kBosId));
  CHECK(v.covers(U'a'));
  CHECK_FALSE(v.covers(U'b'));
  CHECK_THROWS_AS(SubwordVocab::from_pieces({{"a", 0.0}, {"a", 0.0}}), Error);
  CHECK_THROWS_AS(SubwordVocab::from_pieces({{"_", 0.0}}), Error);
  CHECK_THROWS_AS(v.id_of("zz"), Error);
}

TEST_CASE("seed vocabulary matches exhaustive substring counts") {
  const Corpus c = corpus_from_texts({"ab", "ab", "b"});
  TrainerConfig cfg;
  cfg.seed_size = 10;
  const SubwordVocab v = build_seed_vocab(c, cfg);
  for (const char* p : {"a", "_a", "b", "_b", "ab"}) CHECK(v.find(p).has_value());
  const auto counts = oracle::substring_counts({{"ab", 2}, {"b", 1}}, 16);
  CHECK(counts.at("ab") == 2);
  // Scores are proportional to counts for pieces that occur.
  const double ratio = std::exp(v.score(v.id_of("ab")) - v.score(v.id_of("_b")));
  CHECK(ratio == doctest::Approx(static_cast<double>(counts.at("ab")) / counts.at("_b")));
  check_vocab_invariants(v);
}

TEST_CASE("seed vocabulary on the desk corpus") {
  const Corpus c = load_corpus(kDesk);
  TrainerConfig cfg;
  cfg.max_piece_length = 6;
  cfg.seed_size = 1000000;
  const SubwordVocab v = build_seed_vocab(c, cfg);
  std::map<std::string, long> words;
  for (const auto& [w, n] : c.word_counts) words[w] = n;
  const auto counts = oracle::substring_counts(words, 6);
  size_t expected = 2 * c.char_inventory.size();
  for (const auto& [piece, n] : counts) {
    if (oracle::piece_surface_length(piece) > 1 && n >= 2) {
      ++expected;
      CHECK(v.find(piece).has_value());
    }
  }
  CHECK(v.num_pieces() == expected);
  check_vocab_invariants(v);

  cfg.seed_size = 50;
  CHECK(build_seed_vocab(c, cfg).num_pieces() == 50 + 2 * c.char_inventory.size());
}

TEST_CASE("one-character corpus yields both forms of the character") {
  const Corpus c = corpus_from_texts({"x"});
  const SubwordVocab v = build_seed_vocab(c, {});
  CHECK(v.num_pieces() == 2);
  CHECK(v.find("x"));
  CHECK(v.find("_x"));
  CHECK_THROWS_AS(build_seed_vocab(Corpus{}, {}), Error);
}

TEST_CASE("lattice nodes") {
  const SubwordVocab v = vocab_of({{"a", -1.0}, {"_b", -1.0}, {"ab", -1.0}, {"b", -1.0}, {"_a", -1.0}});
  const Lattice l = build_lattice(U"ab", v);
  CHECK(l.num_nodes() == 3);
  const SubwordVocab small = vocab_of({{"a", -1.0}, {"_b", -1.0}});
  CHECK(build_lattice(U"ab", small).num_nodes() == 2);
}

TEST_CASE("lattice equals a brute-force substring scan") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto scores = random_scores(rng, "abc", 12, 5);
    const SubwordVocab v = vocab_of(scores);
    const std::string word = random_word(rng, "abc", 8);
    const Lattice l = build_lattice(utf8_to_u32(word), v);
    std::set<std::tuple<int, int, std::string>> got, want;
    for (const auto& nodes : l.begin_nodes) {
      for (const auto& n : nodes) {
        got.emplace(n.begin, n.end, v.piece(n.id));
        CHECK(n.score == v.score(n.id));
      }
    }
    for (size_t b = 0; b < word.size(); ++b) {
      for (size_t e = b + 1; e <= word.size(); ++e) {
        const std::string p = oracle::mark(word.substr(b, e - b), b > 0);
        if (scores.count(p)) want.emplace(static_cast<int>(b), static_cast<int>(e), p);
      }
    }
    CHECK(got == want);
  }
}

TEST_CASE("out-of-inventory characters are located") {
  const SubwordVocab v = vocab_of({{"a", -1.0}, {"_a", -1.0}});
  try {
    viterbi_segment("aa aza", v);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kOutOfInventory);
    const std::string msg = e.what();
    CHECK(msg.find("'z'") != std::string::npos);
    CHECK(msg.find("U+007A") != std::string::npos);
    CHECK(msg.find("offset 1") != std::string::npos);
  }
}

TEST_CASE("viterbi picks the better of two segmentations") {
  const SubwordVocab v = SubwordVocab::from_probabilities({{"a", 0.4}, {"_a", 0.4}, {"aa", 0.2}});
  const TokenSequence t = viterbi_segment("aa", v);
  CHECK(t.pieces == std::vector<std::string>{"aa"});
  CHECK(t.total_score == doctest::Approx(std::log(0.2)));
  CHECK(viterbi_segment("", v).ids.empty());
  CHECK(viterbi_segment("", v).total_score == 0.0);
}

TEST_CASE("equal scores prefer fewer pieces") {
  oracle::Scores s;
  for (const char* p : {"a", "cat", "is", "climb", "_ing", "tree"}) s[p] = -3.0;
  for (char c : std::string("acisltrebmng")) {
    s[std::string(1, c)] = -3.0;
    s["_" + std::string(1, c)] = -3.0;
  }
  const SubwordVocab v = vocab_of(s);
  const auto t = viterbi_segment("a cat is climbing a tree", v);
  CHECK(t.pieces == std::vector<std::string>{"a", "cat", "is", "climb", "_ing", "a", "tree"});
  CHECK(detokenize(t) == "a cat is climbing a tree");
  // Brute force on the one split word.
  double best = -1e300;
  size_t fewest = 100;
  for (const auto& p : oracle::all_segmentations("climbing", s)) {
    const double sc = oracle::path_score(p, s);
    if (sc > best || (sc == best && p.size() < fewest)) {
      best = sc;
      fewest = p.size();
    }
  }
  CHECK(fewest == 2);
}

TEST_CASE("tie between equal-length paths goes to the smaller first piece") {
  // "abc": [ab][_c] and [a][_bc] score the same with the same length.
  const SubwordVocab v = vocab_of({{"a", -2.0}, {"_b", -2.0}, {"_c", -1.0}, {"ab", -1.0},
                                   {"_bc", 0.0}});
  const auto t = viterbi_segment("abc", v);
  CHECK(t.pieces == std::vector<std::string>{"a", "_bc"});
}

TEST_CASE("viterbi matches exhaustive enumeration") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto scores = random_scores(rng, "abc", 15, 6);
    const SubwordVocab v = vocab_of(scores);
    const std::string word = random_word(rng, "abc", 1 + rng() % 8);
    const auto t = viterbi_segment(word, v);
    CHECK(t.total_score == doctest::Approx(oracle::best_score(word, scores)).epsilon(1e-12));
    CHECK(t.total_score == doctest::Approx(oracle::path_score(t.pieces, scores)).epsilon(1e-12));
    CHECK(detokenize(t) == word);
  }
}

TEST_CASE("sequence log-probability") {
  const SubwordVocab v = SubwordVocab::from_probabilities({{"a", 0.4}, {"_a", 0.4}, {"aa", 0.2}});
  CHECK(sequence_logprob({}, v) == 0.0);
  TokenSequence one;
  one.pieces = {"aa"};
  CHECK(sequence_logprob(one, v) == doctest::Approx(std::log(0.2)));
  std::mt19937 rng(3);
  const std::vector<std::string> names = {"a", "_a", "aa"};
  const std::vector<double> probs = {0.4, 0.4, 0.2};
  for (int trial = 0; trial < 100; ++trial) {
    TokenSequence t;
    double product = 1.0;
    for (int i = 0; i < 10; ++i) {
      const size_t k = rng() % 3;
      t.pieces.push_back(names[k]);
      product *= probs[k];
    }
    CHECK(sequence_logprob(t, v) == doctest::Approx(std::log(product)).epsilon(1e-9));
  }
  TokenSequence bad;
  bad.pieces = {"zz"};
  CHECK_THROWS_AS(sequence_logprob(bad, v), Error);
}

TEST_CASE("one EM step by hand") {
  const Corpus c = corpus_from_texts({"ab"});
  const SubwordVocab v =
      SubwordVocab::from_probabilities({{"a", 1.0 / 3}, {"_b", 1.0 / 3}, {"ab", 1.0 / 3}});
  const EmResult r = em_step(c, v);
  CHECK(r.log_likelihood == doctest::Approx(std::log(4.0 / 9.0)).epsilon(1e-12));
  CHECK(std::exp(r.vocab.score(r.vocab.id_of("ab"))) == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(std::exp(r.vocab.score(r.vocab.id_of("a"))) == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(std::exp(r.vocab.score(r.vocab.id_of("_b"))) == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("EM fixed point on a single-path corpus") {
  const Corpus c = corpus_from_texts({"a", "a"});
  const SubwordVocab v = SubwordVocab::from_probabilities(
      {{"a", 1.0 - kUnusedPieceProbability}, {"_a", kUnusedPieceProbability}});
  const EmResult r = em_step(c, v);
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(v.size()); ++id) {
    CHECK(r.vocab.score(id) == doctest::Approx(v.score(id)).epsilon(1e-9));
  }
}

TEST_CASE("EM likelihood agrees with enumeration and never decreases") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> texts;
    for (int i = 0; i < 6; ++i) {
      std::string t;
      for (int w = 0; w < 3; ++w) t += random_word(rng, "abc", 1 + rng() % 8) + " ";
      texts.push_back(t);
    }
    const Corpus c = corpus_from_texts(texts);
    auto scores = random_scores(rng, "abc", 20, 4);
    SubwordVocab v = vocab_of(scores);
    double previous = -1e300;
    for (int it = 0; it < 6; ++it) {
      double brute = 0.0;
      oracle::Scores current;
      for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(v.size()); ++id) {
        current[v.piece(id)] = v.score(id);
      }
      for (const auto& [w, n] : c.word_counts) brute += static_cast<double>(n) * oracle::marginal(w, current);
      const EmResult r = em_step(c, v);
      CHECK(r.log_likelihood == doctest::Approx(brute).epsilon(1e-9));
      CHECK(r.log_likelihood >= previous - 1e-6);
      previous = r.log_likelihood;
      check_vocab_invariants(r.vocab);
      v = r.vocab;
    }
  }
}

TEST_CASE("pruning keeps the highest leave-one-out losses") {
  const Corpus c = corpus_from_texts({"abab abc", "bca ab", "cab abca"});
  TrainerConfig cfg;
  SubwordVocab v = build_seed_vocab(c, cfg);
  v = em_step(c, v).vocab;
  oracle::Scores scores;
  std::vector<std::string> multi;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(v.size()); ++id) {
    scores[v.piece(id)] = v.score(id);
    if (!v.is_required(id)) multi.push_back(v.piece(id));
  }
  auto corpus_best = [&](const oracle::Scores& s) {
    double total = 0.0;
    for (const auto& [w, n] : c.word_counts) total += static_cast<double>(n) * oracle::best_score(w, s);
    return total;
  };
  const double base = corpus_best(scores);
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& p : multi) {
    auto without = scores;
    without.erase(p);
    ranked.emplace_back(base - corpus_best(without), p);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.first - b.first) > 1e-9) return a.first > b.first;
    return a.second < b.second;
  });
  const size_t keep = multi.size() / 2;
  std::set<std::string> want;
  for (size_t i = 0; i < keep; ++i) want.insert(ranked[i].second);

  const SubwordVocab pruned = prune_vocab(c, v, 0.5);
  std::set<std::string> got;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(pruned.size()); ++id) {
    if (!pruned.is_required(id)) got.insert(pruned.piece(id));
  }
  CHECK(got == want);
  CHECK(pruned.required_pieces() == v.required_pieces());
  check_vocab_invariants(pruned);
  CHECK_THROWS_AS(prune_vocab(c, v, 1.0), Error);
  CHECK_THROWS_AS(prune_vocab(c, v, 0.0), Error);
}

TEST_CASE("unused pieces are pruned first") {
  const Corpus c = corpus_from_texts({"ab ab"});
  const SubwordVocab v = SubwordVocab::from_probabilities(
      {{"a", 0.1}, {"_a", 0.1}, {"b", 0.1}, {"_b", 0.1}, {"ab", 0.5}, {"_ba", 0.1}});
  const SubwordVocab pruned = prune_to_count(c, v, 1);
  CHECK(pruned.find("ab"));
  CHECK_FALSE(pruned.find("_ba"));
}

TEST_CASE("train_unigram at the minimum size") {
  const Corpus c = corpus_from_texts({"abab ab", "ba ab"});
  TrainerConfig cfg;
  cfg.target_vocab_size = required_piece_count(c) + 1;
  const SubwordVocab v = train_unigram(c, cfg);
  CHECK(v.num_pieces() == cfg.target_vocab_size);
  CHECK(v.required_pieces().size() == required_piece_count(c));
  check_vocab_invariants(v);
  cfg.target_vocab_size = required_piece_count(c);
  try {
    train_unigram(c, cfg);
    FAIL("expected invalid argument");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidArgument);
  }
  cfg.target_vocab_size = 1;
  CHECK_THROWS_AS(train_unigram(c, cfg), Error);
  CHECK_THROWS_AS(train_unigram(Corpus{}, cfg), Error);
}

TEST_CASE("train_unigram on the desk corpus") {
  const Corpus c = load_corpus(kDesk);
  TrainerConfig cfg;
  cfg.target_vocab_size = 300;
  const SubwordVocab small = train_unigram(c, cfg);
  cfg.target_vocab_size = 1000;
  const SubwordVocab large = train_unigram(c, cfg);
  CHECK(small.num_pieces() == 300);
  CHECK(large.num_pieces() <= 1000);
  check_vocab_invariants(small);
  check_vocab_invariants(large);
  for (char32_t ch : c.char_inventory) {
    CHECK(small.covers(ch));
    CHECK(large.covers(ch));
  }
  double n_small = 0, n_large = 0;
  for (const auto& cap : c.captions) {
    const auto a = encode(cap.text, small);
    const auto b = encode(cap.text, large);
    CHECK(detokenize(a) == cap.text);
    CHECK(detokenize(b) == cap.text);
    CHECK(sequence_logprob(a, small) == doctest::Approx(a.total_score));
    n_small += static_cast<double>(a.size());
    n_large += static_cast<double>(b.size());
  }
  CHECK(n_small >= n_large);
  // Ids are ordered by score.
  for (PieceId id = kNumControlPieces + 1; id < static_cast<PieceId>(large.size()); ++id) {
    CHECK(large.score(id - 1) >= large.score(id));
  }
  // Same input, same output.
  CHECK(vocab_to_string(train_unigram(c, cfg)) == vocab_to_string(large));
}

TEST_CASE("detokenize") {
  CHECK(detokenize(std::vector<std::string>{"head", "_ed"}) == "headed");
  CHECK(detokenize(std::vector<std::string>{"a", "cat", "is", "climb", "_ing", "a", "tree"}) ==
        "a cat is climbing a tree");
  CHECK(detokenize(std::vector<std::string>{}) == "");
  try {
    detokenize(std::vector<std::string>{"_ed", "head"});
    FAIL("expected orphan continuation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kOrphanContinuation);
  }
}

TEST_CASE("decode_ids skips control pieces") {
  const SubwordVocab v = SubwordVocab::from_probabilities({{"head", 0.5}, {"_ed", 0.5}});
  CHECK(decode_ids({kBosId, v.id_of("head"), v.id_of("_ed"), kEosId}, v) == "headed");
  CHECK_THROWS_AS(decode_ids({99}, v), Error);
}

TEST_CASE("vocab file format and round trip") {
  const SubwordVocab v = SubwordVocab::from_probabilities({{"a", 0.25}, {"_a", 0.25}, {"aa", 0.5}});
  const std::string text = vocab_to_string(v);
  CHECK(text.rfind("<pad>\t0.000000\n<bos>\t0.000000\n<eos>\t0.000000\na\t-1.386294\n", 0) == 0);
  const SubwordVocab back = vocab_from_string(text);
  CHECK(vocab_to_string(back) == text);
  CHECK(back.num_pieces() == 3);
  const auto path = std::filesystem::temp_directory_path() / "subicap_vocab.tsv";
  save_vocab(v, path);
  CHECK(vocab_to_string(load_vocab(path)) == text);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(vocab_from_string("a\t0\n"), Error);
  CHECK_THROWS_AS(vocab_from_string("<pad>\t0\n<bos>\t0\n"), Error);
  CHECK_THROWS_AS(vocab_from_string("<pad>\t0\n<bos>\t0\n<eos>\t0\nx\tnan?\n"), Error);
  CHECK_THROWS_AS(load_vocab("/nonexistent/v.tsv"), Error);
}

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

#include "subicap/unigram.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "subicap/error.hpp"
#include "subicap/text.hpp"

namespace subicap {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

std::u32string piece_key(std::u32string_view chars, bool continuation) {
  std::u32string key;
  key.reserve(chars.size() + 1);
  if (continuation) key.push_back(kContinuationMarker);
  key.append(chars);
  return key;
}

// Turns non-control counts into log-probabilities. Zero-count pieces get
// kUnusedPieceProbability; the rest share the remaining mass in proportion.
std::vector<double> counts_to_scores(const SubwordVocab& vocab,
                                     const std::vector<double>& counts) {
  double total = 0.0;
  size_t zeros = 0;
  for (size_t i = kNumControlPieces; i < vocab.size(); ++i) {
    if (counts[i] > 0.0) {
      total += counts[i];
    } else {
      ++zeros;
    }
  }
  std::vector<double> scores(vocab.size(), 0.0);
  if (total <= 0.0) {
    const double uniform = -std::log(static_cast<double>(vocab.num_pieces()));
    for (size_t i = kNumControlPieces; i < vocab.size(); ++i) scores[i] = uniform;
    return scores;
  }
  const double log_mass =
      std::log1p(-static_cast<double>(zeros) * kUnusedPieceProbability) - std::log(total);
  for (size_t i = kNumControlPieces; i < vocab.size(); ++i) {
    scores[i] = counts[i] > 0.0 ? std::log(counts[i]) + log_mass
                                : std::log(kUnusedPieceProbability);
  }
  return scores;
}

struct WordItem {
  std::u32string chars;
  int64_t freq = 0;
};

std::vector<WordItem> corpus_words(const Corpus& corpus) {
  std::vector<WordItem> words;
  words.reserve(corpus.word_counts.size());
  for (const auto& [word, freq] : corpus.word_counts) {
    words.push_back({utf8_to_u32(word), freq});
  }
  return words;
}

// Pieces of the path ending with `last`, reconstructed through back pointers.
std::vector<std::string_view> backtrack(const std::vector<const LatticeNode*>& back,
                                        const LatticeNode* last,
                                        const SubwordVocab& vocab) {
  std::vector<std::string_view> out;
  for (const LatticeNode* node = last; node != nullptr; node = back[node->begin]) {
    out.push_back(vocab.piece(node->id));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SubwordVocab

SubwordVocab::SubwordVocab() {
  for (auto piece : {kPadPiece, kBosPiece, kEosPiece}) {
    add({std::string(piece), 0.0, true});
  }
}

void SubwordVocab::add(VocabEntry entry) {
  if (entry.piece.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "empty piece");
  }
  const auto key = utf8_to_u32(entry.piece);
  if (!entry.control) {
    if (key.size() == 1 && key[0] == kContinuationMarker) {
      throw Error(ErrorKind::kInvalidArgument, "bare continuation marker piece");
    }
    if (!std::isfinite(entry.score)) {
      throw Error(ErrorKind::kNumerical, "non-finite score for piece '" + entry.piece + "'");
    }
  }
  const auto id = static_cast<PieceId>(entries_.size());
  if (!index_.emplace(key, id).second) {
    throw Error(ErrorKind::kInvalidArgument, "duplicate piece '" + entry.piece + "'");
  }
  if (!entry.control) max_piece_chars_ = std::max(max_piece_chars_, piece_length(entry.piece));
  entries_.push_back(std::move(entry));
}

SubwordVocab SubwordVocab::from_pieces(
    const std::vector<std::pair<std::string, double>>& pieces) {
  SubwordVocab vocab;
  for (const auto& [piece, score] : pieces) vocab.add({piece, score, false});
  return vocab;
}

SubwordVocab SubwordVocab::from_probabilities(
    const std::vector<std::pair<std::string, double>>& pieces) {
  std::vector<std::pair<std::string, double>> logs;
  logs.reserve(pieces.size());
  for (const auto& [piece, p] : pieces) logs.emplace_back(piece, std::log(p));
  return from_pieces(logs);
}

std::optional<PieceId> SubwordVocab::find(std::string_view piece) const {
  auto it = index_.find(utf8_to_u32(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PieceId SubwordVocab::id_of(std::string_view piece) const {
  auto id = find(piece);
  if (!id) throw Error(ErrorKind::kUnknownPiece, "unknown piece '" + std::string(piece) + "'");
  return *id;
}

std::optional<PieceId> SubwordVocab::find_span(std::u32string_view chars,
                                               bool continuation) const {
  auto it = index_.find(piece_key(chars, continuation));
  if (it == index_.end() || entries_[static_cast<size_t>(it->second)].control) {
    return std::nullopt;
  }
  return it->second;
}

bool SubwordVocab::is_required(PieceId id) const {
  const auto& e = entry(id);
  return !e.control && piece_length(e.piece) == 1;
}

std::set<std::string> SubwordVocab::required_pieces() const {
  std::set<std::string> out;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(size()); ++id) {
    if (is_required(id)) out.insert(piece(id));
  }
  return out;
}

bool SubwordVocab::covers(char32_t c) const {
  const std::u32string_view one(&c, 1);
  return find_span(one, false).has_value() && find_span(one, true).has_value();
}

double SubwordVocab::probability_mass() const {
  double mass = 0.0;
  for (const auto& e : entries_) {
    if (!e.control) mass += std::exp(e.score);
  }
  return mass;
}

void SubwordVocab::set_score(PieceId id, double score) {
  auto& e = entries_.at(static_cast<size_t>(id));
  if (e.control) throw Error(ErrorKind::kInvalidArgument, "cannot score a control piece");
  if (!std::isfinite(score)) throw Error(ErrorKind::kNumerical, "non-finite score");
  e.score = score;
}

// ---------------------------------------------------------------------------
// Markers

bool is_continuation(std::string_view piece) {
  return piece.size() > 1 && piece.front() == static_cast<char>(kContinuationMarker);
}

std::string_view piece_surface(std::string_view piece) {
  return is_continuation(piece) ? piece.substr(1) : piece;
}

size_t piece_length(std::string_view piece) {
  return utf8_to_u32(piece_surface(piece)).size();
}

std::vector<std::string> mark_continuations(const std::vector<std::string>& segments) {
  std::vector<std::string> out;
  out.reserve(segments.size());
  for (size_t i = 0; i < segments.size(); ++i) {
    out.push_back(i == 0 ? segments[i] : "_" + segments[i]);
  }
  return out;
}

std::vector<std::string> mark_continuations(
    const std::vector<std::vector<std::string>>& words) {
  std::vector<std::string> out;
  for (const auto& w : words) {
    auto marked = mark_continuations(w);
    out.insert(out.end(), marked.begin(), marked.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lattice and Viterbi

size_t Lattice::num_nodes() const {
  size_t n = 0;
  for (const auto& nodes : begin_nodes) n += nodes.size();
  return n;
}

Lattice build_lattice(std::u32string_view word, const SubwordVocab& vocab) {
  Lattice lattice;
  lattice.word = std::u32string(word);
  const int n = static_cast<int>(word.size());
  lattice.begin_nodes.resize(static_cast<size_t>(n) + 1);
  lattice.end_nodes.resize(static_cast<size_t>(n) + 1);
  const int max_len = static_cast<int>(vocab.max_piece_chars());
  for (int begin = 0; begin < n; ++begin) {
    const bool continuation = begin > 0;
    if (!vocab.find_span(word.substr(static_cast<size_t>(begin), 1), continuation)) {
      throw Error(ErrorKind::kOutOfInventory,
                  "character '" + u32_to_utf8(word[static_cast<size_t>(begin)]) +
                      "' (U+" + fmt::format("{:04X}", static_cast<uint32_t>(word[static_cast<size_t>(begin)])) +
                      ") at offset " + std::to_string(begin) + " has no " +
                      (continuation ? "continuation" : "word-initial") + " piece");
    }
    for (int len = 1; len <= max_len && begin + len <= n; ++len) {
      auto id = vocab.find_span(
          word.substr(static_cast<size_t>(begin), static_cast<size_t>(len)), continuation);
      if (!id) continue;
      LatticeNode node{begin, begin + len, *id, vocab.score(*id)};
      lattice.begin_nodes[static_cast<size_t>(begin)].push_back(node);
      lattice.end_nodes[static_cast<size_t>(begin + len)].push_back(node);
    }
  }
  return lattice;
}

std::optional<TokenSequence> viterbi_word(const Lattice& lattice, const SubwordVocab& vocab,
                                          std::optional<PieceId> excluded) {
  const size_t n = lattice.length();
  std::vector<double> best(n + 1, kNegInf);
  std::vector<int> count(n + 1, 0);
  std::vector<const LatticeNode*> back(n + 1, nullptr);
  best[0] = 0.0;
  for (size_t end = 1; end <= n; ++end) {
    for (const LatticeNode& node : lattice.end_nodes[end]) {
      if (excluded && node.id == *excluded) continue;
      const auto begin = static_cast<size_t>(node.begin);
      if (best[begin] == kNegInf) continue;
      const double score = best[begin] + node.score;
      const int pieces = count[begin] + 1;
      bool better = back[end] == nullptr || score > best[end] ||
                    (score == best[end] && pieces < count[end]);
      if (!better && score == best[end] && pieces == count[end]) {
        better = backtrack(back, &node, vocab) < backtrack(back, back[end], vocab);
      }
      if (better) {
        best[end] = score;
        count[end] = pieces;
        back[end] = &node;
      }
    }
  }
  if (n > 0 && back[n] == nullptr) return std::nullopt;

  TokenSequence out;
  out.total_score = best[n];
  for (const LatticeNode* node = back[n]; node != nullptr;
       node = back[static_cast<size_t>(node->begin)]) {
    out.ids.push_back(node->id);
  }
  std::reverse(out.ids.begin(), out.ids.end());
  for (PieceId id : out.ids) out.pieces.push_back(vocab.piece(id));
  return out;
}

TokenSequence viterbi_segment(std::string_view text, const SubwordVocab& vocab) {
  TokenSequence out;
  size_t offset = 0;
  for (auto word : split_words_view(text)) {
    const auto chars = utf8_to_u32(word);
    Lattice lattice;
    try {
      lattice = build_lattice(chars, vocab);
    } catch (const Error& e) {
      throw Error(e.kind(), "in word '" + std::string(word) + "' (word offset " +
                                std::to_string(offset) + "): " + e.what());
    }
    auto seg = viterbi_word(lattice, vocab);
    if (!seg) {
      throw Error(ErrorKind::kOutOfInventory, "no segmentation for word '" + std::string(word) + "'");
    }
    out.pieces.insert(out.pieces.end(), seg->pieces.begin(), seg->pieces.end());
    out.ids.insert(out.ids.end(), seg->ids.begin(), seg->ids.end());
    out.total_score += seg->total_score;
    ++offset;
  }
  return out;
}

double sequence_logprob(const TokenSequence& tokens, const SubwordVocab& vocab) {
  double total = 0.0;
  for (const auto& piece : tokens.pieces) {
    const PieceId id = vocab.id_of(piece);
    if (vocab.is_control(id)) {
      throw Error(ErrorKind::kUnknownPiece, "control piece '" + piece + "' has no probability");
    }
    total += vocab.score(id);
  }
  return total;
}

std::string detokenize(const std::vector<std::string>& pieces) {
  std::string out;
  bool in_word = false;
  for (size_t i = 0; i < pieces.size(); ++i) {
    const auto& piece = pieces[i];
    if (is_continuation(piece)) {
      if (!in_word) {
        throw Error(ErrorKind::kOrphanContinuation,
                    "continuation piece '" + piece + "' at position " + std::to_string(i) +
                        " has no word to extend");
      }
      out += piece_surface(piece);
    } else {
      if (in_word) out.push_back(' ');
      out += piece;
      in_word = true;
    }
  }
  return out;
}

std::string decode_ids(const std::vector<PieceId>& ids, const SubwordVocab& vocab) {
  std::vector<std::string> pieces;
  for (PieceId id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= vocab.size()) {
      throw Error(ErrorKind::kUnknownPiece, "piece id " + std::to_string(id) + " out of range");
    }
    if (!vocab.is_control(id)) pieces.push_back(vocab.piece(id));
  }
  return detokenize(pieces);
}

namespace {

// Forward (alpha) and backward (beta) log-marginals over lattice positions.
void forward_backward(const Lattice& lattice, std::vector<double>& alpha,
                      std::vector<double>& beta) {
  const size_t n = lattice.length();
  alpha.assign(n + 1, kNegInf);
  beta.assign(n + 1, kNegInf);
  alpha[0] = 0.0;
  for (size_t end = 1; end <= n; ++end) {
    for (const auto& node : lattice.end_nodes[end]) {
      alpha[end] = log_add(alpha[end], alpha[static_cast<size_t>(node.begin)] + node.score);
    }
  }
  beta[n] = 0.0;
  for (size_t begin = n; begin-- > 0;) {
    for (const auto& node : lattice.begin_nodes[begin]) {
      beta[begin] = log_add(beta[begin], node.score + beta[static_cast<size_t>(node.end)]);
    }
  }
}

}  // namespace

double word_log_marginal(const Lattice& lattice) {
  std::vector<double> alpha, beta;
  forward_backward(lattice, alpha, beta);
  return alpha[lattice.length()];
}

// ---------------------------------------------------------------------------
// Training

size_t required_piece_count(const Corpus& corpus) { return 2 * corpus.char_inventory.size(); }

SubwordVocab build_seed_vocab(const Corpus& corpus, const TrainerConfig& cfg) {
  if (corpus.empty() || corpus.word_counts.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot build a seed vocabulary from an empty corpus");
  }
  std::map<std::u32string, int64_t> counts;
  for (char32_t c : corpus.char_inventory) {
    counts.emplace(piece_key(std::u32string_view(&c, 1), false), 0);
    counts.emplace(piece_key(std::u32string_view(&c, 1), true), 0);
  }
  for (const auto& w : corpus_words(corpus)) {
    const size_t n = w.chars.size();
    for (size_t begin = 0; begin < n; ++begin) {
      for (size_t len = 1; len <= cfg.max_piece_length && begin + len <= n; ++len) {
        counts[piece_key(std::u32string_view(w.chars).substr(begin, len), begin > 0)] += w.freq;
      }
    }
  }

  std::vector<std::pair<std::u32string, int64_t>> singles, multis;
  for (auto& [key, count] : counts) {
    const size_t len = key.size() - (key[0] == kContinuationMarker ? 1 : 0);
    if (len == 1) {
      singles.emplace_back(key, count);
    } else if (count >= cfg.min_piece_count) {
      multis.emplace_back(key, count);
    }
  }
  std::stable_sort(multis.begin(), multis.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (multis.size() > cfg.effective_seed_size()) multis.resize(cfg.effective_seed_size());

  std::vector<std::pair<std::string, double>> pieces;
  for (const auto* group : {&singles, &multis}) {
    for (const auto& [key, count] : *group) {
      pieces.emplace_back(u32_to_utf8(key), 0.0);
    }
  }
  auto vocab = SubwordVocab::from_pieces(pieces);
  std::vector<double> seed_counts(vocab.size(), 0.0);
  size_t i = kNumControlPieces;
  for (const auto* group : {&singles, &multis}) {
    for (const auto& [key, count] : *group) seed_counts[i++] = static_cast<double>(count);
  }
  const auto scores = counts_to_scores(vocab, seed_counts);
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(vocab.size()); ++id) {
    vocab.set_score(id, scores[static_cast<size_t>(id)]);
  }
  return vocab;
}

EmResult em_step(const Corpus& corpus, const SubwordVocab& vocab) {
  std::vector<double> counts(vocab.size(), 0.0);
  std::vector<double> alpha, beta;
  double log_likelihood = 0.0;
  for (const auto& w : corpus_words(corpus)) {
    const auto lattice = build_lattice(w.chars, vocab);
    forward_backward(lattice, alpha, beta);
    const double z = alpha[lattice.length()];
    if (z == kNegInf) {
      throw Error(ErrorKind::kOutOfInventory,
                  "word '" + u32_to_utf8(w.chars) + "' has no segmentation");
    }
    const auto freq = static_cast<double>(w.freq);
    log_likelihood += freq * z;
    for (const auto& nodes : lattice.begin_nodes) {
      for (const auto& node : nodes) {
        const double posterior = std::exp(alpha[static_cast<size_t>(node.begin)] + node.score +
                                          beta[static_cast<size_t>(node.end)] - z);
        counts[static_cast<size_t>(node.id)] += freq * posterior;
      }
    }
  }
  EmResult result{vocab, log_likelihood};
  const auto scores = counts_to_scores(vocab, counts);
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(vocab.size()); ++id) {
    result.vocab.set_score(id, scores[static_cast<size_t>(id)]);
  }
  return result;
}

std::vector<std::pair<PieceId, double>> removal_losses(const Corpus& corpus,
                                                       const SubwordVocab& vocab) {
  const auto words = corpus_words(corpus);
  std::vector<Lattice> lattices;
  std::vector<double> best;
  std::map<PieceId, std::vector<size_t>> users;
  lattices.reserve(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    lattices.push_back(build_lattice(words[i].chars, vocab));
    auto seg = viterbi_word(lattices.back(), vocab);
    if (!seg) {
      throw Error(ErrorKind::kOutOfInventory,
                  "word '" + u32_to_utf8(words[i].chars) + "' has no segmentation");
    }
    best.push_back(seg->total_score);
    std::set<PieceId> used(seg->ids.begin(), seg->ids.end());
    for (PieceId id : used) users[id].push_back(i);
  }

  std::vector<std::pair<PieceId, double>> losses;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(vocab.size()); ++id) {
    if (vocab.is_required(id)) continue;
    double loss = 0.0;
    if (auto it = users.find(id); it != users.end()) {
      for (size_t i : it->second) {
        auto alt = viterbi_word(lattices[i], vocab, id);
        if (!alt) {
          loss = std::numeric_limits<double>::infinity();
          break;
        }
        loss += static_cast<double>(words[i].freq) * (best[i] - alt->total_score);
      }
    }
    losses.emplace_back(id, loss);
  }
  return losses;
}

SubwordVocab prune_to_count(const Corpus& corpus, const SubwordVocab& vocab, size_t keep_multi) {
  auto losses = removal_losses(corpus, vocab);
  std::stable_sort(losses.begin(), losses.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return vocab.piece(a.first) < vocab.piece(b.first);
  });
  std::vector<bool> keep(vocab.size(), false);
  for (size_t i = 0; i < losses.size() && i < keep_multi; ++i) {
    keep[static_cast<size_t>(losses[i].first)] = true;
  }
  double log_mass = kNegInf;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(vocab.size()); ++id) {
    if (vocab.is_required(id)) keep[static_cast<size_t>(id)] = true;
    if (keep[static_cast<size_t>(id)]) log_mass = log_add(log_mass, vocab.score(id));
  }
  std::vector<std::pair<std::string, double>> pieces;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(vocab.size()); ++id) {
    if (keep[static_cast<size_t>(id)]) pieces.emplace_back(vocab.piece(id), vocab.score(id) - log_mass);
  }
  return SubwordVocab::from_pieces(pieces);
}

SubwordVocab prune_vocab(const Corpus& corpus, const SubwordVocab& vocab, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "keep_fraction must lie in (0, 1)");
  }
  size_t multi = 0;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(vocab.size()); ++id) {
    if (!vocab.is_required(id)) ++multi;
  }
  const auto keep = static_cast<size_t>(std::floor(keep_fraction * static_cast<double>(multi)));
  return prune_to_count(corpus, vocab, keep);
}

SubwordVocab train_unigram(const Corpus& corpus, const TrainerConfig& cfg) {
  if (corpus.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot train on an empty corpus");
  }
  const size_t required = required_piece_count(corpus);
  const size_t k = cfg.target_vocab_size;
  if (k < required + 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "vocabulary size " + std::to_string(k) + " is below the " +
                    std::to_string(required) + " required character pieces + 1");
  }
  if (!(cfg.shrink_factor > 0.0 && cfg.shrink_factor < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "shrink_factor must lie in (0, 1)");
  }

  auto run_em = [&](SubwordVocab v) {
    for (size_t i = 0; i < cfg.em_subiterations; ++i) v = em_step(corpus, v).vocab;
    return v;
  };

  SubwordVocab vocab = build_seed_vocab(corpus, cfg);
  const size_t target_multi = k - required;
  while (static_cast<double>(vocab.num_pieces()) > 1.1 * static_cast<double>(k)) {
    vocab = run_em(std::move(vocab));
    const size_t multi = vocab.num_pieces() - required;
    const auto shrunk = static_cast<size_t>(cfg.shrink_factor * static_cast<double>(multi));
    vocab = prune_to_count(corpus, vocab, std::max(shrunk, target_multi));
  }
  vocab = run_em(std::move(vocab));
  if (vocab.num_pieces() > k) {
    vocab = run_em(prune_to_count(corpus, vocab, target_multi));
  }

  // Canonical id order: score descending, then piece.
  std::vector<std::pair<std::string, double>> pieces;
  for (PieceId id = kNumControlPieces; id < static_cast<PieceId>(vocab.size()); ++id) {
    pieces.emplace_back(vocab.piece(id), vocab.score(id));
  }
  std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return SubwordVocab::from_pieces(pieces);
}

// ---------------------------------------------------------------------------
// Serialization

std::string vocab_to_string(const SubwordVocab& vocab) {
  std::string out;
  for (const auto& e : vocab.entries()) {
    out += fmt::format("{}\t{:.6f}\n", e.piece, e.control ? 0.0 : e.score);
  }
  return out;
}

void save_vocab(const SubwordVocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << vocab_to_string(vocab);
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

SubwordVocab vocab_from_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  size_t line_no = 0;
  std::vector<std::pair<std::string, double>> pieces;
  constexpr std::string_view kControls[] = {kPadPiece, kBosPiece, kEosPiece};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::kParse, "vocab line " + std::to_string(line_no) + ": missing tab");
    }
    const std::string piece = line.substr(0, tab);
    double score = 0.0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, score);
    if (ec != std::errc() || ptr != last) {
      throw Error(ErrorKind::kParse, "vocab line " + std::to_string(line_no) + ": bad score");
    }
    if (line_no < static_cast<size_t>(kNumControlPieces)) {
      if (piece != kControls[line_no]) {
        throw Error(ErrorKind::kParse, "vocab line " + std::to_string(line_no) + ": expected '" +
                                           std::string(kControls[line_no]) + "'");
      }
    } else {
      pieces.emplace_back(piece, score);
    }
    ++line_no;
  }
  if (line_no < static_cast<size_t>(kNumControlPieces)) {
    throw Error(ErrorKind::kParse, "vocab file is missing control pieces");
  }
  return SubwordVocab::from_pieces(pieces);
}

SubwordVocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read vocab file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return vocab_from_string(buffer.str());
}

}  // namespace subicap

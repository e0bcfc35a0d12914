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

// Unigram language-model subword tokenizer.
//
// A caption is modelled as an independent product of piece probabilities.
// Words are segmented independently. The first piece of a word is written
// as-is and every following piece of the same word carries a leading '_'
// continuation marker ("head", "_ed"), so "ed" and "_ed" are distinct
// vocabulary entries. Training starts from a frequent-substring seed,
// alternates EM re-estimation with likelihood-based pruning, and stops at
// the requested number of pieces.

#ifndef SUBICAP_UNIGRAM_HPP_
#define SUBICAP_UNIGRAM_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "subicap/corpus.hpp"

namespace subicap {

using PieceId = int32_t;

inline constexpr PieceId kPadId = 0;
inline constexpr PieceId kBosId = 1;
inline constexpr PieceId kEosId = 2;
inline constexpr PieceId kNumControlPieces = 3;

inline constexpr std::string_view kPadPiece = "<pad>";
inline constexpr std::string_view kBosPiece = "<bos>";
inline constexpr std::string_view kEosPiece = "<eos>";

// Probability given to pieces that receive no expected count, so that every
// score stays finite. Such pieces never occur in any corpus lattice.
inline constexpr double kUnusedPieceProbability = 1e-10;

struct VocabEntry {
  std::string piece;
  double score = 0.0;  // natural-log probability; 0 for control pieces
  bool control = false;

  bool operator==(const VocabEntry&) const = default;
};

// Immutable-by-convention piece inventory. Ids 0..2 are the control pieces
// <pad>, <bos>, <eos>; they are excluded from normalization and never match
// text.
class SubwordVocab {
 public:
  SubwordVocab();

  // Control pieces are prepended; `pieces` keep their order and scores.
  static SubwordVocab from_pieces(
      const std::vector<std::pair<std::string, double>>& pieces);
  // Same, with linear probabilities that are log-transformed.
  static SubwordVocab from_probabilities(
      const std::vector<std::pair<std::string, double>>& pieces);

  size_t size() const { return entries_.size(); }
  size_t num_pieces() const { return entries_.size() - kNumControlPieces; }
  const std::vector<VocabEntry>& entries() const { return entries_; }
  const VocabEntry& entry(PieceId id) const { return entries_.at(static_cast<size_t>(id)); }
  const std::string& piece(PieceId id) const { return entry(id).piece; }
  double score(PieceId id) const { return entry(id).score; }
  bool is_control(PieceId id) const { return entry(id).control; }

  std::optional<PieceId> find(std::string_view piece) const;
  // Throws Error(kUnknownPiece).
  PieceId id_of(std::string_view piece) const;
  // Lookup of a text span; `continuation` selects the '_'-marked twin.
  std::optional<PieceId> find_span(std::u32string_view chars, bool continuation) const;

  // Longest piece surface in characters, marker excluded.
  size_t max_piece_chars() const { return max_piece_chars_; }
  // Single-character pieces (marked or unmarked). Never pruned.
  bool is_required(PieceId id) const;
  std::set<std::string> required_pieces() const;
  // Characters for which both the plain and the marked piece exist.
  bool covers(char32_t c) const;

  // Σ exp(score) over non-control entries.
  double probability_mass() const;

  void set_score(PieceId id, double score);

  bool operator==(const SubwordVocab& other) const { return entries_ == other.entries_; }

 private:
  void add(VocabEntry entry);

  std::vector<VocabEntry> entries_;
  std::unordered_map<std::u32string, PieceId> index_;
  size_t max_piece_chars_ = 0;
};

// True when the piece string begins with the continuation marker.
bool is_continuation(std::string_view piece);
// Piece text without the marker.
std::string_view piece_surface(std::string_view piece);
// Length of the surface in characters.
size_t piece_length(std::string_view piece);

// Marks the segments of one word: the first stays bare, the rest get '_'.
std::vector<std::string> mark_continuations(const std::vector<std::string>& segments);
// Marks every word of a caption that has been split into segments.
std::vector<std::string> mark_continuations(
    const std::vector<std::vector<std::string>>& words);

struct LatticeNode {
  int begin = 0;  // character offsets within the word, [begin, end)
  int end = 0;
  PieceId id = 0;
  double score = 0.0;
};

// Segmentation lattice of one word.
struct Lattice {
  std::u32string word;
  // begin_nodes[p]: spans starting at p, ordered by end then id.
  std::vector<std::vector<LatticeNode>> begin_nodes;
  std::vector<std::vector<LatticeNode>> end_nodes;

  size_t length() const { return word.size(); }
  size_t num_nodes() const;
};

// Throws Error(kOutOfInventory) naming the character and its offset when a
// character has no single-character piece at its position.
Lattice build_lattice(std::u32string_view word, const SubwordVocab& vocab);

struct TokenSequence {
  std::vector<std::string> pieces;
  std::vector<PieceId> ids;
  double total_score = 0.0;

  size_t size() const { return ids.size(); }
  bool operator==(const TokenSequence&) const = default;
};

// Most probable segmentation of a single word. Ties on score go to the path
// with fewer pieces, then to the lexicographically smaller piece sequence.
// `excluded` removes one piece id from consideration. Returns nullopt when no
// complete path exists.
std::optional<TokenSequence> viterbi_word(const Lattice& lattice,
                                          const SubwordVocab& vocab,
                                          std::optional<PieceId> excluded = std::nullopt);

// Segments a normalized caption word by word. Throws Error(kOutOfInventory).
TokenSequence viterbi_segment(std::string_view text, const SubwordVocab& vocab);
inline TokenSequence encode(std::string_view text, const SubwordVocab& vocab) {
  return viterbi_segment(text, vocab);
}

// Σ score(piece). Throws Error(kUnknownPiece).
double sequence_logprob(const TokenSequence& tokens, const SubwordVocab& vocab);

// Joins pieces into a caption. Throws Error(kOrphanContinuation) when a
// marked piece has no word to extend.
std::string detokenize(const std::vector<std::string>& pieces);
inline std::string detokenize(const TokenSequence& tokens) { return detokenize(tokens.pieces); }
// Detokenizes model ids; control ids are skipped.
std::string decode_ids(const std::vector<PieceId>& ids, const SubwordVocab& vocab);

// log Σ over all segmentations of Π p(piece), computed by the forward pass.
double word_log_marginal(const Lattice& lattice);

struct TrainerConfig {
  size_t target_vocab_size = 1000;
  size_t seed_size = 0;  // 0 means 20 × target_vocab_size
  size_t max_piece_length = 16;
  size_t em_subiterations = 2;
  double shrink_factor = 0.75;
  int64_t min_piece_count = 2;

  size_t effective_seed_size() const {
    return seed_size ? seed_size : 20 * target_vocab_size;
  }
};

// Number of single-character pieces a corpus forces: a plain and a marked
// piece per inventory character.
size_t required_piece_count(const Corpus& corpus);

SubwordVocab build_seed_vocab(const Corpus& corpus, const TrainerConfig& cfg);

struct EmResult {
  SubwordVocab vocab;
  double log_likelihood = 0.0;  // under the input vocabulary
};

// One EM iteration. Expected counts are reduced sequentially over the words
// of the corpus in lexicographic order.
EmResult em_step(const Corpus& corpus, const SubwordVocab& vocab);

// Keeps floor(keep_fraction × #multi-character pieces) multi-character pieces,
// ranked by the Viterbi corpus log-likelihood lost when each is removed alone,
// plus every single-character piece; then renormalizes.
SubwordVocab prune_vocab(const Corpus& corpus, const SubwordVocab& vocab,
                         double keep_fraction);
// Same ranking, explicit count of multi-character pieces to keep.
SubwordVocab prune_to_count(const Corpus& corpus, const SubwordVocab& vocab,
                            size_t keep_multi);

// Per multi-character piece: Viterbi corpus log-likelihood loss of removing it.
std::vector<std::pair<PieceId, double>> removal_losses(const Corpus& corpus,
                                                       const SubwordVocab& vocab);

SubwordVocab train_unigram(const Corpus& corpus, const TrainerConfig& cfg);

// Vocabulary file: "piece<TAB>score" per line, 6 decimals, id order, with
// <pad>, <bos>, <eos> on lines 0..2.
void save_vocab(const SubwordVocab& vocab, const std::filesystem::path& path);
std::string vocab_to_string(const SubwordVocab& vocab);
SubwordVocab load_vocab(const std::filesystem::path& path);
SubwordVocab vocab_from_string(std::string_view text);

}  // namespace subicap

#endif  // SUBICAP_UNIGRAM_HPP_

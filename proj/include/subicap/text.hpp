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

// UTF-8 helpers and the canonical caption normalization.

#ifndef SUBICAP_TEXT_HPP_
#define SUBICAP_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace subicap {

// The continuation marker prefixed to every non-initial piece of a word.
inline constexpr char32_t kContinuationMarker = U'_';

// Throws Error(kParse) on malformed UTF-8.
std::u32string utf8_to_u32(std::string_view text);
std::string u32_to_utf8(std::u32string_view text);
std::string u32_to_utf8(char32_t c);

// Canonical form: NFKC, lowercase, every run of whitespace collapsed to one
// ASCII space, no leading/trailing whitespace. The continuation marker '_'
// is reserved and is folded into whitespace. Idempotent.
std::string normalize_text(std::string_view text);

// Splits on ASCII spaces, dropping empty fields.
std::vector<std::string> split_words(std::string_view text);
std::vector<std::string_view> split_words_view(std::string_view text);

std::string join_words(const std::vector<std::string>& words);

}  // namespace subicap

#endif  // SUBICAP_TEXT_HPP_

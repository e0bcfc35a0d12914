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

#include "subicap/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "subicap/error.hpp"

namespace subicap {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return "io";
    case ErrorKind::kParse:
      return "parse";
    case ErrorKind::kInvalidArgument:
      return "invalid_argument";
    case ErrorKind::kOutOfInventory:
      return "out_of_inventory";
    case ErrorKind::kUnknownPiece:
      return "unknown_piece";
    case ErrorKind::kOrphanContinuation:
      return "orphan_continuation";
    case ErrorKind::kShapeMismatch:
      return "shape_mismatch";
    case ErrorKind::kNumerical:
      return "numerical";
  }
  return "unknown";
}

std::u32string utf8_to_u32(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    size_t len = 0;
    if (lead < 0x80) {
      cp = lead;
      len = 1;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      len = 4;
    } else {
      throw Error(ErrorKind::kParse,
                  "invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > text.size()) {
      throw Error(ErrorKind::kParse,
                  "truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) {
        throw Error(ErrorKind::kParse, "invalid UTF-8 continuation byte at offset " +
                                           std::to_string(i + k));
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string u32_to_utf8(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string u32_to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) out += u32_to_utf8(c);
  return out;
}

namespace {

icu::UnicodeString nfkc(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kIo, "ICU NFKC normalizer unavailable");
  }
  icu::UnicodeString out = normalizer->normalize(in, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kParse, "NFKC normalization failed");
  }
  return out;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  // Validate first so malformed input surfaces as a parse error rather than
  // ICU's silent U+FFFD substitution.
  utf8_to_u32(text);

  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u = nfkc(u);
  u.toLower(icu::Locale::getRoot());
  // Lowercasing can leave a string that is no longer NFKC-closed.
  u = nfkc(u);

  std::string utf8;
  u.toUTF8String(utf8);

  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  for (char32_t c : utf8_to_u32(utf8)) {
    if (c == kContinuationMarker || u_isUWhiteSpace(static_cast<UChar32>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out += u32_to_utf8(c);
  }
  return out;
}

std::vector<std::string_view> split_words_view(std::string_view text) {
  std::vector<std::string_view> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto w : split_words_view(text)) out.emplace_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace subicap

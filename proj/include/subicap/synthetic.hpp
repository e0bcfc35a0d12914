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

// Deterministic synthetic scenes standing in for detector output.
//
// Each scene has two large "salient" regions of distinct object classes and
// up to two small distractors. The caption names the salient pair, the
// relative size of the subject and their spatial relation, all of which are
// recoverable from appearance and box geometry:
//
//   a [large|small] <subject> is <left of|right of|above|below> the <object>
//
// The subject is the salient region whose class comes first in class order.

#ifndef SUBICAP_SYNTHETIC_HPP_
#define SUBICAP_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "subicap/corpus.hpp"
#include "subicap/geometry.hpp"

namespace subicap {

struct SyntheticConfig {
  size_t d_in = 16;
  size_t max_regions = 4;  // at least 2
  double noise_scale = 0.1;
};

struct SyntheticImage {
  std::string image_id;
  RegionSet regions;
  std::vector<int> classes;  // per region
  std::string caption;
};

const std::vector<std::string>& synthetic_classes();
// Every word a synthetic caption can contain.
const std::vector<std::string>& synthetic_grammar_words();

// Fixed per-class appearance templates, classes × d_in. Independent of the
// dataset seed so scenes from different seeds share classes.
Matrix class_templates(size_t d_in);

std::vector<SyntheticImage> synthetic_regions(uint64_t seed, size_t n_images,
                                              const SyntheticConfig& cfg = {});

Corpus synthetic_corpus(const std::vector<SyntheticImage>& images);

// Corpus lines to `corpus_path`, boxes and appearance vectors to a JSON
// sidecar at `sidecar_path`.
void save_synthetic(const std::vector<SyntheticImage>& images,
                    const std::filesystem::path& corpus_path,
                    const std::filesystem::path& sidecar_path);
std::vector<SyntheticImage> load_synthetic(const std::filesystem::path& corpus_path,
                                           const std::filesystem::path& sidecar_path);

}  // namespace subicap

#endif  // SUBICAP_SYNTHETIC_HPP_

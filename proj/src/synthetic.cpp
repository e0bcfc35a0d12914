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

#include "subicap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "subicap/error.hpp"

namespace subicap {
namespace {

constexpr uint64_t kTemplateSeed = 0x7E3A11CEu;
constexpr double kLargeRatio = 1.5;
constexpr double kSameSizeRatio = 1.2;
constexpr double kRelationMargin = 0.1;

}  // namespace

const std::vector<std::string>& synthetic_classes() {
  static const std::vector<std::string> classes = {"cat",  "dog", "horse", "bird",  "ball",
                                                   "tree", "car", "boat",  "chair", "clock"};
  return classes;
}

const std::vector<std::string>& synthetic_grammar_words() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w = {"a",     "is",    "the",   "left",  "right",
                                  "of",    "above", "below", "large", "small"};
    for (const auto& c : synthetic_classes()) w.push_back(c);
    return w;
  }();
  return words;
}

Matrix class_templates(size_t d_in) {
  std::mt19937_64 rng(kTemplateSeed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix t(static_cast<Eigen::Index>(synthetic_classes().size()), static_cast<Eigen::Index>(d_in));
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = normal(rng);
  return t;
}

std::vector<SyntheticImage> synthetic_regions(uint64_t seed, size_t n_images,
                                              const SyntheticConfig& cfg) {
  if (cfg.max_regions < 2) throw Error(ErrorKind::kInvalidArgument, "max_regions must be at least 2");
  const auto& classes = synthetic_classes();
  const Matrix templates = class_templates(cfg.d_in);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.noise_scale);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto pick = [&](size_t n) { return static_cast<size_t>(unit(rng) * static_cast<double>(n)) % n; };

  auto make_region = [&](int cls, Box box) {
    Region r;
    r.box = box;
    r.appearance.resize(cfg.d_in);
    for (size_t j = 0; j < cfg.d_in; ++j) {
      r.appearance[j] = templates(cls, static_cast<Eigen::Index>(j)) + noise(rng);
    }
    return r;
  };

  std::vector<SyntheticImage> images;
  images.reserve(n_images);
  for (size_t n = 0; n < n_images; ++n) {
    const auto a = static_cast<int>(pick(classes.size()));
    auto b = static_cast<int>(pick(classes.size() - 1));
    if (b >= a) ++b;
    const int subject = std::min(a, b);
    const int object = std::max(a, b);

    Box sb, ob;
    double ratio = 1.0;
    double dx = 0.0, dy = 0.0;
    while (true) {
      sb = {uniform(0.2, 0.8), uniform(0.2, 0.8), uniform(0.2, 0.45), uniform(0.2, 0.45)};
      ob = {uniform(0.2, 0.8), uniform(0.2, 0.8), uniform(0.2, 0.45), uniform(0.2, 0.45)};
      dx = ob.x - sb.x;
      dy = ob.y - sb.y;
      ratio = (sb.w * sb.h) / (ob.w * ob.h);
      const bool clear_relation = std::abs(std::abs(dx) - std::abs(dy)) >= kRelationMargin;
      const bool clear_size = ratio >= kLargeRatio || ratio <= 1.0 / kLargeRatio ||
                              (ratio <= kSameSizeRatio && ratio >= 1.0 / kSameSizeRatio);
      if (clear_relation && clear_size) break;
    }

    std::string caption = "a ";
    if (ratio >= kLargeRatio) caption += "large ";
    if (ratio <= 1.0 / kLargeRatio) caption += "small ";
    caption += classes[static_cast<size_t>(subject)] + " is ";
    if (std::abs(dx) > std::abs(dy)) {
      caption += dx > 0 ? "left of" : "right of";
    } else {
      // Image y grows downward.
      caption += dy > 0 ? "above" : "below";
    }
    caption += " the " + classes[static_cast<size_t>(object)];

    SyntheticImage img;
    img.image_id = "syn" + std::to_string(seed) + "_" + std::to_string(n);
    img.caption = caption;
    std::vector<std::pair<int, Region>> regions;
    regions.emplace_back(subject, make_region(subject, sb));
    regions.emplace_back(object, make_region(object, ob));
    const size_t distractors = pick(cfg.max_regions - 1);
    for (size_t d = 0; d < distractors; ++d) {
      const auto cls = static_cast<int>(pick(classes.size()));
      Box box{uniform(0.1, 0.9), uniform(0.1, 0.9), uniform(0.04, 0.08), uniform(0.04, 0.08)};
      regions.emplace_back(cls, make_region(cls, box));
    }
    std::shuffle(regions.begin(), regions.end(), rng);
    for (auto& [cls, region] : regions) {
      img.classes.push_back(cls);
      img.regions.push_back(std::move(region));
    }
    images.push_back(std::move(img));
  }
  return images;
}

Corpus synthetic_corpus(const std::vector<SyntheticImage>& images) {
  Corpus corpus;
  for (const auto& img : images) corpus.add({img.image_id, prepare_caption(img.caption, kDefaultMaxWords)});
  return corpus;
}

void save_synthetic(const std::vector<SyntheticImage>& images,
                    const std::filesystem::path& corpus_path,
                    const std::filesystem::path& sidecar_path) {
  write_corpus(synthetic_corpus(images), corpus_path);
  nlohmann::json j;
  j["images"] = nlohmann::json::array();
  for (const auto& img : images) {
    nlohmann::json regions = nlohmann::json::array();
    for (size_t i = 0; i < img.regions.size(); ++i) {
      const auto& r = img.regions[i];
      regions.push_back({{"box", {r.box.x, r.box.y, r.box.w, r.box.h}},
                         {"class", img.classes[i]},
                         {"appearance", r.appearance}});
    }
    j["images"].push_back({{"image_id", img.image_id}, {"regions", regions}});
  }
  std::ofstream out(sidecar_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + sidecar_path.string() + "'");
  out << j.dump(1) << '\n';
}

std::vector<SyntheticImage> load_synthetic(const std::filesystem::path& corpus_path,
                                           const std::filesystem::path& sidecar_path) {
  const Corpus corpus = load_corpus(corpus_path);
  std::ifstream in(sidecar_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read '" + sidecar_path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("synthetic sidecar: ") + e.what());
  }
  const auto& items = j.at("images");
  if (items.size() != corpus.captions.size()) {
    throw Error(ErrorKind::kShapeMismatch, "sidecar and corpus disagree on the number of images");
  }
  std::vector<SyntheticImage> images;
  for (size_t i = 0; i < items.size(); ++i) {
    SyntheticImage img;
    img.image_id = items[i].at("image_id").get<std::string>();
    if (img.image_id != corpus.captions[i].image_id) {
      throw Error(ErrorKind::kShapeMismatch, "sidecar image '" + img.image_id + "' out of order");
    }
    img.caption = corpus.captions[i].text;
    for (const auto& r : items[i].at("regions")) {
      const auto box = r.at("box").get<std::vector<double>>();
      if (box.size() != 4) throw Error(ErrorKind::kParse, "box must have 4 numbers");
      img.regions.push_back({{box[0], box[1], box[2], box[3]}, r.at("appearance").get<std::vector<double>>()});
      img.classes.push_back(r.at("class").get<int>());
    }
    validate_regions(img.regions);
    images.push_back(std::move(img));
  }
  return images;
}

}  // namespace subicap

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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "subicap/analysis.hpp"
#include "subicap/autograd.hpp"
#include "subicap/baseline.hpp"
#include "subicap/corpus.hpp"
#include "subicap/error.hpp"
#include "subicap/model.hpp"
#include "subicap/text.hpp"
#include "subicap/unigram.hpp"

namespace py = pybind11;
using namespace subicap;

namespace {

// Reports cross the boundary as JSON text; the Python side parses it.
std::string sweep_json(const Corpus& corpus, const std::vector<size_t>& ks) {
  return to_json(vocab_sweep(corpus, ks, TrainerConfig{})).dump();
}

std::string uniqueness_json(const std::vector<std::string>& generated, const Corpus& training) {
  return to_json(uniqueness_report(generated, training)).dump();
}

std::string params_json(const std::vector<size_t>& vocab_sizes, size_t d_model, size_t layers,
                        size_t heads, size_t d_ff) {
  ModelConfig dims;
  dims.d_model = d_model;
  dims.n_enc_layers = layers;
  dims.n_dec_layers = layers;
  dims.n_heads = heads;
  dims.d_ff = d_ff ? d_ff : 2 * d_model;
  std::vector<ParamCount> counts;
  for (size_t v : vocab_sizes) counts.push_back(param_count(v, dims));
  return to_json(counts).dump();
}

}  // namespace

PYBIND11_MODULE(_subicap, m) {
  m.doc() = "subicap native core";

  static py::exception<Error> error(m, "SubicapError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(error_kind_name(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("normalize_text", &normalize_text, py::arg("text"));

  py::class_<Corpus>(m, "Corpus")
      .def_property_readonly("captions",
                             [](const Corpus& c) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& cap : c.captions) out.emplace_back(cap.image_id, cap.text);
                               return out;
                             })
      .def_readonly("word_counts", &Corpus::word_counts)
      .def("__len__", [](const Corpus& c) { return c.captions.size(); });
  m.def("load_corpus", &load_corpus, py::arg("path"), py::arg("max_words") = kDefaultMaxWords);
  m.def("corpus_from_texts", &corpus_from_texts, py::arg("texts"),
        py::arg("max_words") = kDefaultMaxWords);

  py::class_<SubwordVocab>(m, "SubwordVocab")
      .def("__len__", &SubwordVocab::size)
      .def("num_pieces", &SubwordVocab::num_pieces)
      .def("piece", &SubwordVocab::piece, py::arg("id"))
      .def("score", &SubwordVocab::score, py::arg("id"))
      .def("id_of", &SubwordVocab::id_of, py::arg("piece"))
      .def("pieces",
           [](const SubwordVocab& v) {
             std::vector<std::string> out;
             for (const auto& e : v.entries()) out.push_back(e.piece);
             return out;
           })
      .def("encode", [](const SubwordVocab& v, const std::string& text) { return encode(text, v).pieces; },
           py::arg("text"))
      .def("encode_ids", [](const SubwordVocab& v, const std::string& text) { return encode(text, v).ids; },
           py::arg("text"))
      .def("decode_ids", [](const SubwordVocab& v, const std::vector<PieceId>& ids) { return decode_ids(ids, v); },
           py::arg("ids"))
      .def("save", [](const SubwordVocab& v, const std::filesystem::path& p) { save_vocab(v, p); },
           py::arg("path"))
      .def("__eq__", [](const SubwordVocab& a, const SubwordVocab& b) { return a == b; });
  m.def("load_vocab", &load_vocab, py::arg("path"));
  m.def(
      "train_unigram",
      [](const Corpus& corpus, size_t k, size_t max_piece_length) {
        TrainerConfig cfg;
        cfg.target_vocab_size = k;
        cfg.max_piece_length = max_piece_length;
        return train_unigram(corpus, cfg);
      },
      py::arg("corpus"), py::arg("vocab_size"), py::arg("max_piece_length") = 16);
  m.def("detokenize", py::overload_cast<const std::vector<std::string>&>(&detokenize), py::arg("pieces"));

  py::class_<BpeModel>(m, "BpeModel")
      .def_readonly("merges", &BpeModel::merges)
      .def("tokenize", [](const BpeModel& b, const std::string& text) { return bpe_tokenize(text, b); },
           py::arg("text"));
  m.def("train_bpe", &train_bpe, py::arg("corpus"), py::arg("num_merges"));

  py::class_<WordVocab>(m, "WordVocab")
      .def("__len__", &WordVocab::size)
      .def("__contains__", &WordVocab::contains)
      .def("words", &WordVocab::words)
      .def("tokenize", [](const WordVocab& w, const std::string& text) { return word_tokenize(text, w); },
           py::arg("text"));
  m.def("train_word_vocab", &train_word_vocab, py::arg("corpus"),
        py::arg("min_freq") = kDefaultMinWordFreq);

  m.def("fused_attention", &fused_attention, py::arg("logits"), py::arg("geo"));
  m.def("_sweep_json", &sweep_json, py::arg("corpus"), py::arg("ks"));
  m.def("_uniqueness_json", &uniqueness_json, py::arg("generated"), py::arg("training"));
  m.def("_params_json", &params_json, py::arg("vocab_sizes"), py::arg("d_model") = 32,
        py::arg("layers") = 2, py::arg("heads") = 2, py::arg("d_ff") = 0);
}

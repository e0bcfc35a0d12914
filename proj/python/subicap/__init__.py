# Copyright 2026 The subicap Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the subicap tokenizers and reports."""

import json

from ._subicap import (
    BpeModel,
    Corpus,
    SubicapError,
    SubwordVocab,
    WordVocab,
    corpus_from_texts,
    detokenize,
    fused_attention,
    load_corpus,
    load_vocab,
    normalize_text,
    train_bpe,
    train_unigram,
    train_word_vocab,
)
from . import _subicap

__all__ = [
    "BpeModel",
    "Corpus",
    "SubicapError",
    "SubwordVocab",
    "WordVocab",
    "corpus_from_texts",
    "detokenize",
    "fused_attention",
    "load_corpus",
    "load_vocab",
    "normalize_text",
    "param_count",
    "train_bpe",
    "train_unigram",
    "train_word_vocab",
    "uniqueness_report",
    "vocab_sweep",
]


def vocab_sweep(corpus, ks):
    return json.loads(_subicap._sweep_json(corpus, list(ks)))


def uniqueness_report(generated, training):
    return json.loads(_subicap._uniqueness_json(list(generated), training))


def param_count(vocab_sizes, d_model=32, layers=2, heads=2, d_ff=0):
    return json.loads(_subicap._params_json(list(vocab_sizes), d_model, layers, heads, d_ff))

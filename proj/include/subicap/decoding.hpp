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

// Greedy and beam-search decoding.

#ifndef SUBICAP_DECODING_HPP_
#define SUBICAP_DECODING_HPP_

#include <functional>
#include <vector>

#include "subicap/model.hpp"

namespace subicap {

// Log-probabilities of the next token given <bos> + generated tokens.
using NextTokenFn = std::function<Eigen::VectorXd(const std::vector<int>& prefix)>;

struct Hypothesis {
  std::vector<int> ids;  // generated tokens, <bos> and <eos> excluded
  double log_prob = 0.0;
  bool finished = false;  // ended with <eos>

  // Tokens scored, <eos> included.
  size_t length() const { return ids.size() + (finished ? 1 : 0); }
  // Length-normalized log-probability.
  double score() const { return length() ? log_prob / static_cast<double>(length()) : 0.0; }
};

// Picks the first arg-max token at every step.
Hypothesis greedy_decode(const NextTokenFn& next, int bos, int eos, size_t max_len);

// Keeps the `beam` best partial hypotheses by cumulative log-probability;
// candidates that emit <eos> retire and shrink the live beam. Stops when the
// beam is empty or after `max_len` tokens, then returns the finished (or
// truncated) hypothesis with the best length-normalized score. The greedy
// hypothesis always competes in the final selection, so the result never
// scores below greedy and beam = 1 reproduces it exactly.
Hypothesis beam_search(const NextTokenFn& next, int bos, int eos, size_t beam, size_t max_len);

// Model-backed next-token function over a fixed encoder output.
NextTokenFn model_next_token(const Matrix& encoded, const ModelParams& params,
                             const ModelConfig& cfg);

Hypothesis beam_search(const Matrix& encoded, const ModelParams& params, const ModelConfig& cfg,
                       size_t beam, size_t max_len);

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

}  // namespace subicap

#endif  // SUBICAP_DECODING_HPP_

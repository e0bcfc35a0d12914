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

#include "subicap/decoding.hpp"

#include <algorithm>
#include <cmath>

#include "subicap/error.hpp"
#include "subicap/unigram.hpp"

namespace subicap {

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double hi = logits.maxCoeff();
  const double lse = hi + std::log((logits.array() - hi).exp().sum());
  return logits.array() - lse;
}

Hypothesis greedy_decode(const NextTokenFn& next, int bos, int eos, size_t max_len) {
  Hypothesis hyp;
  std::vector<int> prefix{bos};
  while (hyp.ids.size() < max_len) {
    const Eigen::VectorXd lp = next(prefix);
    Eigen::Index best = 0;
    lp.maxCoeff(&best);
    hyp.log_prob += lp(best);
    if (static_cast<int>(best) == eos) {
      hyp.finished = true;
      break;
    }
    hyp.ids.push_back(static_cast<int>(best));
    prefix.push_back(static_cast<int>(best));
  }
  return hyp;
}

Hypothesis beam_search(const NextTokenFn& next, int bos, int eos, size_t beam, size_t max_len) {
  if (beam == 0) throw Error(ErrorKind::kInvalidArgument, "beam size must be at least 1");
  struct Candidate {
    size_t parent;
    int token;
    double log_prob;
  };

  std::vector<Hypothesis> live(1);
  std::vector<Hypothesis> done;
  for (size_t step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<Candidate> cands;
    for (size_t h = 0; h < live.size(); ++h) {
      std::vector<int> prefix{bos};
      prefix.insert(prefix.end(), live[h].ids.begin(), live[h].ids.end());
      const Eigen::VectorXd lp = next(prefix);
      for (Eigen::Index tok = 0; tok < lp.size(); ++tok) {
        cands.push_back({h, static_cast<int>(tok), live[h].log_prob + lp(tok)});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.log_prob > b.log_prob;
    });
    std::vector<Hypothesis> next_live;
    for (size_t i = 0; i < cands.size() && i < beam; ++i) {
      Hypothesis h = live[cands[i].parent];
      h.log_prob = cands[i].log_prob;
      if (cands[i].token == eos) {
        h.finished = true;
        done.push_back(std::move(h));
      } else {
        h.ids.push_back(cands[i].token);
        next_live.push_back(std::move(h));
      }
    }
    live = std::move(next_live);
  }
  for (auto& h : live) done.push_back(std::move(h));
  done.push_back(greedy_decode(next, bos, eos, max_len));

  const Hypothesis* best = &done.front();
  for (const auto& h : done) {
    if (h.score() > best->score()) best = &h;
  }
  return *best;
}

NextTokenFn model_next_token(const Matrix& encoded, const ModelParams& params,
                             const ModelConfig& cfg) {
  return [&encoded, &params, &cfg](const std::vector<int>& prefix) -> Eigen::VectorXd {
    const Matrix logits = decoder_forward(encoded, prefix, params, cfg);
    return log_softmax(logits.row(logits.rows() - 1).transpose());
  };
}

Hypothesis beam_search(const Matrix& encoded, const ModelParams& params, const ModelConfig& cfg,
                       size_t beam, size_t max_len) {
  // The decoder input is <bos> plus up to max_len - 1 generated tokens.
  const size_t limit = std::min(max_len, cfg.max_seq_len);
  return beam_search(model_next_token(encoded, params, cfg), kBosId, kEosId, beam, limit);
}

}  // namespace subicap

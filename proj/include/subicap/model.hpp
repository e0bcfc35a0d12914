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

// Object-relational captioning transformer.
//
// The encoder attends over image regions with weights that multiply the
// usual scaled dot-product scores by ReLU-projected box-geometry features.
// The decoder is a standard post-norm transformer decoder over subword ids.
// Everything runs in double precision on the autograd Tape.

#ifndef SUBICAP_MODEL_HPP_
#define SUBICAP_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "subicap/autograd.hpp"
#include "subicap/geometry.hpp"

namespace subicap {

struct ModelConfig {
  size_t d_model = 32;
  size_t n_enc_layers = 2;
  size_t n_dec_layers = 2;
  size_t n_heads = 2;
  size_t d_ff = 64;
  size_t vocab_size = 0;
  size_t max_seq_len = 24;
  size_t geo_embed_dim = 8;  // per displacement component
  size_t d_in = 16;          // appearance feature size

  // Throws Error(kInvalidArgument).
  void validate() const;
  size_t head_dim() const { return d_model / n_heads; }

  bool operator==(const ModelConfig&) const = default;
};

struct Tensor {
  std::string name;
  Matrix value;
};

class ModelParams {
 public:
  ModelParams() = default;

  void add(std::string name, Matrix value);
  const Matrix& at(const std::string& name) const;
  Matrix& at(const std::string& name);
  size_t index_of(const std::string& name) const;

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  size_t size() const { return tensors_.size(); }
  // Total scalar count.
  size_t num_scalars() const;

  bool all_finite() const;

 private:
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, size_t> index_;
};

// Xavier-uniform weights, zero biases, unit layer-norm gains.
ModelParams init_params(const ModelConfig& cfg, uint64_t seed);
// Every tensor filled with `value` (layer-norm gains included).
ModelParams constant_params(const ModelConfig& cfg, double value);

// Encoder output q: N × d_model.
Matrix encoder_forward(const RegionSet& regions, const ModelParams& params,
                       const ModelConfig& cfg);
// Logits, prefix length × vocab_size. Row t depends only on prefix[0..t].
Matrix decoder_forward(const Matrix& encoded, std::span<const int> prefix,
                       const ModelParams& params, const ModelConfig& cfg);

// Attention maps of the first encoder layer, one N×N matrix per head.
std::vector<Matrix> encoder_attention_maps(const RegionSet& regions, const ModelParams& params,
                                           const ModelConfig& cfg);

struct Example {
  RegionSet regions;
  // Framed and padded: <bos> s_1 … s_T <eos> <pad> …
  std::vector<int> sequence;
};

// Frames piece ids as <bos> ids <eos> and right-pads with <pad> up to
// `padded_length` (0 = no padding). Throws when the decoder input would
// exceed cfg.max_seq_len.
std::vector<int> frame_sequence(std::span<const int> ids, const ModelConfig& cfg,
                                size_t padded_length = 0);

struct LossResult {
  double loss = 0.0;            // mean cross-entropy per non-pad target
  size_t tokens = 0;            // non-pad targets
  size_t correct = 0;           // argmax hits among them
  std::vector<Matrix> gradients;  // one per tensor when requested; else empty
};

// Throws Error(kInvalidArgument) when the batch has no non-pad target and
// Error(kNumerical) when the loss is not finite.
LossResult batch_loss(std::span<const Example> batch, const ModelParams& params,
                      const ModelConfig& cfg, bool with_gradients);

struct OptimConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lr_decay = 0.8;
  size_t decay_every = 300;  // optimizer steps per decay
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  int64_t step = 0;
};

struct StepResult {
  double loss = 0.0;
  double accuracy = 0.0;  // next-token accuracy before the update
  double learning_rate = 0.0;
};

// Cross-entropy forward/backward on the batch and one Adam update.
StepResult train_step(std::span<const Example> batch, ModelParams& params,
                      const ModelConfig& cfg, const OptimConfig& optim, AdamState& state);

// Next-token accuracy over non-pad targets (teacher forcing).
double token_accuracy(std::span<const Example> batch, const ModelParams& params,
                      const ModelConfig& cfg);

// Central differences (step 1e-5) on `n_coords` uniformly drawn scalars;
// returns max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double grad_check(const ModelParams& params, const ModelConfig& cfg,
                  std::span<const Example> probe, size_t n_coords, uint64_t seed);

// Analytic parameter count; see vocab_analysis for the split.
size_t count_parameters(const ModelConfig& cfg);

// Binary checkpoint: "SUBICAPK" magic, u64 little-endian header length, JSON
// header (config and tensor table), then little-endian f64 payload in table
// order.
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                     const ModelParams& params);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path& path);

}  // namespace subicap

#endif  // SUBICAP_MODEL_HPP_

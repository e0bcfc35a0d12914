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

#include "subicap/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "subicap/error.hpp"
#include "subicap/unigram.hpp"

namespace subicap {
namespace {

using Var = Tape::Var;

std::string layer_name(const char* stack, size_t layer, const char* rest) {
  return std::string(stack) + "." + std::to_string(layer) + "." + rest;
}

// Creates tape leaves for parameters on first use.
class Binder {
 public:
  Binder(Tape& tape, const ModelParams& params) : tape_(tape), params_(params) {
    vars_.assign(params.size(), Var{});
  }

  Var operator()(const std::string& name) {
    const size_t idx = params_.index_of(name);
    if (vars_[idx].index < 0) {
      vars_[idx] = tape_.leaf(params_.tensors()[idx].value, static_cast<int>(idx));
    }
    return vars_[idx];
  }

 private:
  Tape& tape_;
  const ModelParams& params_;
  std::vector<Var> vars_;
};

Var linear(Tape& t, Binder& p, Var x, const std::string& prefix) {
  return t.add_row(t.matmul(x, p(prefix + ".w")), p(prefix + ".b"));
}

enum class AttentionKind { kGeometric, kCausal, kPlain };

// Multi-head attention; `geo` (N²×H, already ReLU'd) is used for kGeometric.
Var attention(Tape& t, Binder& p, const ModelConfig& cfg, const std::string& prefix, Var query,
              Var memory, AttentionKind kind, Var geo, std::vector<Var>* maps = nullptr) {
  const Var q = linear(t, p, query, prefix + ".q");
  const Var k = linear(t, p, memory, prefix + ".k");
  const Var v = linear(t, p, memory, prefix + ".v");
  const int dk = static_cast<int>(cfg.head_dim());
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
  const int n_mem = static_cast<int>(t.value(memory).rows());
  std::vector<Var> heads;
  for (int h = 0; h < static_cast<int>(cfg.n_heads); ++h) {
    const Var qh = t.slice_cols(q, h * dk, dk);
    const Var kh = t.slice_cols(k, h * dk, dk);
    const Var vh = t.slice_cols(v, h * dk, dk);
    const Var logits = t.scale(t.matmul_nt(qh, kh), inv_sqrt);
    Var weights;
    switch (kind) {
      case AttentionKind::kGeometric:
        weights = t.fused_attention(logits, t.column_to_square(geo, h, n_mem));
        break;
      case AttentionKind::kCausal:
        weights = t.softmax_rows(logits, true);
        break;
      case AttentionKind::kPlain:
        weights = t.softmax_rows(logits, false);
        break;
    }
    if (maps) maps->push_back(weights);
    heads.push_back(t.matmul(weights, vh));
  }
  return linear(t, p, t.concat_cols(heads), prefix + ".o");
}

Var feed_forward(Tape& t, Binder& p, Var x, const std::string& prefix) {
  return linear(t, p, t.relu(linear(t, p, x, prefix + ".ff1")), prefix + ".ff2");
}

Var norm(Tape& t, Binder& p, Var x, const std::string& prefix) {
  return t.layer_norm(x, p(prefix + ".g"), p(prefix + ".b"));
}

Matrix appearance_matrix(const RegionSet& regions, const ModelConfig& cfg) {
  validate_regions(regions, cfg.d_in);
  Matrix out(static_cast<Eigen::Index>(regions.size()), static_cast<Eigen::Index>(cfg.d_in));
  for (size_t i = 0; i < regions.size(); ++i) {
    for (size_t j = 0; j < cfg.d_in; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = regions[i].appearance[j];
    }
  }
  return out;
}

Var encode(Tape& t, Binder& p, const RegionSet& regions, const ModelConfig& cfg,
           std::vector<Var>* first_layer_maps = nullptr) {
  Var x = linear(t, p, t.constant(appearance_matrix(regions, cfg)), "enc.in");
  const Var emb = t.constant(geometry_embedding(regions, cfg.geo_embed_dim));
  for (size_t i = 0; i < cfg.n_enc_layers; ++i) {
    const Var geo = t.relu(t.matmul(emb, p(layer_name("enc", i, "geo.w"))));
    const Var att = attention(t, p, cfg, layer_name("enc", i, "att"), x, x,
                              AttentionKind::kGeometric, geo, i == 0 ? first_layer_maps : nullptr);
    x = norm(t, p, t.add(x, att), layer_name("enc", i, "ln1"));
    x = norm(t, p, t.add(x, feed_forward(t, p, x, layer_name("enc", i, "ffn"))),
             layer_name("enc", i, "ln2"));
  }
  return x;
}

Matrix sinusoid_positions(size_t length, size_t d_model) {
  Matrix pe(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(d_model));
  for (size_t pos = 0; pos < length; ++pos) {
    for (size_t i = 0; i < d_model; ++i) {
      const double angle = static_cast<double>(pos) /
                           std::pow(10000.0, static_cast<double>(2 * (i / 2)) /
                                                 static_cast<double>(d_model));
      pe(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(i)) =
          i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

Var decode(Tape& t, Binder& p, Var encoded, std::span<const int> prefix, const ModelConfig& cfg) {
  if (prefix.empty()) throw Error(ErrorKind::kShapeMismatch, "decoder prefix is empty");
  if (prefix.size() > cfg.max_seq_len) {
    throw Error(ErrorKind::kShapeMismatch, "decoder prefix of length " +
                                               std::to_string(prefix.size()) + " exceeds max_seq_len " +
                                               std::to_string(cfg.max_seq_len));
  }
  for (int id : prefix) {
    if (id < 0 || static_cast<size_t>(id) >= cfg.vocab_size) {
      throw Error(ErrorKind::kShapeMismatch, "token id " + std::to_string(id) + " outside vocabulary");
    }
  }
  Var x = t.scale(t.gather_rows(p("dec.embed"), prefix),
                  std::sqrt(static_cast<double>(cfg.d_model)));
  x = t.add(x, t.constant(sinusoid_positions(prefix.size(), cfg.d_model)));
  for (size_t i = 0; i < cfg.n_dec_layers; ++i) {
    const Var self = attention(t, p, cfg, layer_name("dec", i, "self"), x, x,
                               AttentionKind::kCausal, Var{});
    x = norm(t, p, t.add(x, self), layer_name("dec", i, "ln1"));
    const Var cross = attention(t, p, cfg, layer_name("dec", i, "cross"), x, encoded,
                                AttentionKind::kPlain, Var{});
    x = norm(t, p, t.add(x, cross), layer_name("dec", i, "ln2"));
    x = norm(t, p, t.add(x, feed_forward(t, p, x, layer_name("dec", i, "ffn"))),
             layer_name("dec", i, "ln3"));
  }
  return t.matmul(x, p("dec.out.w"));
}

// Parameter shapes in declaration order.
std::vector<std::pair<std::string, std::pair<size_t, size_t>>> parameter_shapes(
    const ModelConfig& cfg) {
  std::vector<std::pair<std::string, std::pair<size_t, size_t>>> shapes;
  const size_t d = cfg.d_model;
  auto lin = [&](const std::string& prefix, size_t in, size_t out) {
    shapes.push_back({prefix + ".w", {in, out}});
    shapes.push_back({prefix + ".b", {1, out}});
  };
  auto ln = [&](const std::string& prefix) {
    shapes.push_back({prefix + ".g", {1, d}});
    shapes.push_back({prefix + ".b", {1, d}});
  };
  auto att = [&](const std::string& prefix) {
    for (const char* m : {".q", ".k", ".v", ".o"}) lin(prefix + m, d, d);
  };
  auto ffn = [&](const std::string& prefix) {
    lin(prefix + ".ff1", d, cfg.d_ff);
    lin(prefix + ".ff2", cfg.d_ff, d);
  };
  lin("enc.in", cfg.d_in, d);
  for (size_t i = 0; i < cfg.n_enc_layers; ++i) {
    att(layer_name("enc", i, "att"));
    shapes.push_back({layer_name("enc", i, "geo.w"), {4 * cfg.geo_embed_dim, cfg.n_heads}});
    ln(layer_name("enc", i, "ln1"));
    ffn(layer_name("enc", i, "ffn"));
    ln(layer_name("enc", i, "ln2"));
  }
  shapes.push_back({"dec.embed", {cfg.vocab_size, d}});
  for (size_t i = 0; i < cfg.n_dec_layers; ++i) {
    att(layer_name("dec", i, "self"));
    ln(layer_name("dec", i, "ln1"));
    att(layer_name("dec", i, "cross"));
    ln(layer_name("dec", i, "ln2"));
    ffn(layer_name("dec", i, "ffn"));
    ln(layer_name("dec", i, "ln3"));
  }
  shapes.push_back({"dec.out.w", {d, cfg.vocab_size}});
  return shapes;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config and parameters

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (d_model == 0 || n_heads == 0 || d_ff == 0 || d_in == 0) fail("model dimensions must be positive");
  if (d_model % n_heads != 0) fail("d_model must be divisible by n_heads");
  if (geo_embed_dim == 0 || geo_embed_dim % 2 != 0) fail("geo_embed_dim must be even and positive");
  if (vocab_size < static_cast<size_t>(kNumControlPieces) + 1) fail("vocab_size too small");
  if (max_seq_len < 2) fail("max_seq_len must be at least 2");
}

void ModelParams::add(std::string name, Matrix value) {
  if (!index_.emplace(name, tensors_.size()).second) {
    throw Error(ErrorKind::kInvalidArgument, "duplicate tensor '" + name + "'");
  }
  tensors_.push_back({std::move(name), std::move(value)});
}

size_t ModelParams::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kShapeMismatch, "missing tensor '" + name + "'");
  return it->second;
}

const Matrix& ModelParams::at(const std::string& name) const {
  return tensors_[index_of(name)].value;
}

Matrix& ModelParams::at(const std::string& name) { return tensors_[index_of(name)].value; }

size_t ModelParams::num_scalars() const {
  size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<size_t>(t.value.size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors_) {
    if (!t.value.allFinite()) return false;
  }
  return true;
}

ModelParams init_params(const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  ModelParams params;
  for (const auto& [name, shape] : parameter_shapes(cfg)) {
    const auto rows = static_cast<Eigen::Index>(shape.first);
    const auto cols = static_cast<Eigen::Index>(shape.second);
    Matrix m = Matrix::Zero(rows, cols);
    if (ends_with(name, ".g")) {
      m.setOnes();
    } else if (name == "dec.embed" || ends_with(name, ".w")) {
      const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    }
    params.add(name, std::move(m));
  }
  return params;
}

ModelParams constant_params(const ModelConfig& cfg, double value) {
  cfg.validate();
  ModelParams params;
  for (const auto& [name, shape] : parameter_shapes(cfg)) {
    params.add(name, Matrix::Constant(static_cast<Eigen::Index>(shape.first),
                                      static_cast<Eigen::Index>(shape.second), value));
  }
  return params;
}

size_t count_parameters(const ModelConfig& cfg) {
  size_t n = 0;
  for (const auto& [name, shape] : parameter_shapes(cfg)) n += shape.first * shape.second;
  return n;
}

// ---------------------------------------------------------------------------
// Forward passes

Matrix encoder_forward(const RegionSet& regions, const ModelParams& params, const ModelConfig& cfg) {
  Tape tape;
  Binder bind(tape, params);
  return tape.value(encode(tape, bind, regions, cfg));
}

Matrix decoder_forward(const Matrix& encoded, std::span<const int> prefix,
                       const ModelParams& params, const ModelConfig& cfg) {
  if (encoded.cols() != static_cast<Eigen::Index>(cfg.d_model)) {
    throw Error(ErrorKind::kShapeMismatch, "encoder output width differs from d_model");
  }
  Tape tape;
  Binder bind(tape, params);
  return tape.value(decode(tape, bind, tape.constant(encoded), prefix, cfg));
}

std::vector<Matrix> encoder_attention_maps(const RegionSet& regions, const ModelParams& params,
                                           const ModelConfig& cfg) {
  Tape tape;
  Binder bind(tape, params);
  std::vector<Var> maps;
  encode(tape, bind, regions, cfg, &maps);
  std::vector<Matrix> out;
  for (Var m : maps) out.push_back(tape.value(m));
  return out;
}

// ---------------------------------------------------------------------------
// Training

std::vector<int> frame_sequence(std::span<const int> ids, const ModelConfig& cfg,
                                size_t padded_length) {
  std::vector<int> seq;
  seq.reserve(ids.size() + 2);
  seq.push_back(kBosId);
  seq.insert(seq.end(), ids.begin(), ids.end());
  seq.push_back(kEosId);
  if (seq.size() - 1 > cfg.max_seq_len) {
    throw Error(ErrorKind::kShapeMismatch, "sequence of " + std::to_string(ids.size()) +
                                               " pieces does not fit max_seq_len " +
                                               std::to_string(cfg.max_seq_len));
  }
  if (padded_length > seq.size()) seq.resize(padded_length, kPadId);
  return seq;
}

LossResult batch_loss(std::span<const Example> batch, const ModelParams& params,
                      const ModelConfig& cfg, bool with_gradients) {
  LossResult result;
  for (const auto& ex : batch) {
    for (size_t i = 1; i < ex.sequence.size(); ++i) {
      if (ex.sequence[i] != kPadId) ++result.tokens;
    }
  }
  if (result.tokens == 0) {
    throw Error(ErrorKind::kInvalidArgument, "batch has no non-pad target tokens");
  }
  const auto normalizer = static_cast<double>(result.tokens);

  Tape tape;
  Binder bind(tape, params);
  Var total{};
  for (const auto& ex : batch) {
    if (ex.sequence.size() < 2) continue;
    const std::span<const int> seq(ex.sequence);
    const auto input = seq.first(seq.size() - 1);
    const auto target = seq.subspan(1);
    bool any = false;
    for (int t : target) any = any || t != kPadId;
    if (!any) continue;
    const Var enc = encode(tape, bind, ex.regions, cfg);
    const Var logits = decode(tape, bind, enc, input, cfg);
    const Matrix& z = tape.value(logits);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const int t = target[static_cast<size_t>(r)];
      if (t == kPadId) continue;
      Eigen::Index arg = 0;
      z.row(r).maxCoeff(&arg);
      if (arg == t) ++result.correct;
    }
    const Var ce = tape.cross_entropy(logits, target, kPadId, normalizer);
    total = total.index < 0 ? ce : tape.add(total, ce);
  }
  result.loss = tape.value(total)(0, 0);
  if (!std::isfinite(result.loss)) {
    throw Error(ErrorKind::kNumerical, "non-finite loss (" + std::to_string(result.loss) +
                                           ") over " + std::to_string(result.tokens) + " tokens");
  }
  if (with_gradients) {
    tape.backward(total);
    result.gradients.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      const auto& v = params.tensors()[i].value;
      result.gradients[i] = Matrix::Zero(v.rows(), v.cols());
    }
    for (const auto& [slot, grad] : tape.leaf_slots()) {
      if (grad->size() != 0) result.gradients[static_cast<size_t>(slot)] += *grad;
    }
  }
  return result;
}

StepResult train_step(std::span<const Example> batch, ModelParams& params, const ModelConfig& cfg,
                      const OptimConfig& optim, AdamState& state) {
  LossResult lr = batch_loss(batch, params, cfg, true);
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& t : params.tensors()) {
      state.m.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
      state.v.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
    }
  }
  const double rate =
      optim.learning_rate *
      std::pow(optim.lr_decay,
               static_cast<double>(state.step / static_cast<int64_t>(std::max<size_t>(optim.decay_every, 1))));
  ++state.step;
  const double c1 = 1.0 - std::pow(optim.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(optim.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    const Matrix& grad = lr.gradients[i];
    state.m[i] = optim.beta1 * state.m[i] + (1.0 - optim.beta1) * grad;
    state.v[i] = optim.beta2 * state.v[i] + (1.0 - optim.beta2) * grad.cwiseProduct(grad);
    params.tensors()[i].value.array() -=
        rate * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + optim.epsilon);
  }
  if (!params.all_finite()) throw Error(ErrorKind::kNumerical, "parameters became non-finite");
  return {lr.loss, static_cast<double>(lr.correct) / static_cast<double>(lr.tokens), rate};
}

double token_accuracy(std::span<const Example> batch, const ModelParams& params,
                      const ModelConfig& cfg) {
  const auto r = batch_loss(batch, params, cfg, false);
  return static_cast<double>(r.correct) / static_cast<double>(r.tokens);
}

double grad_check(const ModelParams& params, const ModelConfig& cfg, std::span<const Example> probe,
                  size_t n_coords, uint64_t seed) {
  constexpr double kStep = 1e-5;
  const auto analytic = batch_loss(probe, params, cfg, true).gradients;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, params.num_scalars() - 1);
  ModelParams work = params;
  double worst = 0.0;
  for (size_t c = 0; c < n_coords; ++c) {
    size_t flat = pick(rng);
    size_t t = 0;
    while (flat >= static_cast<size_t>(work.tensors()[t].value.size())) {
      flat -= static_cast<size_t>(work.tensors()[t].value.size());
      ++t;
    }
    double& x = work.tensors()[t].value.data()[flat];
    const double saved = x;
    x = saved + kStep;
    const double up = batch_loss(probe, work, cfg, false).loss;
    x = saved - kStep;
    const double down = batch_loss(probe, work, cfg, false).loss;
    x = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double exact = analytic[t].data()[flat];
    const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(exact - numeric) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'U', 'B', 'I', 'C', 'A', 'P', 'K'};

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"d_model", c.d_model},         {"n_enc_layers", c.n_enc_layers},
          {"n_dec_layers", c.n_dec_layers}, {"n_heads", c.n_heads},
          {"d_ff", c.d_ff},               {"vocab_size", c.vocab_size},
          {"max_seq_len", c.max_seq_len}, {"geo_embed_dim", c.geo_embed_dim},
          {"d_in", c.d_in}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.at("d_model").get<size_t>();
  c.n_enc_layers = j.at("n_enc_layers").get<size_t>();
  c.n_dec_layers = j.at("n_dec_layers").get<size_t>();
  c.n_heads = j.at("n_heads").get<size_t>();
  c.d_ff = j.at("d_ff").get<size_t>();
  c.vocab_size = j.at("vocab_size").get<size_t>();
  c.max_seq_len = j.at("max_seq_len").get<size_t>();
  c.geo_embed_dim = j.at("geo_embed_dim").get<size_t>();
  c.d_in = j.at("d_in").get<size_t>();
  return c;
}

void put_u64(std::ostream& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint64_t get_u64(std::istream& in) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    const int c = in.get();
    if (c == EOF) throw Error(ErrorKind::kParse, "truncated checkpoint");
    v |= static_cast<uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                     const ModelParams& params) {
  const auto expected = parameter_shapes(cfg);
  if (expected.size() != params.size()) {
    throw Error(ErrorKind::kShapeMismatch, "parameters do not match the model config");
  }
  for (size_t i = 0; i < expected.size(); ++i) {
    const auto& t = params.tensors()[i];
    if (t.name != expected[i].first ||
        static_cast<size_t>(t.value.rows()) != expected[i].second.first ||
        static_cast<size_t>(t.value.cols()) != expected[i].second.second) {
      throw Error(ErrorKind::kShapeMismatch, "tensor '" + t.name + "' does not match the model config");
    }
  }
  nlohmann::json header;
  header["format"] = "subicap-checkpoint";
  header["version"] = 1;
  header["dtype"] = "f64";
  header["config"] = config_to_json(cfg);
  header["tensors"] = nlohmann::json::array();
  for (const auto& t : params.tensors()) {
    header["tensors"].push_back({{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write checkpoint '" + path.string() + "'");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : params.tensors()) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      put_u64(out, std::bit_cast<uint64_t>(t.value.data()[i]));
    }
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read checkpoint '" + path.string() + "'");
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error(ErrorKind::kParse, "'" + path.string() + "' is not a subicap checkpoint");
  }
  const uint64_t header_len = get_u64(in);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw Error(ErrorKind::kParse, "truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("checkpoint header: ") + e.what());
  }
  const ModelConfig cfg = config_from_json(header.at("config"));
  cfg.validate();
  const auto expected = parameter_shapes(cfg);
  const auto& table = header.at("tensors");
  if (table.size() != expected.size()) {
    throw Error(ErrorKind::kShapeMismatch, "checkpoint tensor table does not match its config");
  }
  ModelParams params;
  for (size_t i = 0; i < table.size(); ++i) {
    const auto name = table[i].at("name").get<std::string>();
    const auto rows = table[i].at("rows").get<Eigen::Index>();
    const auto cols = table[i].at("cols").get<Eigen::Index>();
    if (name != expected[i].first || static_cast<size_t>(rows) != expected[i].second.first ||
        static_cast<size_t>(cols) != expected[i].second.second) {
      throw Error(ErrorKind::kShapeMismatch, "checkpoint tensor '" + name + "' does not match its config");
    }
    Matrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = std::bit_cast<double>(get_u64(in));
    params.add(name, std::move(m));
  }
  if (in.peek() != EOF) throw Error(ErrorKind::kParse, "trailing bytes after checkpoint payload");
  return {cfg, std::move(params)};
}

}  // namespace subicap

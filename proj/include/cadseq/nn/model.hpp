#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cadseq/cad/sequence.hpp"
#include "cadseq/nn/autograd.hpp"

namespace cadseq::nn {

struct ModelConfig {
  int d_model = 256;   // embedding dimension d_E
  int layers = 4;      // L encoder and decoder layers
  int heads = 4;
  int d_ff = 512;
  double dropout = 0.1;
  int seq_len = 60;    // N
  bool masked_pool = false;  // pool over non-padding positions only

  void validate() const {
    if (d_model % heads != 0)
      fail(ErrorKind::config_error, "d_model must be divisible by heads");
    if (d_model % cad::kNumParamSlots != 0)
      fail(ErrorKind::config_error, "d_model must be divisible by 16 (per-slot embeddings)");
    if (seq_len < 2 || seq_len > cad::kSeqLen)
      fail(ErrorKind::config_error, "seq_len out of range");
  }
};

template <class T>
struct ParamStore {
  std::vector<std::pair<std::string, Var<T>>> items;

  Var<T>& add(const std::string& name, Array<T> init) {
    items.emplace_back(name, Var<T>(std::move(init), /*requires=*/true));
    return items.back().second;
  }
  Var<T>& get(const std::string& name) {
    for (auto& [k, v] : items)
      if (k == name) return v;
    fail(ErrorKind::config_error, "unknown parameter " + name);
  }
  void zero_grads() {
    for (auto& [k, v] : items) v.zero_grad();
  }
};

/// Integer views of a batch of token matrices, ready for embedding lookups.
struct TokenBatch {
  int b = 0;
  int n = 0;
  std::shared_ptr<std::vector<int>> cmd_idx;    // b*n command type ids
  std::shared_ptr<std::vector<int>> param_idx;  // b*n*16, slot*257 + class
  std::shared_ptr<std::vector<int>> pos_idx;    // b*n position ids
  std::vector<int> first_eos;                   // per sequence
};

inline TokenBatch make_batch(std::span<const cad::TokenMatrix> mats, int n_model) {
  TokenBatch batch;
  batch.b = static_cast<int>(mats.size());
  batch.n = n_model;
  batch.cmd_idx = std::make_shared<std::vector<int>>();
  batch.param_idx = std::make_shared<std::vector<int>>();
  batch.pos_idx = std::make_shared<std::vector<int>>();
  for (const cad::TokenMatrix& m : mats) {
    if (m.rows < n_model)
      fail(ErrorKind::shape_mismatch, "matrix shorter than the model sequence length");
    int eos = n_model - 1;
    for (int k = 0; k < n_model; ++k)
      if (m.at(k, 0) == static_cast<int>(cad::CommandType::eos)) {
        eos = k;
        break;
      }
    // the whole logical prefix must fit
    if (m.rows > n_model)
      for (int k = n_model; k < m.rows; ++k)
        if (m.at(k, 0) != static_cast<int>(cad::CommandType::eos))
          fail(ErrorKind::shape_mismatch, "sequence does not fit the model length");
    batch.first_eos.push_back(eos);
    for (int k = 0; k < n_model; ++k) {
      batch.cmd_idx->push_back(m.at(k, 0));
      batch.pos_idx->push_back(k);
      for (int s = 0; s < cad::kNumParamSlots; ++s)
        batch.param_idx->push_back(s * cad::kParamClasses + (m.at(k, 1 + s) + 1));
    }
  }
  return batch;
}

/// Optional probe filled during forward passes (attention rows, latents).
template <class T>
struct ForwardCapture {
  std::vector<Array<T>> attention;
};

template <class T>
class ContrastCadModel {
 public:
  ContrastCadModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    init_params(seed);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<T>& params() { return params_; }

  /// Embedding + L self-attention blocks + mean pooling.
  Var<T> encode(const TokenBatch& batch, bool train, Rng* rng,
                ForwardCapture<T>* cap = nullptr) {
    const std::size_t rows = static_cast<std::size_t>(batch.b) * batch.n;
    Var<T> e_cmd = embedding(P("embed.cmd"), batch.cmd_idx);
    Var<T> e_par = reshape(embedding(P("embed.param"), batch.param_idx),
                           {rows, static_cast<std::size_t>(cfg_.d_model)});
    e_par = matmul(e_par, P("embed.mix"));
    Var<T> e_pos = embedding(P("embed.pos"), batch.pos_idx);
    Var<T> x = add(add(e_cmd, e_par), e_pos);

    for (int l = 0; l < cfg_.layers; ++l) {
      const std::string p = "enc." + std::to_string(l) + ".";
      Var<T> h = ln(x, p + "ln1");
      x = add(x, drop(self_attention(h, p + "attn.", batch.b, batch.n, cap), train, rng));
      h = ln(x, p + "ln2");
      x = add(x, drop(ffn(h, p + "ffn."), train, rng));
    }
    x = ln(x, "enc.final_ln");

    Array<T> w({rows});
    if (cfg_.masked_pool) {
      for (int bb = 0; bb < batch.b; ++bb) {
        const int count = batch.first_eos[bb] + 1;
        for (int k = 0; k < batch.n; ++k)
          w.v[static_cast<std::size_t>(bb) * batch.n + k] =
              k <= batch.first_eos[bb] ? T(1) / static_cast<T>(count) : T(0);
      }
    } else {
      for (T& x_ : w.v) x_ = T(1) / static_cast<T>(batch.n);
    }
    Var<T> z = sum_mid(scale_rows(x, constant(std::move(w))),
                       static_cast<std::size_t>(batch.b), static_cast<std::size_t>(batch.n));
    if (!z.value().finite()) fail(ErrorKind::non_finite, "encoder produced non-finite latents");
    return z;
  }

  /// Constant-query decoder attending to the single latent; returns
  /// (command logits [B*N, 6], parameter logits [B*N*16, 257]).
  std::pair<Var<T>, Var<T>> decode(const Var<T>& z, int batch_b, bool train, Rng* rng,
                                   ForwardCapture<T>* cap = nullptr) {
    if (!z.value().finite()) fail(ErrorKind::non_finite, "decoder input is non-finite");
    const int n = cfg_.seq_len;
    const std::size_t rows = static_cast<std::size_t>(batch_b) * n;
    auto qidx = std::make_shared<std::vector<int>>();
    qidx->reserve(rows);
    for (int bb = 0; bb < batch_b; ++bb)
      for (int k = 0; k < n; ++k) qidx->push_back(k);
    Var<T> x = embedding(P("dec.query"), qidx);

    for (int l = 0; l < cfg_.layers; ++l) {
      const std::string p = "dec." + std::to_string(l) + ".";
      Var<T> h = ln(x, p + "ln1");
      x = add(x, drop(self_attention(h, p + "self.", batch_b, n, cap), train, rng));
      h = ln(x, p + "ln_cross");
      x = add(x, drop(cross_attention(h, z, p + "cross.", batch_b, n, cap), train, rng));
      h = ln(x, p + "ln2");
      x = add(x, drop(ffn(h, p + "ffn."), train, rng));
    }
    x = ln(x, "dec.final_ln");

    Var<T> cmd = linear(x, "head.cmd.");
    Var<T> par = linear(x, "head.param.");
    par = reshape(par, {rows * cad::kNumParamSlots,
                        static_cast<std::size_t>(cad::kParamClasses)});
    return {cmd, par};
  }

  /// z -> z W_proj + b (the projection layer of the contrastive branch).
  Var<T> project(const Var<T>& z) { return linear(z, "proj."); }

  /// Two independently masked views of the projected latent.
  std::pair<Var<T>, Var<T>> project_and_mask(const Var<T>& z, double p, Rng& rng) {
    Var<T> zp = project(z);
    return {dropout(zp, p, rng), dropout(zp, p, rng)};
  }

 private:
  Var<T>& P(const std::string& name) { return params_.get(name); }

  Var<T> linear(const Var<T>& x, const std::string& prefix) {
    Var<T>& w = P(prefix + "w");
    Var<T>& b = P(prefix + "b");
    return add(matmul(x, w), broadcast_rows(b, x.value().dim(0)));
  }

  Var<T> ln(const Var<T>& x, const std::string& prefix) {
    return layer_norm(x, P(prefix + ".g"), P(prefix + ".b"), T(1e-5));
  }

  Var<T> drop(const Var<T>& x, bool train, Rng* rng) {
    if (!train || cfg_.dropout <= 0.0) return x;
    return dropout(x, cfg_.dropout, *rng);
  }

  Var<T> split_heads(const Var<T>& x, int b, int n) {
    const std::size_t H = static_cast<std::size_t>(cfg_.heads);
    const std::size_t dh = static_cast<std::size_t>(cfg_.d_model) / H;
    Var<T> r = reshape(x, {static_cast<std::size_t>(b), static_cast<std::size_t>(n), H, dh});
    r = transpose_12(r);
    return reshape(r, {static_cast<std::size_t>(b) * H, static_cast<std::size_t>(n), dh});
  }

  Var<T> merge_heads(const Var<T>& x, int b, int n) {
    const std::size_t H = static_cast<std::size_t>(cfg_.heads);
    const std::size_t dh = static_cast<std::size_t>(cfg_.d_model) / H;
    Var<T> r = reshape(x, {static_cast<std::size_t>(b), H, static_cast<std::size_t>(n), dh});
    r = transpose_12(r);
    return reshape(r, {static_cast<std::size_t>(b) * n, H * dh});
  }

  Var<T> attention_core(const Var<T>& q, const Var<T>& k, const Var<T>& v,
                        ForwardCapture<T>* cap) {
    const T inv_sqrt_dh =
        T(1) / std::sqrt(static_cast<T>(cfg_.d_model / cfg_.heads));
    Var<T> scores = scale(bmm_nt(q, k), inv_sqrt_dh);
    Var<T> probs = softmax_lastdim(scores);
    if (cap) cap->attention.push_back(probs.value());
    return bmm(probs, v);
  }

  Var<T> self_attention(const Var<T>& h, const std::string& p, int b, int n,
                        ForwardCapture<T>* cap) {
    Var<T> q = split_heads(linear(h, p + "q."), b, n);
    Var<T> k = split_heads(linear(h, p + "k."), b, n);
    Var<T> v = split_heads(linear(h, p + "v."), b, n);
    Var<T> ctx = merge_heads(attention_core(q, k, v, cap), b, n);
    return linear(ctx, p + "o.");
  }

  Var<T> cross_attention(const Var<T>& h, const Var<T>& z, const std::string& p, int b,
                         int n, ForwardCapture<T>* cap) {
    Var<T> q = split_heads(linear(h, p + "q."), b, n);
    Var<T> k = split_heads(linear(z, p + "k."), b, 1);
    Var<T> v = split_heads(linear(z, p + "v."), b, 1);
    Var<T> ctx = merge_heads(attention_core(q, k, v, cap), b, n);
    return linear(ctx, p + "o.");
  }

  Var<T> ffn(const Var<T>& h, const std::string& p) {
    return linear(gelu(linear(h, p + "1.")), p + "2.");
  }

  void add_linear(Rng& rng, const std::string& prefix, int in, int out) {
    Array<T> w({static_cast<std::size_t>(in), static_cast<std::size_t>(out)});
    const double limit = std::sqrt(6.0 / (in + out));
    for (T& x : w.v) x = static_cast<T>(rng.uniform(-limit, limit));
    params_.add(prefix + "w", std::move(w));
    params_.add(prefix + "b", Array<T>({static_cast<std::size_t>(out)}));
  }

  void add_table(Rng& rng, const std::string& name, int rows, int cols) {
    Array<T> t({static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)});
    for (T& x : t.v) x = static_cast<T>(rng.uniform(-0.02, 0.02));
    params_.add(name, std::move(t));
  }

  void add_ln(const std::string& prefix, int d) {
    Array<T> g({static_cast<std::size_t>(d)});
    for (T& x : g.v) x = T(1);
    params_.add(prefix + ".g", std::move(g));
    params_.add(prefix + ".b", Array<T>({static_cast<std::size_t>(d)}));
  }

  void add_attention(Rng& rng, const std::string& p, int d) {
    add_linear(rng, p + "q.", d, d);
    add_linear(rng, p + "k.", d, d);
    add_linear(rng, p + "v.", d, d);
    add_linear(rng, p + "o.", d, d);
  }

  void init_params(std::uint64_t seed) {
    Rng rng(seed);
    const int d = cfg_.d_model;
    add_table(rng, "embed.cmd", cad::kNumCommandTypes, d);
    add_table(rng, "embed.param", cad::kNumParamSlots * cad::kParamClasses,
              d / cad::kNumParamSlots);
    {
      Array<T> mix({static_cast<std::size_t>(d), static_cast<std::size_t>(d)});
      const double limit = std::sqrt(6.0 / (d + d));
      for (T& x : mix.v) x = static_cast<T>(rng.uniform(-limit, limit));
      params_.add("embed.mix", std::move(mix));
    }
    add_table(rng, "embed.pos", cfg_.seq_len, d);

    for (int l = 0; l < cfg_.layers; ++l) {
      const std::string p = "enc." + std::to_string(l) + ".";
      add_ln(p + "ln1", d);
      add_attention(rng, p + "attn.", d);
      add_ln(p + "ln2", d);
      add_linear(rng, p + "ffn.1.", d, cfg_.d_ff);
      add_linear(rng, p + "ffn.2.", cfg_.d_ff, d);
    }
    add_ln("enc.final_ln", d);

    add_table(rng, "dec.query", cfg_.seq_len, d);
    for (int l = 0; l < cfg_.layers; ++l) {
      const std::string p = "dec." + std::to_string(l) + ".";
      add_ln(p + "ln1", d);
      add_attention(rng, p + "self.", d);
      add_ln(p + "ln_cross", d);
      add_attention(rng, p + "cross.", d);
      add_ln(p + "ln2", d);
      add_linear(rng, p + "ffn.1.", d, cfg_.d_ff);
      add_linear(rng, p + "ffn.2.", cfg_.d_ff, d);
    }
    add_ln("dec.final_ln", d);

    add_linear(rng, "head.cmd.", d, cad::kNumCommandTypes);
    add_linear(rng, "head.param.", d, cad::kNumParamSlots * cad::kParamClasses);
    add_linear(rng, "proj.", d, d);
  }

  ModelConfig cfg_;
  ParamStore<T> params_;
};

}  // namespace cadseq::nn

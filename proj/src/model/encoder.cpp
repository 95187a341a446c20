#include "miniens/model/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "miniens/error.hpp"

namespace miniens::model {

using tensor::NamedParam;
using tensor::Tensor;

namespace {
constexpr double kInitStd = 0.02;
constexpr double kMaskBias = -1e9;
}  // namespace

Language parse_language(std::string_view name) {
    if (name == "ar") return Language::ar;
    if (name == "en") return Language::en;
    throw UnknownLanguage("expected 'ar' or 'en', got '" + std::string(name) + "'");
}

std::string_view language_name(Language lang) {
    return lang == Language::ar ? "ar" : "en";
}

EncoderConfig EncoderConfig::named(std::string_view name) {
    const auto& names = known_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::string all;
        for (const auto& n : names) all += n + " ";
        throw InvalidArgument("unknown encoder '" + std::string(name) + "', known: " + all);
    }
    EncoderConfig cfg;
    cfg.name = std::string(name);
    return cfg;
}

const std::vector<std::string>& EncoderConfig::known_names() {
    static const std::vector<std::string> kNames{"mini-arabert", "mini-roberta", "mini-mbert",
                                                 "mini-xlmr"};
    return kNames;
}

void EncoderConfig::validate() const {
    if (d_model <= 0 || n_heads <= 0 || n_layers <= 0 || d_ff <= 0 || vocab_size <= 0 ||
        max_positions <= 0) {
        throw InvalidArgument("encoder config for '" + name + "' has non-positive dimension");
    }
    if (d_model % n_heads != 0) {
        throw InvalidArgument("d_model " + std::to_string(d_model) + " not divisible by n_heads " +
                              std::to_string(n_heads));
    }
    if (dropout_p < 0.0 || dropout_p >= 1.0) {
        throw InvalidArgument("dropout_p must be in [0,1)");
    }
}

std::int64_t EncoderConfig::param_count() const {
    const std::int64_t d = d_model, v = vocab_size, p = max_positions, f = d_ff, l = n_layers;
    const std::int64_t attn = 4 * (d * d + d);
    const std::int64_t ffn = d * f + f + f * d + d;
    const std::int64_t norms = 4 * d;  // two layer norms per block
    return v * d + p * d + 2 * d + l * (attn + ffn + norms) + (d * d + d);
}

TokenBatch TokenBatch::from_rows(std::span<const bpe::TokenizedInput> rows) {
    TokenBatch b;
    if (rows.empty()) return b;
    b.batch = static_cast<int>(rows.size());
    b.seq_len = static_cast<int>(rows.front().input_ids.size());
    b.vocab_tag = rows.front().vocab_tag;
    b.ids.reserve(rows.size() * rows.front().input_ids.size());
    b.mask.reserve(b.ids.capacity());
    for (const auto& r : rows) {
        if (static_cast<int>(r.input_ids.size()) != b.seq_len || r.vocab_tag != b.vocab_tag) {
            throw VocabMismatch("token rows disagree on length or vocabulary");
        }
        b.ids.insert(b.ids.end(), r.input_ids.begin(), r.input_ids.end());
        b.mask.insert(b.mask.end(), r.attention_mask.begin(), r.attention_mask.end());
    }
    return b;
}

Linear::Linear(int in, int out, Rng& rng, double init_std)
    : weight(Tensor::randn({in, out}, rng, init_std)), bias(Tensor::zeros({out})) {
    weight.set_requires_grad(true);
    bias.set_requires_grad(true);
}

Tensor Linear::forward(const Tensor& x) const { return add(matmul(x, weight), bias); }

void Linear::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
    out.push_back({prefix + ".weight", weight});
    out.push_back({prefix + ".bias", bias});
}

MhaLayer::MhaLayer(int d_model, int n_heads, Rng& rng, double init_std)
    : q_(d_model, d_model, rng, init_std),
      k_(d_model, d_model, rng, init_std),
      v_(d_model, d_model, rng, init_std),
      o_(d_model, d_model, rng, init_std),
      n_heads_(n_heads) {}

Tensor MhaLayer::split_heads(const Tensor& x) const {
    const int b = x.dim(0), s = x.dim(1), d = x.dim(2);
    return swap_axes(reshape(x, {b, s, n_heads_, d / n_heads_}), 1, 2);
}

Tensor MhaLayer::attention_weights(const Tensor& query, const Tensor& key,
                                   const std::vector<int>& key_mask) const {
    const int b = query.dim(0), sq = query.dim(1), d = query.dim(2);
    const int sk = key.dim(1);
    const int dh = d / n_heads_;
    Tensor qh = split_heads(q_.forward(query));  // [b, h, sq, dh]
    Tensor kh = split_heads(k_.forward(key));    // [b, h, sk, dh]
    Tensor scores = scale(matmul(qh, swap_axes(kh, 2, 3)), 1.0 / std::sqrt(double(dh)));
    if (!key_mask.empty()) {
        if (static_cast<int>(key_mask.size()) != b * sk) {
            throw ShapeMismatch("key_mask length " + std::to_string(key_mask.size()) +
                                " != batch*seq " + std::to_string(b * sk));
        }
        Tensor bias = Tensor::zeros({b, n_heads_, sq, sk});
        auto bv = bias.mutable_data();
        for (int bb = 0; bb < b; ++bb) {
            for (int h = 0; h < n_heads_; ++h) {
                for (int i = 0; i < sq; ++i) {
                    for (int j = 0; j < sk; ++j) {
                        if (key_mask[static_cast<std::size_t>(bb * sk + j)] == 0) {
                            bv[static_cast<std::size_t>(((bb * n_heads_ + h) * sq + i) * sk + j)] =
                                kMaskBias;
                        }
                    }
                }
            }
        }
        scores = add(scores, bias);
    }
    return softmax(scores, -1);
}

Tensor MhaLayer::forward(const Tensor& query, const Tensor& key, const Tensor& value,
                         const std::vector<int>& key_mask) const {
    const int b = query.dim(0), sq = query.dim(1), d = query.dim(2);
    Tensor attn = attention_weights(query, key, key_mask);
    Tensor vh = split_heads(v_.forward(value));
    Tensor ctx = matmul(attn, vh);  // [b, h, sq, dh]
    ctx = reshape(swap_axes(ctx, 1, 2), {b, sq, d});
    return o_.forward(ctx);
}

void MhaLayer::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
    q_.collect(prefix + ".q", out);
    k_.collect(prefix + ".k", out);
    v_.collect(prefix + ".v", out);
    o_.collect(prefix + ".o", out);
}

void MhaLayer::set_passthrough() {
    const int d = q_.weight.dim(0);
    for (auto t : {&q_, &k_, &v_, &o_}) {
        auto w = t->weight.mutable_data();
        std::fill(w.begin(), w.end(), 0.0);
        auto bb = t->bias.mutable_data();
        std::fill(bb.begin(), bb.end(), 0.0);
    }
    for (int i = 0; i < d; ++i) {
        v_.weight.mutable_data()[static_cast<std::size_t>(i * d + i)] = 1.0;
        o_.weight.mutable_data()[static_cast<std::size_t>(i * d + i)] = 1.0;
    }
}

Encoder::Encoder(EncoderConfig cfg, std::uint64_t vocab_tag, Rng& rng)
    : cfg_(std::move(cfg)), vocab_tag_(vocab_tag) {
    cfg_.validate();
    tok_emb_ = Tensor::randn({cfg_.vocab_size, cfg_.d_model}, rng, kInitStd);
    pos_emb_ = Tensor::randn({cfg_.max_positions, cfg_.d_model}, rng, kInitStd);
    emb_ln_gain_ = Tensor::full({cfg_.d_model}, 1.0);
    emb_ln_bias_ = Tensor::zeros({cfg_.d_model});
    for (auto t : {&tok_emb_, &pos_emb_, &emb_ln_gain_, &emb_ln_bias_}) t->set_requires_grad(true);

    blocks_.reserve(static_cast<std::size_t>(cfg_.n_layers));
    for (int l = 0; l < cfg_.n_layers; ++l) {
        Block blk;
        blk.ln1_gain = Tensor::full({cfg_.d_model}, 1.0).set_requires_grad(true);
        blk.ln1_bias = Tensor::zeros({cfg_.d_model}).set_requires_grad(true);
        blk.attn = MhaLayer(cfg_.d_model, cfg_.n_heads, rng, kInitStd);
        blk.ln2_gain = Tensor::full({cfg_.d_model}, 1.0).set_requires_grad(true);
        blk.ln2_bias = Tensor::zeros({cfg_.d_model}).set_requires_grad(true);
        blk.ff1 = Linear(cfg_.d_model, cfg_.d_ff, rng, kInitStd);
        blk.ff2 = Linear(cfg_.d_ff, cfg_.d_model, rng, kInitStd);
        blocks_.push_back(std::move(blk));
    }
    pooler_ = Linear(cfg_.d_model, cfg_.d_model, rng, kInitStd);
}

void Encoder::check_batch(const TokenBatch& tokens) const {
    if (tokens.vocab_tag != vocab_tag_) {
        throw VocabMismatch("batch tokenized with a different vocabulary than encoder '" +
                            cfg_.name + "'");
    }
    if (tokens.seq_len > cfg_.max_positions) {
        throw ShapeMismatch("sequence length " + std::to_string(tokens.seq_len) +
                            " exceeds max_positions " + std::to_string(cfg_.max_positions));
    }
    if (tokens.batch <= 0) throw ShapeMismatch("empty batch");
}

Tensor Encoder::embed(const TokenBatch& tokens, RunMode mode) const {
    check_batch(tokens);
    Tensor x = embedding_lookup(tok_emb_, tokens.ids, tokens.batch, tokens.seq_len);
    x = add(x, slice(pos_emb_, 0, 0, tokens.seq_len));
    x = layer_norm(x, emb_ln_gain_, emb_ln_bias_);
    if (mode.training && cfg_.dropout_p > 0.0) {
        if (mode.rng == nullptr) throw InvalidArgument("training mode needs an rng for dropout");
        x = dropout(x, cfg_.dropout_p, true, *mode.rng);
    }
    return x;
}

EncoderOutput Encoder::forward(const TokenBatch& tokens, RunMode mode) const {
    Tensor x = embed(tokens, mode);
    const bool drop = mode.training && cfg_.dropout_p > 0.0;
    for (const auto& blk : blocks_) {
        Tensor h = layer_norm(x, blk.ln1_gain, blk.ln1_bias);
        Tensor a = blk.attn.forward(h, h, h, tokens.mask);
        if (drop) a = dropout(a, cfg_.dropout_p, true, *mode.rng);
        x = add(x, a);
        Tensor h2 = layer_norm(x, blk.ln2_gain, blk.ln2_bias);
        Tensor f = blk.ff2.forward(gelu(blk.ff1.forward(h2)));
        if (drop) f = dropout(f, cfg_.dropout_p, true, *mode.rng);
        x = add(x, f);
    }
    Tensor cls = reshape(slice(x, 1, 0, 1), {tokens.batch, cfg_.d_model});
    Tensor pooled = tensor::tanh(pooler_.forward(cls));
    return EncoderOutput{std::move(x), std::move(pooled)};
}

void Encoder::collect_params(const std::string& prefix, std::vector<NamedParam>& out) const {
    out.push_back({prefix + "tok_emb", tok_emb_});
    out.push_back({prefix + "pos_emb", pos_emb_});
    out.push_back({prefix + "emb_ln.gain", emb_ln_gain_});
    out.push_back({prefix + "emb_ln.bias", emb_ln_bias_});
    for (std::size_t l = 0; l < blocks_.size(); ++l) {
        const std::string lp = prefix + "layer" + std::to_string(l);
        const auto& blk = blocks_[l];
        out.push_back({lp + ".ln1.gain", blk.ln1_gain});
        out.push_back({lp + ".ln1.bias", blk.ln1_bias});
        blk.attn.collect(lp + ".attn", out);
        out.push_back({lp + ".ln2.gain", blk.ln2_gain});
        out.push_back({lp + ".ln2.bias", blk.ln2_bias});
        blk.ff1.collect(lp + ".ff1", out);
        blk.ff2.collect(lp + ".ff2", out);
    }
    pooler_.collect(prefix + "pooler", out);
}

std::vector<NamedParam> Encoder::parameters() const {
    std::vector<NamedParam> out;
    collect_params("", out);
    return out;
}

EncoderClassifier::EncoderClassifier(EncoderConfig cfg, std::uint64_t vocab_tag, Rng& rng)
    : encoder_(std::move(cfg), vocab_tag, rng), head_(encoder_.config().d_model, 3, rng, kInitStd) {}

Tensor EncoderClassifier::logits(const TokenBatch& tokens, RunMode mode) const {
    return head_.forward(encoder_.forward(tokens, mode).pooler_output);
}

std::vector<NamedParam> EncoderClassifier::parameters() const {
    std::vector<NamedParam> out;
    encoder_.collect_params("encoder.", out);
    head_.collect("head", out);
    return out;
}

}  // namespace miniens::model

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "miniens/bpe/bpe.hpp"
#include "miniens/rng.hpp"
#include "miniens/tensor/checkpoint.hpp"
#include "miniens/tensor/tensor.hpp"

namespace miniens::model {

enum class Language { ar, en };

Language parse_language(std::string_view name);  // "ar" | "en", else UnknownLanguage
std::string_view language_name(Language lang);

// Desk-scale encoder configurations. The four names stand in for the four
// pretrained checkpoints of the original setting; all share the same small
// geometry and differ in the tokenizer they get bound to.
struct EncoderConfig {
    std::string name;
    int vocab_size = 2048;
    int d_model = 64;
    int n_heads = 4;
    int n_layers = 2;
    int d_ff = 128;
    int max_positions = 256;
    double dropout_p = 0.1;

    static EncoderConfig named(std::string_view name);
    static const std::vector<std::string>& known_names();

    void validate() const;
    std::int64_t param_count() const;  // analytic, used to guard wiring bugs
};

// Dense [batch, seq] id/mask pair, all rows from one vocabulary.
struct TokenBatch {
    int batch = 0;
    int seq_len = 0;
    std::vector<int> ids;
    std::vector<int> mask;
    std::uint64_t vocab_tag = 0;

    static TokenBatch from_rows(std::span<const bpe::TokenizedInput> rows);
};

struct RunMode {
    bool training = false;
    Rng* rng = nullptr;  // consumed by dropout when training
};

struct Linear {
    tensor::Tensor weight;  // [in, out]
    tensor::Tensor bias;    // [out]

    Linear() = default;
    Linear(int in, int out, Rng& rng, double init_std);
    tensor::Tensor forward(const tensor::Tensor& x) const;
    void collect(const std::string& prefix, std::vector<tensor::NamedParam>& out) const;
};

// Scaled dot-product attention over n_heads subspaces. key_mask is a flat
// [batch, seq_k] 0/1 vector; masked key positions get a -1e9 score bias.
// An empty mask means all positions are real.
class MhaLayer {
public:
    MhaLayer() = default;
    MhaLayer(int d_model, int n_heads, Rng& rng, double init_std);

    tensor::Tensor forward(const tensor::Tensor& query, const tensor::Tensor& key,
                           const tensor::Tensor& value, const std::vector<int>& key_mask) const;
    // Post-softmax weights [batch, heads, seq_q, seq_k]; forward() consumes these.
    tensor::Tensor attention_weights(const tensor::Tensor& query, const tensor::Tensor& key,
                                     const std::vector<int>& key_mask) const;

    int n_heads() const { return n_heads_; }
    void collect(const std::string& prefix, std::vector<tensor::NamedParam>& out) const;

    // Test hook: uniform attention with identity value/output paths, so the
    // layer reduces to averaging the value tokens.
    void set_passthrough();

private:
    Linear q_, k_, v_, o_;
    int n_heads_ = 1;

    tensor::Tensor split_heads(const tensor::Tensor& x) const;
};

struct EncoderOutput {
    tensor::Tensor sequence_output;  // [batch, seq, d_model]
    tensor::Tensor pooler_output;    // [batch, d_model], tanh range
};

// Pre-norm transformer encoder with learned positional embeddings and a
// tanh pooler over the CLS position.
class Encoder {
public:
    Encoder(EncoderConfig cfg, std::uint64_t vocab_tag, Rng& rng);

    // Token + positional embeddings, layer_norm, dropout.
    tensor::Tensor embed(const TokenBatch& tokens, RunMode mode = {}) const;
    EncoderOutput forward(const TokenBatch& tokens, RunMode mode = {}) const;

    const EncoderConfig& config() const { return cfg_; }
    std::uint64_t vocab_tag() const { return vocab_tag_; }

    void collect_params(const std::string& prefix, std::vector<tensor::NamedParam>& out) const;
    std::vector<tensor::NamedParam> parameters() const;

private:
    struct Block {
        tensor::Tensor ln1_gain, ln1_bias, ln2_gain, ln2_bias;
        MhaLayer attn;
        Linear ff1, ff2;
    };

    EncoderConfig cfg_;
    std::uint64_t vocab_tag_ = 0;
    tensor::Tensor tok_emb_, pos_emb_, emb_ln_gain_, emb_ln_bias_;
    std::vector<Block> blocks_;
    Linear pooler_;

    void check_batch(const TokenBatch& tokens) const;
};

// Encoder plus a linear 3-class head on the pooler output (the single-model
// fine-tuning path).
class EncoderClassifier {
public:
    EncoderClassifier(EncoderConfig cfg, std::uint64_t vocab_tag, Rng& rng);

    tensor::Tensor logits(const TokenBatch& tokens, RunMode mode = {}) const;
    const Encoder& encoder() const { return encoder_; }

    std::vector<tensor::NamedParam> parameters() const;

private:
    Encoder encoder_;
    Linear head_;
};

}  // namespace miniens::model

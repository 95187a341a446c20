#pragma once

#include <array>
#include <optional>
#include <vector>

#include "miniens/model/encoder.hpp"

namespace miniens::model {

// Class index convention everywhere: 0 = Positive, 1 = Negative, 2 = Neutral.
inline constexpr int kNumClasses = 3;

struct Prediction {
    std::array<double, kNumClasses> probs;  // softmax output, sums to 1
    int label = 0;                          // argmax of probs
    Language language = Language::en;
};

struct EnsembleConfig {
    EncoderConfig arabic;   // routed to for Language::ar
    EncoderConfig english;  // routed to for Language::en
    EncoderConfig shared;   // always consulted
    int d_fusion = 64;
    int head_hidden = 64;
    bool use_mha = false;  // true: variant A (MHA between fusion and head)
    int mha_heads = 4;
    double dropout_p = 0.1;

    static EnsembleConfig desk_default(bool use_mha);
    void validate() const;
};

// Dual-encoder ensemble: a language-routed encoder plus the shared encoder,
// pooler outputs concatenated into a fusion layer, then a two-layer head
// over softmax. Variant A re-exposes the fused vector as a 2-token sequence
// [lang half; shared half] and self-attends it before the head; the head
// then reads the mean of the two attended tokens.
class Ensemble {
public:
    Ensemble(EnsembleConfig cfg, std::uint64_t tag_ar, std::uint64_t tag_en,
             std::uint64_t tag_shared, Rng& rng);

    const Encoder& route(Language lang) const;
    const Encoder& shared_encoder() const { return shared_; }

    // concat(pooler_lang, pooler_shared) -> linear -> gelu, width d_fusion.
    tensor::Tensor fuse(const tensor::Tensor& pooler_lang,
                        const tensor::Tensor& pooler_shared) const;

    // Everything up to (but excluding) the classification head.
    tensor::Tensor head_input(Language lang, const TokenBatch& lang_tokens,
                              const TokenBatch& shared_tokens, RunMode mode = {}) const;
    tensor::Tensor logits(Language lang, const TokenBatch& lang_tokens,
                          const TokenBatch& shared_tokens, RunMode mode = {}) const;
    std::vector<Prediction> predict(Language lang, const TokenBatch& lang_tokens,
                                    const TokenBatch& shared_tokens) const;

    const EnsembleConfig& config() const { return cfg_; }
    std::vector<tensor::NamedParam> parameters() const;

    MhaLayer* mha() { return mha_ ? &*mha_ : nullptr; }  // present only in variant A

private:
    EnsembleConfig cfg_;
    Encoder arabic_, english_, shared_;
    Linear fusion_;
    std::optional<MhaLayer> mha_;
    Linear head1_, head2_;
};

std::vector<Prediction> predictions_from_logits(const tensor::Tensor& logits, Language lang);

// Modal label over one example's predictions. Ties are broken by the larger
// summed probability among the tied classes, then by the lower class index.
int majority_vote(const std::vector<Prediction>& predictions);

}  // namespace miniens::model

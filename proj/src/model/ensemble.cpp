#include "miniens/model/ensemble.hpp"

#include <cmath>

#include "miniens/error.hpp"

namespace miniens::model {

using tensor::NamedParam;
using tensor::Tensor;

namespace {
constexpr double kInitStd = 0.02;
}

EnsembleConfig EnsembleConfig::desk_default(bool use_mha) {
    EnsembleConfig cfg;
    cfg.arabic = EncoderConfig::named("mini-arabert");
    cfg.english = EncoderConfig::named("mini-roberta");
    cfg.shared = EncoderConfig::named("mini-mbert");
    cfg.use_mha = use_mha;
    return cfg;
}

void EnsembleConfig::validate() const {
    arabic.validate();
    english.validate();
    shared.validate();
    if (d_fusion <= 0 || head_hidden <= 0) {
        throw InvalidArgument("ensemble fusion/head widths must be positive");
    }
    if (use_mha) {
        if (d_fusion % 2 != 0) {
            throw InvalidArgument("variant A needs an even d_fusion, got " +
                                  std::to_string(d_fusion));
        }
        if ((d_fusion / 2) % mha_heads != 0) {
            throw InvalidArgument("variant A token width " + std::to_string(d_fusion / 2) +
                                  " not divisible by mha_heads " + std::to_string(mha_heads));
        }
    }
}

Ensemble::Ensemble(EnsembleConfig cfg, std::uint64_t tag_ar, std::uint64_t tag_en,
                   std::uint64_t tag_shared, Rng& rng)
    : cfg_(std::move(cfg)),
      arabic_(cfg_.arabic, tag_ar, rng),
      english_(cfg_.english, tag_en, rng),
      shared_(cfg_.shared, tag_shared, rng),
      fusion_(cfg_.arabic.d_model + cfg_.shared.d_model, cfg_.d_fusion, rng, kInitStd) {
    cfg_.validate();
    if (cfg_.arabic.d_model != cfg_.english.d_model) {
        throw InvalidArgument("language encoders must share d_model so either can feed the fusion");
    }
    if (cfg_.use_mha) {
        mha_.emplace(cfg_.d_fusion / 2, cfg_.mha_heads, rng, kInitStd);
    }
    const int head_in = cfg_.use_mha ? cfg_.d_fusion / 2 : cfg_.d_fusion;
    head1_ = Linear(head_in, cfg_.head_hidden, rng, kInitStd);
    head2_ = Linear(cfg_.head_hidden, kNumClasses, rng, kInitStd);
}

const Encoder& Ensemble::route(Language lang) const {
    return lang == Language::ar ? arabic_ : english_;
}

Tensor Ensemble::fuse(const Tensor& pooler_lang, const Tensor& pooler_shared) const {
    if (pooler_lang.ndim() != 2 || pooler_shared.ndim() != 2 ||
        pooler_lang.dim(0) != pooler_shared.dim(0)) {
        throw ShapeMismatch("fuse: pooler batches differ, " + tensor::shape_str(pooler_lang.shape()) +
                            " vs " + tensor::shape_str(pooler_shared.shape()));
    }
    return gelu(fusion_.forward(concat_last_dim(pooler_lang, pooler_shared)));
}

Tensor Ensemble::head_input(Language lang, const TokenBatch& lang_tokens,
                            const TokenBatch& shared_tokens, RunMode mode) const {
    const Encoder& lang_enc = route(lang);
    Tensor pooler_lang = lang_enc.forward(lang_tokens, mode).pooler_output;
    Tensor pooler_shared = shared_.forward(shared_tokens, mode).pooler_output;
    Tensor fused = fuse(pooler_lang, pooler_shared);
    if (!cfg_.use_mha) return fused;

    // Variant A: view the fused vector as a [lang half; shared half] pair of
    // tokens, self-attend them, and hand the head their mean.
    const int batch = fused.dim(0);
    Tensor pair = reshape(fused, {batch, 2, cfg_.d_fusion / 2});
    Tensor attended = mha_->forward(pair, pair, pair, {});
    return mean_axis(attended, 1);
}

Tensor Ensemble::logits(Language lang, const TokenBatch& lang_tokens,
                        const TokenBatch& shared_tokens, RunMode mode) const {
    Tensor h = gelu(head1_.forward(head_input(lang, lang_tokens, shared_tokens, mode)));
    if (mode.training && cfg_.dropout_p > 0.0) {
        if (mode.rng == nullptr) throw InvalidArgument("training mode needs an rng for dropout");
        h = dropout(h, cfg_.dropout_p, true, *mode.rng);
    }
    return head2_.forward(h);
}

std::vector<Prediction> Ensemble::predict(Language lang, const TokenBatch& lang_tokens,
                                          const TokenBatch& shared_tokens) const {
    return predictions_from_logits(logits(lang, lang_tokens, shared_tokens), lang);
}

std::vector<NamedParam> Ensemble::parameters() const {
    std::vector<NamedParam> out;
    arabic_.collect_params("arabic.", out);
    english_.collect_params("english.", out);
    shared_.collect_params("shared.", out);
    fusion_.collect("fusion", out);
    if (mha_) mha_->collect("mha", out);
    head1_.collect("head1", out);
    head2_.collect("head2", out);
    return out;
}

std::vector<Prediction> predictions_from_logits(const Tensor& logits, Language lang) {
    if (logits.ndim() != 2 || logits.dim(1) != kNumClasses) {
        throw ShapeMismatch("predictions need [batch,3] logits, got " +
                            tensor::shape_str(logits.shape()));
    }
    Tensor probs = softmax(logits, -1);
    std::vector<Prediction> out;
    out.reserve(static_cast<std::size_t>(probs.dim(0)));
    for (int b = 0; b < probs.dim(0); ++b) {
        Prediction p;
        p.language = lang;
        int best = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            p.probs[static_cast<std::size_t>(c)] =
                probs.data()[static_cast<std::size_t>(b * kNumClasses + c)];
            if (p.probs[static_cast<std::size_t>(c)] > p.probs[static_cast<std::size_t>(best)]) {
                best = c;
            }
        }
        p.label = best;
        out.push_back(p);
    }
    return out;
}

int majority_vote(const std::vector<Prediction>& predictions) {
    if (predictions.empty()) {
        throw EmptyPredictionList("majority_vote needs at least one prediction");
    }
    std::array<int, kNumClasses> votes{};
    std::array<double, kNumClasses> prob_sums{};
    for (const auto& p : predictions) {
        if (p.label < 0 || p.label >= kNumClasses) {
            throw InvalidArgument("prediction label " + std::to_string(p.label) + " out of range");
        }
        votes[static_cast<std::size_t>(p.label)] += 1;
        for (int c = 0; c < kNumClasses; ++c) {
            prob_sums[static_cast<std::size_t>(c)] += p.probs[static_cast<std::size_t>(c)];
        }
    }
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const auto bb = static_cast<std::size_t>(best);
        if (votes[cc] > votes[bb] ||
            (votes[cc] == votes[bb] && prob_sums[cc] > prob_sums[bb])) {
            best = c;
        }
    }
    return best;
}

}  // namespace miniens::model

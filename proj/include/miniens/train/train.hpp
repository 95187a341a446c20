#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "miniens/bpe/bpe.hpp"
#include "miniens/data/dataset.hpp"
#include "miniens/metrics/metrics.hpp"
#include "miniens/model/encoder.hpp"
#include "miniens/model/ensemble.hpp"
#include "miniens/tensor/adam.hpp"

namespace miniens::train {

enum class LossKind { bce_logits, cross_entropy };

LossKind parse_loss(std::string_view name);  // "bce_logits" | "cross_entropy"
std::string_view loss_name(LossKind kind);

// One experiment run. Each setup carries its stock hyperparameters:
//   setup 1: bce_logits loss, batch 16, 3 epochs (per-language single models)
//   setup 2: cross_entropy, batch 24, 2 epochs (ensemble, merged data)
//   setup 3: cross_entropy, batch 24, 2 epochs (ensemble, one language)
// lr defaults to 2e-5 and max_seq_len to 256 everywhere. Epochs, lr,
// max_seq_len, batch_size and vocab_size stay overridable so fixtures train
// in seconds; validate() hard-rejects only a loss/setup mismatch.
struct ExperimentConfig {
    int setup = 1;
    std::string model = "mini-mbert";
    LossKind loss = LossKind::bce_logits;
    double lr = 2e-5;
    int batch_size = 16;
    int epochs = 3;
    int max_seq_len = 256;
    std::uint64_t seed = 42;
    int vocab_size = 2048;
    double dropout_p = 0.1;

    static ExperimentConfig for_setup(int setup);
    void validate() const;
};

struct EvalMetrics {
    double loss = 0.0;
    metrics::MetricsReport report;
};

struct TrainLogEntry {
    int epoch = 0;
    double train_loss = 0.0;
    EvalMetrics dev_all;
    std::optional<EvalMetrics> dev_ar;  // present for bilingual dev sets
    std::optional<EvalMetrics> dev_en;
    double wall_seconds = 0.0;  // not serialized
};

struct TrainLog {
    std::vector<TrainLogEntry> entries;
};

// TSV: epoch scope train_loss dev_loss acc w_prec w_rec macro_f1, one row
// per (epoch, scope), scope in {all, ar, en}.
std::string trainlog_tsv(const TrainLog& log);

// A monolingual mini-batch, already tokenized.
struct EncodedBatch {
    model::TokenBatch primary;                  // routed/only encoder's tokens
    std::optional<model::TokenBatch> shared;    // ensembles: shared encoder's tokens
    model::Language language = model::Language::en;
    std::vector<int> labels;
};

// What the fit loop needs from a model: tokenize a batch, produce logits.
class SentimentModel {
public:
    virtual ~SentimentModel() = default;

    virtual EncodedBatch encode_batch(const std::vector<const data::Example*>& examples) const = 0;
    virtual tensor::Tensor logits(const EncodedBatch& batch, model::RunMode mode) const = 0;
    virtual std::vector<tensor::NamedParam> parameters() const = 0;
};

// Single encoder + linear head, one tokenizer (the setup-1 path).
class SingleModelRunner : public SentimentModel {
public:
    SingleModelRunner(model::EncoderConfig cfg, bpe::BpeVocab vocab, int max_seq_len, Rng& rng);

    EncodedBatch encode_batch(const std::vector<const data::Example*>& examples) const override;
    tensor::Tensor logits(const EncodedBatch& batch, model::RunMode mode) const override;
    std::vector<tensor::NamedParam> parameters() const override;

    const model::EncoderClassifier& classifier() const { return clf_; }
    const bpe::BpeVocab& vocab() const { return vocab_; }

private:
    bpe::BpeVocab vocab_;
    model::EncoderClassifier clf_;
    int max_seq_len_;
};

// Dual-encoder ensemble with three tokenizers (setups 2 and 3).
class EnsembleRunner : public SentimentModel {
public:
    EnsembleRunner(model::EnsembleConfig cfg, bpe::BpeVocab vocab_ar, bpe::BpeVocab vocab_en,
                   bpe::BpeVocab vocab_shared, int max_seq_len, Rng& rng);

    EncodedBatch encode_batch(const std::vector<const data::Example*>& examples) const override;
    tensor::Tensor logits(const EncodedBatch& batch, model::RunMode mode) const override;
    std::vector<tensor::NamedParam> parameters() const override;

    const model::Ensemble& ensemble() const { return ensemble_; }
    model::Ensemble& ensemble() { return ensemble_; }

private:
    bpe::BpeVocab vocab_ar_, vocab_en_, vocab_shared_;
    model::Ensemble ensemble_;
    int max_seq_len_;
};

struct FitOptions {
    LossKind loss = LossKind::cross_entropy;
    double lr = 2e-5;
    int batch_size = 16;
    int epochs = 1;
    std::uint64_t seed = 42;
};

tensor::Tensor compute_loss(const tensor::Tensor& logits, const std::vector<int>& labels,
                            LossKind kind);

// Mini-batch training. Batches are always monolingual; when both languages
// are present each epoch presents one language block after the other, block
// order reshuffled per epoch. The next batch is tokenized concurrently with
// the current optimizer step. Evaluates dev after every epoch.
TrainLog fit(SentimentModel& model, const std::vector<data::Example>& train,
             const std::vector<data::Example>& dev, const FitOptions& opts);

EvalMetrics evaluate(const SentimentModel& model, const std::vector<data::Example>& examples,
                     LossKind loss, int batch_size);

// Predictions aligned with the input order.
std::vector<model::Prediction> predict_all(const SentimentModel& model,
                                           const std::vector<data::Example>& examples,
                                           int batch_size);

// The three experiment regimes. Each validates its setup pairing, trains in
// place and returns the per-epoch log; checkpoint writing is the caller's.
TrainLog train_single(SingleModelRunner& model, const data::DatasetBundle& bundle,
                      const ExperimentConfig& cfg);
TrainLog train_ensemble_merged(EnsembleRunner& model, const data::DatasetBundle& bundle_ar,
                               const data::DatasetBundle& bundle_en, const ExperimentConfig& cfg);
TrainLog train_ensemble_perlang(EnsembleRunner& model, const data::DatasetBundle& bundle,
                                model::Language language, const ExperimentConfig& cfg);

}  // namespace miniens::train

#include "miniens/train/train.hpp"

#include <chrono>
#include <cstdio>
#include <future>
#include <map>

#include "miniens/error.hpp"
#include "miniens/text/clean.hpp"

namespace miniens::train {

using data::Example;
using model::Language;
using model::RunMode;
using model::TokenBatch;
using tensor::Tensor;

LossKind parse_loss(std::string_view name) {
    if (name == "bce_logits") return LossKind::bce_logits;
    if (name == "cross_entropy") return LossKind::cross_entropy;
    throw ConfigMismatch("unknown loss '" + std::string(name) +
                         "', expected bce_logits or cross_entropy");
}

std::string_view loss_name(LossKind kind) {
    return kind == LossKind::bce_logits ? "bce_logits" : "cross_entropy";
}

ExperimentConfig ExperimentConfig::for_setup(int setup) {
    ExperimentConfig cfg;
    cfg.setup = setup;
    switch (setup) {
        case 1:
            cfg.loss = LossKind::bce_logits;
            cfg.batch_size = 16;
            cfg.epochs = 3;
            break;
        case 2:
        case 3:
            cfg.loss = LossKind::cross_entropy;
            cfg.batch_size = 24;
            cfg.epochs = 2;
            break;
        default:
            throw ConfigMismatch("setup must be 1, 2 or 3, got " + std::to_string(setup));
    }
    return cfg;
}

void ExperimentConfig::validate() const {
    if (setup < 1 || setup > 3) {
        throw ConfigMismatch("setup must be 1, 2 or 3, got " + std::to_string(setup));
    }
    if (setup == 1 && loss != LossKind::bce_logits) {
        throw ConfigMismatch("setup 1 uses bce_logits, got cross_entropy");
    }
    if (setup != 1 && loss != LossKind::cross_entropy) {
        throw ConfigMismatch("setup " + std::to_string(setup) + " uses cross_entropy, got bce_logits");
    }
    if (batch_size <= 0 || epochs <= 0 || max_seq_len < 3 || vocab_size < 4) {
        throw ConfigMismatch("non-positive batch/epochs or too-small max_seq_len/vocab_size");
    }
    if (lr <= 0.0) throw ConfigMismatch("learning rate must be positive");
}

std::string trainlog_tsv(const TrainLog& log) {
    std::string out = "epoch\tscope\ttrain_loss\tdev_loss\tacc\tw_prec\tw_rec\tmacro_f1\n";
    char buf[512];
    const auto row = [&](int epoch, const char* scope, double train_loss, const EvalMetrics& m) {
        std::snprintf(buf, sizeof(buf), "%d\t%s\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n", epoch,
                      scope, train_loss, m.loss, m.report.accuracy, m.report.weighted_precision,
                      m.report.weighted_recall, m.report.macro_f1);
        out += buf;
    };
    for (const auto& e : log.entries) {
        row(e.epoch, "all", e.train_loss, e.dev_all);
        if (e.dev_ar) row(e.epoch, "ar", e.train_loss, *e.dev_ar);
        if (e.dev_en) row(e.epoch, "en", e.train_loss, *e.dev_en);
    }
    return out;
}

namespace {

TokenBatch tokenize_rows(const std::vector<const Example*>& examples, const bpe::BpeVocab& vocab,
                         int max_seq_len) {
    std::vector<bpe::TokenizedInput> rows;
    rows.reserve(examples.size());
    for (const Example* e : examples) {
        rows.push_back(bpe::encode(text::clean_text(e->text), vocab, max_seq_len));
    }
    return TokenBatch::from_rows(rows);
}

std::vector<int> batch_labels(const std::vector<const Example*>& examples) {
    std::vector<int> labels;
    labels.reserve(examples.size());
    for (const Example* e : examples) labels.push_back(static_cast<int>(e->label));
    return labels;
}

Language single_language_of(const std::vector<const Example*>& examples) {
    if (examples.empty()) throw InvalidArgument("cannot encode an empty batch");
    const Language lang = examples.front()->language;
    for (const Example* e : examples) {
        if (e->language != lang) {
            throw InvalidArgument("mixed-language batch; batches must be monolingual");
        }
    }
    return lang;
}

}  // namespace

namespace {

// Encoders must be built with the actual trained vocabulary sizes.
model::EncoderConfig with_vocab(model::EncoderConfig cfg, int vocab_size) {
    cfg.vocab_size = vocab_size;
    return cfg;
}

model::EnsembleConfig with_vocabs(model::EnsembleConfig cfg, int ar, int en, int shared) {
    cfg.arabic.vocab_size = ar;
    cfg.english.vocab_size = en;
    cfg.shared.vocab_size = shared;
    return cfg;
}

}  // namespace

SingleModelRunner::SingleModelRunner(model::EncoderConfig cfg, bpe::BpeVocab vocab,
                                     int max_seq_len, Rng& rng)
    : vocab_(std::move(vocab)),
      clf_(with_vocab(std::move(cfg), vocab_.size()), vocab_.tag, rng),
      max_seq_len_(max_seq_len) {}

EncodedBatch SingleModelRunner::encode_batch(const std::vector<const Example*>& examples) const {
    EncodedBatch batch;
    batch.language = single_language_of(examples);
    batch.primary = tokenize_rows(examples, vocab_, max_seq_len_);
    batch.labels = batch_labels(examples);
    return batch;
}

Tensor SingleModelRunner::logits(const EncodedBatch& batch, RunMode mode) const {
    return clf_.logits(batch.primary, mode);
}

std::vector<tensor::NamedParam> SingleModelRunner::parameters() const {
    return clf_.parameters();
}

EnsembleRunner::EnsembleRunner(model::EnsembleConfig cfg, bpe::BpeVocab vocab_ar,
                               bpe::BpeVocab vocab_en, bpe::BpeVocab vocab_shared,
                               int max_seq_len, Rng& rng)
    : vocab_ar_(std::move(vocab_ar)),
      vocab_en_(std::move(vocab_en)),
      vocab_shared_(std::move(vocab_shared)),
      ensemble_(with_vocabs(std::move(cfg), vocab_ar_.size(), vocab_en_.size(),
                            vocab_shared_.size()),
                vocab_ar_.tag, vocab_en_.tag, vocab_shared_.tag, rng),
      max_seq_len_(max_seq_len) {}

EncodedBatch EnsembleRunner::encode_batch(const std::vector<const Example*>& examples) const {
    EncodedBatch batch;
    batch.language = single_language_of(examples);
    const bpe::BpeVocab& lang_vocab = batch.language == Language::ar ? vocab_ar_ : vocab_en_;
    batch.primary = tokenize_rows(examples, lang_vocab, max_seq_len_);
    batch.shared = tokenize_rows(examples, vocab_shared_, max_seq_len_);
    batch.labels = batch_labels(examples);
    return batch;
}

Tensor EnsembleRunner::logits(const EncodedBatch& batch, RunMode mode) const {
    if (!batch.shared) throw InvalidArgument("ensemble batch is missing shared-encoder tokens");
    return ensemble_.logits(batch.language, batch.primary, *batch.shared, mode);
}

std::vector<tensor::NamedParam> EnsembleRunner::parameters() const {
    return ensemble_.parameters();
}

Tensor compute_loss(const Tensor& logits, const std::vector<int>& labels, LossKind kind) {
    if (kind == LossKind::cross_entropy) {
        return cross_entropy(logits, labels);
    }
    // One-vs-all reading of "binary cross entropy with logits" for 3-class
    // single-label data: one-hot targets, argmax at inference.
    Tensor one_hot = Tensor::zeros(logits.shape());
    auto data = one_hot.mutable_data();
    const int classes = logits.dim(1);
    for (std::size_t b = 0; b < labels.size(); ++b) {
        data[b * static_cast<std::size_t>(classes) + static_cast<std::size_t>(labels[b])] = 1.0;
    }
    return bce_with_logits(logits, one_hot);
}

namespace {

// Monolingual batches: per-language index blocks, optionally shuffled, block
// order controlled by the caller.
std::vector<std::vector<const Example*>> monolingual_batches(
    const std::vector<data::Example>& examples, int batch_size, Rng* shuffle_rng) {
    std::map<Language, std::vector<std::size_t>> by_lang;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        by_lang[examples[i].language].push_back(i);
    }

    std::vector<Language> lang_order;
    for (const auto& [lang, _] : by_lang) lang_order.push_back(lang);
    if (shuffle_rng != nullptr && lang_order.size() > 1) {
        const auto perm = shuffled_indices(lang_order.size(), *shuffle_rng);
        std::vector<Language> reordered;
        for (const auto p : perm) reordered.push_back(lang_order[p]);
        lang_order = std::move(reordered);
    }

    std::vector<std::vector<const Example*>> batches;
    for (const Language lang : lang_order) {
        auto& idx = by_lang[lang];
        if (shuffle_rng != nullptr) {
            const auto perm = shuffled_indices(idx.size(), *shuffle_rng);
            std::vector<std::size_t> shuffled;
            shuffled.reserve(idx.size());
            for (const auto p : perm) shuffled.push_back(idx[p]);
            idx = std::move(shuffled);
        }
        for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(batch_size)) {
            const std::size_t end = std::min(idx.size(), start + static_cast<std::size_t>(batch_size));
            std::vector<const Example*> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(&examples[idx[i]]);
            batches.push_back(std::move(batch));
        }
    }
    return batches;
}

}  // namespace

EvalMetrics evaluate(const SentimentModel& model, const std::vector<data::Example>& examples,
                     LossKind loss, int batch_size) {
    const auto batches = monolingual_batches(examples, batch_size, nullptr);
    double loss_sum = 0.0;
    std::size_t n = 0;
    std::vector<int> gold, pred;
    for (const auto& batch_examples : batches) {
        const EncodedBatch batch = model.encode_batch(batch_examples);
        const Tensor logits = model.logits(batch, RunMode{});
        loss_sum += compute_loss(logits, batch.labels, loss).item() * double(batch_examples.size());
        n += batch_examples.size();
        const auto preds = predictions_from_logits(logits, batch.language);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            gold.push_back(batch.labels[i]);
            pred.push_back(preds[i].label);
        }
    }
    EvalMetrics out;
    out.loss = n == 0 ? 0.0 : loss_sum / static_cast<double>(n);
    out.report = metrics::report(metrics::confusion(gold, pred));
    return out;
}

std::vector<model::Prediction> predict_all(const SentimentModel& model,
                                           const std::vector<data::Example>& examples,
                                           int batch_size) {
    std::vector<model::Prediction> out(examples.size());
    const auto batches = monolingual_batches(examples, batch_size, nullptr);
    for (const auto& batch_examples : batches) {
        const EncodedBatch batch = model.encode_batch(batch_examples);
        const auto preds = predictions_from_logits(model.logits(batch, RunMode{}), batch.language);
        for (std::size_t i = 0; i < batch_examples.size(); ++i) {
            out[static_cast<std::size_t>(batch_examples[i] - examples.data())] = preds[i];
        }
    }
    return out;
}

TrainLog fit(SentimentModel& model, const std::vector<data::Example>& train,
             const std::vector<data::Example>& dev, const FitOptions& opts) {
    if (train.empty()) throw MissingData("training split is empty");
    if (dev.empty()) throw MissingData("dev split is empty");

    std::vector<Tensor> params;
    for (auto& np : model.parameters()) params.push_back(np.tensor);
    tensor::Adam adam(params, tensor::AdamConfig{.lr = opts.lr});

    Rng root(opts.seed);
    Rng shuffle_rng = root.fork(1);
    Rng dropout_rng = root.fork(2);

    const bool bilingual = [&] {
        bool has_ar = false, has_en = false;
        for (const auto& e : dev) (e.language == Language::ar ? has_ar : has_en) = true;
        return has_ar && has_en;
    }();

    TrainLog log;
    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        const auto batches = monolingual_batches(train, opts.batch_size, &shuffle_rng);

        // Tokenize the next batch while the current one is training.
        double loss_sum = 0.0;
        auto encode_job = [&model](const std::vector<const Example*>* b) {
            return model.encode_batch(*b);
        };
        std::future<EncodedBatch> next =
            std::async(std::launch::async, encode_job, &batches.front());
        for (std::size_t i = 0; i < batches.size(); ++i) {
            EncodedBatch batch = next.get();
            if (i + 1 < batches.size()) {
                next = std::async(std::launch::async, encode_job, &batches[i + 1]);
            }
            Tensor loss = compute_loss(
                model.logits(batch, RunMode{.training = true, .rng = &dropout_rng}), batch.labels,
                opts.loss);
            tensor::backward(loss);
            adam.step();
            adam.zero_grad();
            loss_sum += loss.item() * static_cast<double>(batch.labels.size());
        }

        TrainLogEntry entry;
        entry.epoch = epoch;
        entry.train_loss = loss_sum / static_cast<double>(train.size());
        entry.dev_all = evaluate(model, dev, opts.loss, opts.batch_size);
        if (bilingual) {
            std::vector<Example> dev_ar, dev_en;
            for (const auto& e : dev) (e.language == Language::ar ? dev_ar : dev_en).push_back(e);
            entry.dev_ar = evaluate(model, dev_ar, opts.loss, opts.batch_size);
            entry.dev_en = evaluate(model, dev_en, opts.loss, opts.batch_size);
        }
        entry.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        log.entries.push_back(std::move(entry));
    }
    return log;
}

namespace {

FitOptions fit_options_from(const ExperimentConfig& cfg) {
    return FitOptions{.loss = cfg.loss,
                      .lr = cfg.lr,
                      .batch_size = cfg.batch_size,
                      .epochs = cfg.epochs,
                      .seed = cfg.seed};
}

}  // namespace

TrainLog train_single(SingleModelRunner& model, const data::DatasetBundle& bundle,
                      const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.setup != 1) {
        throw ConfigMismatch("train_single is the setup-1 path, config says setup " +
                             std::to_string(cfg.setup));
    }
    return fit(model, bundle.train, bundle.dev, fit_options_from(cfg));
}

TrainLog train_ensemble_merged(EnsembleRunner& model, const data::DatasetBundle& bundle_ar,
                               const data::DatasetBundle& bundle_en, const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.setup != 2) {
        throw ConfigMismatch("train_ensemble_merged is the setup-2 path, config says setup " +
                             std::to_string(cfg.setup));
    }
    std::vector<Example> train = bundle_ar.train;
    train.insert(train.end(), bundle_en.train.begin(), bundle_en.train.end());
    std::vector<Example> dev = bundle_ar.dev;
    dev.insert(dev.end(), bundle_en.dev.begin(), bundle_en.dev.end());
    return fit(model, train, dev, fit_options_from(cfg));
}

TrainLog train_ensemble_perlang(EnsembleRunner& model, const data::DatasetBundle& bundle,
                                Language language, const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.setup != 3) {
        throw ConfigMismatch("train_ensemble_perlang is the setup-3 path, config says setup " +
                             std::to_string(cfg.setup));
    }
    for (const auto* split : {&bundle.train, &bundle.dev}) {
        for (const auto& e : *split) {
            if (e.language != language) {
                throw ConfigMismatch("setup-3 bundle must be monolingual " +
                                     std::string(language_name(language)) + ", found a " +
                                     std::string(language_name(e.language)) + " example");
            }
        }
    }
    return fit(model, bundle.train, bundle.dev, fit_options_from(cfg));
}

}  // namespace miniens::train

#include "miniens/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "miniens/cli/config.hpp"
#include "miniens/cli/manifest.hpp"
#include "miniens/error.hpp"
#include "miniens/text/clean.hpp"

namespace miniens::cli {

namespace fs = std::filesystem;
using data::DatasetBundle;
using data::Example;
using model::Language;

namespace {

DatasetBundle load_prepared_bundle(const fs::path& data_dir, Language lang) {
    const fs::path dir = data_dir / language_name(lang);
    DatasetBundle b;
    b.train = data::load_semeval(dir / "train.tsv", lang);
    b.dev = data::load_semeval(dir / "dev.tsv", lang);
    b.test = data::load_semeval(dir / "test.tsv", lang);
    return b;
}

std::vector<text::CleanText> clean_corpus(const std::vector<Example>& examples) {
    std::vector<text::CleanText> corpus;
    corpus.reserve(examples.size());
    for (const auto& e : examples) corpus.push_back(text::clean_text(e.text));
    return corpus;
}

bool is_ensemble_model(const std::string& model) {
    return model == "ensemble-a" || model == "ensemble-b";
}

// Tokenizer training corpora: monolingual encoders see their language's
// train split, multilingual encoders see both (ar first).
std::vector<text::CleanText> tokenizer_corpus(const fs::path& data_dir, const std::string& model) {
    if (model == "mini-arabert") {
        return clean_corpus(data::load_semeval(data_dir / "ar" / "train.tsv", Language::ar));
    }
    if (model == "mini-roberta") {
        return clean_corpus(data::load_semeval(data_dir / "en" / "train.tsv", Language::en));
    }
    if (model == "mini-mbert" || model == "mini-xlmr") {
        auto corpus = clean_corpus(data::load_semeval(data_dir / "ar" / "train.tsv", Language::ar));
        auto en = clean_corpus(data::load_semeval(data_dir / "en" / "train.tsv", Language::en));
        corpus.insert(corpus.end(), std::make_move_iterator(en.begin()),
                      std::make_move_iterator(en.end()));
        return corpus;
    }
    throw InvalidArgument("no tokenizer recipe for model '" + model + "'");
}

fs::path tokenizer_dir(const fs::path& data_dir, const std::string& model, int vocab_size) {
    return data_dir / "tokenizers" / (model + "-v" + std::to_string(vocab_size));
}

bpe::BpeVocab ensure_tokenizer(const fs::path& data_dir, const std::string& model, int vocab_size) {
    const fs::path dir = tokenizer_dir(data_dir, model, vocab_size);
    if (fs::exists(dir / "vocab.txt")) return bpe::load_vocab(dir);
    bpe::BpeVocab vocab = bpe::train_bpe(tokenizer_corpus(data_dir, model), vocab_size);
    bpe::save_vocab(vocab, dir);
    return vocab;
}

std::string system_label(const train::ExperimentConfig& cfg) {
    if (cfg.setup == 1) return cfg.model;
    return cfg.model + " s" + std::to_string(cfg.setup);
}

model::EncoderConfig encoder_config_for(const train::ExperimentConfig& cfg,
                                        const std::string& name) {
    model::EncoderConfig ec = model::EncoderConfig::named(name);
    ec.max_positions = cfg.max_seq_len;
    ec.dropout_p = cfg.dropout_p;
    return ec;
}

std::unique_ptr<train::SentimentModel> build_model(const train::ExperimentConfig& cfg,
                                                   bpe::BpeVocab vocab_or_ar,
                                                   std::optional<bpe::BpeVocab> vocab_en,
                                                   std::optional<bpe::BpeVocab> vocab_shared) {
    Rng init_rng = Rng(cfg.seed).fork(0);
    if (is_ensemble_model(cfg.model)) {
        model::EnsembleConfig ens;
        ens.arabic = encoder_config_for(cfg, "mini-arabert");
        ens.english = encoder_config_for(cfg, "mini-roberta");
        ens.shared = encoder_config_for(cfg, "mini-mbert");
        ens.use_mha = cfg.model == "ensemble-a";
        ens.dropout_p = cfg.dropout_p;
        return std::make_unique<train::EnsembleRunner>(ens, std::move(vocab_or_ar),
                                                       std::move(*vocab_en),
                                                       std::move(*vocab_shared),
                                                       cfg.max_seq_len, init_rng);
    }
    return std::make_unique<train::SingleModelRunner>(encoder_config_for(cfg, cfg.model),
                                                      std::move(vocab_or_ar), cfg.max_seq_len,
                                                      init_rng);
}

void check_model_setup_pairing(const train::ExperimentConfig& cfg) {
    const auto& singles = model::EncoderConfig::known_names();
    const bool single = std::find(singles.begin(), singles.end(), cfg.model) != singles.end();
    if (cfg.setup == 1 && !single) {
        throw ConfigMismatch("setup 1 fine-tunes a single encoder, got model '" + cfg.model + "'");
    }
    if (cfg.setup != 1 && !is_ensemble_model(cfg.model)) {
        throw ConfigMismatch("setups 2-3 train ensemble-a or ensemble-b, got model '" + cfg.model +
                             "'");
    }
}

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw MissingData("cannot write " + path.string());
    f << content;
}

std::string predictions_tsv(const std::vector<Example>& examples,
                            const std::vector<model::Prediction>& preds) {
    std::string out = "example_id\tlanguage\tp_pos\tp_neg\tp_neu\tlabel\n";
    char buf[256];
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& p = preds[i];
        std::snprintf(buf, sizeof(buf), "%s\t%s\t%.17g\t%.17g\t%.17g\t%s\n",
                      examples[i].id.c_str(), std::string(language_name(p.language)).c_str(),
                      p.probs[0], p.probs[1], p.probs[2],
                      std::string(data::label_name(static_cast<data::Label>(p.label))).c_str());
        out += buf;
    }
    return out;
}

}  // namespace

int cmd_prepare(const PrepareOptions& opts) {
    RunManifest manifest;
    manifest.body["artifact_version"] = kArtifactVersion;
    manifest.body["command"] = "prepare";
    manifest.body["seed"] = opts.seed;
    nlohmann::ordered_json digests;
    std::vector<fs::path> all_inputs = opts.english_train;
    all_inputs.insert(all_inputs.end(), opts.english_dev.begin(), opts.english_dev.end());
    all_inputs.push_back(opts.english_test);
    all_inputs.insert(all_inputs.end(), opts.arabic_train.begin(), opts.arabic_train.end());
    all_inputs.push_back(opts.astd);
    all_inputs.push_back(opts.arabic_test);
    for (const auto& p : all_inputs) digests[p.string()] = file_digest_hex(p);
    manifest.body["inputs"] = digests;

    DatasetBundle en = data::build_english_bundle(opts.english_train, opts.english_dev,
                                                  opts.english_test);
    DatasetBundle ar = data::build_arabic_bundle(opts.arabic_train, opts.astd, opts.arabic_test,
                                                 opts.seed);

    std::string summary = "language\tsplit\tlabel\tcount\n";
    const auto emit = [&](const char* lang, const char* split, std::vector<Example>& examples) {
        for (auto& e : examples) e.text = text::clean_text(e.text).content;
        std::array<std::int64_t, 3> counts{};
        for (const auto& e : examples) ++counts[static_cast<std::size_t>(e.label)];
        for (int c = 0; c < 3; ++c) {
            summary += std::string(lang) + '\t' + split + '\t' +
                       std::string(data::label_name(static_cast<data::Label>(c))) + '\t' +
                       std::to_string(counts[static_cast<std::size_t>(c)]) + '\n';
        }
    };
    emit("en", "train", en.train);
    emit("en", "dev", en.dev);
    emit("en", "test", en.test);
    emit("ar", "train", ar.train);
    emit("ar", "dev", ar.dev);
    emit("ar", "test", ar.test);

    data::save_split(en.train, opts.out / "en" / "train.tsv");
    data::save_split(en.dev, opts.out / "en" / "dev.tsv");
    data::save_split(en.test, opts.out / "en" / "test.tsv");
    data::save_split(ar.train, opts.out / "ar" / "train.tsv");
    data::save_split(ar.dev, opts.out / "ar" / "dev.tsv");
    data::save_split(ar.test, opts.out / "ar" / "test.tsv");
    write_text_file(opts.out / "summary.tsv", summary);

    nlohmann::ordered_json outputs;
    for (const char* lang : {"en", "ar"}) {
        for (const char* split : {"train", "dev", "test"}) {
            outputs.push_back(std::string(lang) + "/" + split + ".tsv");
        }
    }
    outputs.push_back("summary.tsv");
    manifest.body["outputs"] = outputs;
    manifest.write_atomic(opts.out / "manifest.json");

    std::cout << summary;
    return 0;
}

int cmd_tokenizer_train(const TokenizerTrainOptions& opts) {
    const fs::path out = opts.out.empty() ? tokenizer_dir(opts.data, opts.model, opts.vocab_size)
                                          : opts.out;
    bpe::BpeVocab vocab = bpe::train_bpe(tokenizer_corpus(opts.data, opts.model), opts.vocab_size);
    bpe::save_vocab(vocab, out);
    std::cout << "tokenizer " << opts.model << ": " << vocab.size() << " tokens, "
              << vocab.merges.size() << " merges -> " << out.string() << "\n";
    return 0;
}

int cmd_train(const TrainOptions& opts) {
    ConfigFile file = ConfigFile::parse_file(opts.config);
    train::ExperimentConfig cfg = experiment_from_config(file);
    std::string language = config_language(file);

    if (opts.model) cfg.model = *opts.model;
    if (opts.language) language = *opts.language;
    cfg.seed = resolve_seed(cfg.seed, opts.seed);
    if (opts.epochs) cfg.epochs = *opts.epochs;
    if (opts.batch_size) cfg.batch_size = *opts.batch_size;
    if (opts.max_seq_len) cfg.max_seq_len = *opts.max_seq_len;
    if (opts.vocab_size) cfg.vocab_size = *opts.vocab_size;
    if (opts.lr) cfg.lr = *opts.lr;
    if (opts.dropout) cfg.dropout_p = *opts.dropout;
    cfg.validate();
    check_model_setup_pairing(cfg);
    if (cfg.setup != 2 && language == "merged") {
        throw ConfigMismatch("only setup 2 trains on merged data");
    }

    RunManifest manifest;
    manifest.body["artifact_version"] = kArtifactVersion;
    manifest.body["command"] = "train";
    manifest.body["setup"] = cfg.setup;
    manifest.body["model"] = cfg.model;
    manifest.body["language"] = language;
    manifest.body["loss"] = std::string(train::loss_name(cfg.loss));
    manifest.body["lr"] = cfg.lr;
    manifest.body["batch_size"] = cfg.batch_size;
    manifest.body["epochs"] = cfg.epochs;
    manifest.body["max_seq_len"] = cfg.max_seq_len;
    manifest.body["seed"] = cfg.seed;
    manifest.body["vocab_size"] = cfg.vocab_size;
    manifest.body["dropout"] = cfg.dropout_p;

    nlohmann::ordered_json digests;
    digests[opts.config.string()] = file_digest_hex(opts.config);
    const auto digest_split = [&](const char* lang, const char* split) {
        const fs::path p = opts.data / lang / (std::string(split) + ".tsv");
        digests[p.string()] = file_digest_hex(p);
    };
    const bool needs_ar = language != "en" || is_ensemble_model(cfg.model) ||
                          cfg.model == "mini-mbert" || cfg.model == "mini-xlmr";
    const bool needs_en = language != "ar" || is_ensemble_model(cfg.model) ||
                          cfg.model == "mini-mbert" || cfg.model == "mini-xlmr";
    if (needs_ar) {
        digest_split("ar", "train");
        digest_split("ar", "dev");
        digest_split("ar", "test");
    }
    if (needs_en) {
        digest_split("en", "train");
        digest_split("en", "dev");
        digest_split("en", "test");
    }
    manifest.body["inputs"] = digests;

    train::TrainLog log;
    std::unique_ptr<train::SentimentModel> runner;
    if (is_ensemble_model(cfg.model)) {
        bpe::BpeVocab var = ensure_tokenizer(opts.data, "mini-arabert", cfg.vocab_size);
        bpe::BpeVocab ven = ensure_tokenizer(opts.data, "mini-roberta", cfg.vocab_size);
        bpe::BpeVocab vsh = ensure_tokenizer(opts.data, "mini-mbert", cfg.vocab_size);
        bpe::save_vocab(var, opts.out / "tokenizers" / "arabic");
        bpe::save_vocab(ven, opts.out / "tokenizers" / "english");
        bpe::save_vocab(vsh, opts.out / "tokenizers" / "shared");
        runner = build_model(cfg, std::move(var), std::move(ven), std::move(vsh));
        auto& ens = static_cast<train::EnsembleRunner&>(*runner);
        if (cfg.setup == 2) {
            log = train::train_ensemble_merged(ens, load_prepared_bundle(opts.data, Language::ar),
                                               load_prepared_bundle(opts.data, Language::en), cfg);
        } else {
            const Language lang = model::parse_language(language);
            log = train::train_ensemble_perlang(ens, load_prepared_bundle(opts.data, lang), lang,
                                                cfg);
        }
    } else {
        bpe::BpeVocab vocab = ensure_tokenizer(opts.data, cfg.model, cfg.vocab_size);
        bpe::save_vocab(vocab, opts.out / "tokenizers" / cfg.model);
        runner = build_model(cfg, std::move(vocab), std::nullopt, std::nullopt);
        auto& single = static_cast<train::SingleModelRunner&>(*runner);
        const Language lang = model::parse_language(language);
        log = train::train_single(single, load_prepared_bundle(opts.data, lang), cfg);
    }

    const auto trained_params = runner->parameters();
    tensor::save_checkpoint(trained_params, opts.out / "model.ckpt");
    write_text_file(opts.out / "trainlog.tsv", train::trainlog_tsv(log));
    manifest.body["outputs"] = {{"checkpoint", "model.ckpt"}, {"trainlog", "trainlog.tsv"}};
    manifest.write_atomic(opts.out / "manifest.json");

    for (const auto& e : log.entries) {
        std::printf("epoch %d  train_loss %.6f  dev_loss %.6f  dev_acc %.4f  dev_macro_f1 %.4f\n",
                    e.epoch, e.train_loss, e.dev_all.loss, e.dev_all.report.accuracy,
                    e.dev_all.report.macro_f1);
        std::fprintf(stderr, "epoch %d wall %.1fs\n", e.epoch, e.wall_seconds);
    }
    return 0;
}

LoadedRun load_run(const fs::path& run_dir) {
    const RunManifest manifest = RunManifest::read(run_dir / "manifest.json");
    const auto& body = manifest.body;
    if (!body.contains("command") || body["command"] != "train") {
        throw CheckpointMismatch(run_dir.string() + " is not a training run directory");
    }

    LoadedRun run;
    run.config.setup = body["setup"].get<int>();
    run.config.model = body["model"].get<std::string>();
    run.config.loss = train::parse_loss(body["loss"].get<std::string>());
    run.config.lr = body["lr"].get<double>();
    run.config.batch_size = body["batch_size"].get<int>();
    run.config.epochs = body["epochs"].get<int>();
    run.config.max_seq_len = body["max_seq_len"].get<int>();
    run.config.seed = body["seed"].get<std::uint64_t>();
    run.config.vocab_size = body["vocab_size"].get<int>();
    run.config.dropout_p = body["dropout"].get<double>();
    run.language = body["language"].get<std::string>();

    if (is_ensemble_model(run.config.model)) {
        bpe::BpeVocab var = bpe::load_vocab(run_dir / "tokenizers" / "arabic");
        bpe::BpeVocab ven = bpe::load_vocab(run_dir / "tokenizers" / "english");
        bpe::BpeVocab vsh = bpe::load_vocab(run_dir / "tokenizers" / "shared");
        run.model = build_model(run.config, std::move(var), std::move(ven), std::move(vsh));
    } else {
        bpe::BpeVocab vocab = bpe::load_vocab(run_dir / "tokenizers" / run.config.model);
        run.model = build_model(run.config, std::move(vocab), std::nullopt, std::nullopt);
    }
    auto params = run.model->parameters();
    tensor::load_checkpoint(params, run_dir / "model.ckpt");
    run.system_label = system_label(run.config);
    return run;
}

int cmd_eval(const EvalOptions& opts) {
    struct EvaluatedRun {
        std::string label;
        int setup = 0;
        std::string model;
        std::string run_name;
        std::map<std::string, std::vector<model::Prediction>> preds;  // language -> predictions
    };

    std::map<std::string, std::vector<Example>> tests;
    std::map<std::string, std::vector<int>> gold;
    for (const char* lang : {"en", "ar"}) {
        const fs::path p = opts.data / lang / "test.tsv";
        if (fs::exists(p)) {
            tests[lang] = data::load_semeval(p, model::parse_language(lang));
            for (const auto& e : tests[lang]) gold[lang].push_back(static_cast<int>(e.label));
        }
    }
    if (tests.empty()) throw MissingData("no test splits under " + opts.data.string());

    std::vector<EvaluatedRun> evaluated;
    std::vector<metrics::ResultRow> rows;
    for (const auto& run_dir : opts.runs) {
        LoadedRun run = load_run(run_dir);
        EvaluatedRun er;
        er.label = run.system_label;
        er.setup = run.config.setup;
        er.model = run.config.model;
        er.run_name = run_dir.filename().string();

        std::vector<std::string> langs;
        if (run.language == "merged") {
            langs = {"en", "ar"};
        } else {
            langs = {run.language};
        }
        for (const auto& lang : langs) {
            if (!tests.contains(lang)) {
                throw MissingData("run " + er.run_name + " needs " + lang + " test split");
            }
            const auto& examples = tests[lang];
            auto preds = train::predict_all(*run.model, examples, opts.batch_size);
            std::vector<int> pred_labels;
            pred_labels.reserve(preds.size());
            for (const auto& p : preds) pred_labels.push_back(p.label);
            rows.push_back({er.label, lang, metrics::report(metrics::confusion(gold[lang],
                                                                               pred_labels))});
            write_text_file(opts.out / "predictions" / (er.run_name + "." + lang + ".tsv"),
                            predictions_tsv(examples, preds));
            er.preds[lang] = std::move(preds);
        }
        if (run.language == "merged") {
            // Merged test set row, mirroring the single combined evaluation.
            std::vector<int> g, p;
            for (const auto& lang : langs) {
                for (const auto& pr : er.preds[lang]) p.push_back(pr.label);
                g.insert(g.end(), gold[lang].begin(), gold[lang].end());
            }
            rows.push_back({er.label, "all", metrics::report(metrics::confusion(g, p))});
        }
        evaluated.push_back(std::move(er));
    }

    if (opts.vote) {
        // Default committee per language: the given setup-1 runs of that
        // language (the per-language trio when all three are supplied).
        for (const auto& [lang, examples] : tests) {
            std::vector<const EvaluatedRun*> committee;
            for (const auto& er : evaluated) {
                if (er.setup == 1 && er.preds.contains(lang)) committee.push_back(&er);
            }
            if (committee.empty()) {
                throw InvalidArgument("--vote needs at least one setup-1 run for language " + lang);
            }
            std::vector<int> vote_labels;
            vote_labels.reserve(examples.size());
            for (std::size_t i = 0; i < examples.size(); ++i) {
                std::vector<model::Prediction> member_preds;
                member_preds.reserve(committee.size());
                for (const auto* er : committee) member_preds.push_back(er->preds.at(lang)[i]);
                vote_labels.push_back(model::majority_vote(member_preds));
            }
            rows.push_back({"majority-vote", lang,
                            metrics::report(metrics::confusion(gold[lang], vote_labels))});
        }
    }

    // Deterministic table order: language groups en, ar, all; inside a group
    // the setup-1 singles, then ensembles by setup and variant, then the vote.
    const auto lang_rank = [](const std::string& l) { return l == "en" ? 0 : l == "ar" ? 1 : 2; };
    const auto system_rank = [](const std::string& s) {
        static const std::vector<std::string> order{
            "mini-arabert", "mini-roberta", "mini-mbert",   "mini-xlmr",
            "ensemble-a s2", "ensemble-b s2", "ensemble-a s3", "ensemble-b s3",
            "majority-vote"};
        const auto it = std::find(order.begin(), order.end(), s);
        return it == order.end() ? order.size() : static_cast<std::size_t>(it - order.begin());
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
        if (lang_rank(a.language) != lang_rank(b.language)) {
            return lang_rank(a.language) < lang_rank(b.language);
        }
        return system_rank(a.system) < system_rank(b.system);
    });

    const std::string table = metrics::render_results_table(rows);
    std::string tsv = "system\tlanguage\tacc\tw_prec\tw_rec\tmacro_f1\n";
    for (const auto& r : rows) {
        tsv += r.system + '\t' + r.language + '\t' + metrics::report_tsv_row(r.metrics) + '\n';
    }
    write_text_file(opts.out / "results.txt", table);
    write_text_file(opts.out / "results.tsv", tsv);

    RunManifest manifest;
    manifest.body["artifact_version"] = kArtifactVersion;
    manifest.body["command"] = "eval";
    nlohmann::ordered_json runs_json;
    for (const auto& r : opts.runs) runs_json.push_back(r.string());
    manifest.body["runs"] = runs_json;
    manifest.body["vote"] = opts.vote;
    manifest.write_atomic(opts.out / "manifest.json");

    std::cout << table;
    return 0;
}

std::uint64_t resolve_seed(std::uint64_t config_seed, std::optional<std::uint64_t> cli_flag) {
    if (cli_flag) return *cli_flag;
    if (const char* env = std::getenv("MINIENS_SEED"); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            const std::uint64_t v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw InvalidArgument("MINIENS_SEED must be an unsigned integer, got '" +
                              std::string(env) + "'");
    }
    return config_seed;
}

int cmd_predict(const PredictOptions& opts) {
    const Language lang = model::parse_language(opts.language);
    LoadedRun run = load_run(opts.run);

    Example e;
    e.id = "cli";
    e.text = opts.text;
    e.language = lang;
    e.label = data::Label::neutral;  // placeholder, unused for inference
    std::vector<Example> examples{e};
    const auto preds = train::predict_all(*run.model, examples, 1);
    const auto& p = preds.front();
    std::printf("label\t%s\n", std::string(data::label_name(static_cast<data::Label>(p.label))).c_str());
    std::printf("p_pos\t%.6f\np_neg\t%.6f\np_neu\t%.6f\n", p.probs[0], p.probs[1], p.probs[2]);
    return 0;
}

}  // namespace miniens::cli

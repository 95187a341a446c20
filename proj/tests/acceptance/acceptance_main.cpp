// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one [PASS]/[FAIL] line per criterion. Needs three arguments: the
// fixtures directory, the CLI binary, and the shipped configs directory.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "miniens/bpe/bpe.hpp"
#include "miniens/cli/config.hpp"
#include "miniens/data/dataset.hpp"
#include "miniens/error.hpp"
#include "miniens/metrics/metrics.hpp"
#include "miniens/model/encoder.hpp"
#include "miniens/model/ensemble.hpp"
#include "miniens/train/train.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using miniens::Rng;
using miniens::model::Language;
using miniens::model::TokenBatch;
using miniens::tensor::Tensor;

namespace {

fs::path g_fixtures, g_cli, g_configs, g_scratch;
int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s :: %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_cli(const std::string& args, const std::string& log_name) {
    const fs::path log = g_scratch / (log_name + ".log");
    const std::string cmd = g_cli.string() + " " + args + " > " + log.string() + " 2>&1";
    return std::system(cmd.c_str());
}

TokenBatch random_batch(int batch, int seq, int vocab, std::uint64_t tag, Rng& rng) {
    TokenBatch b;
    b.batch = batch;
    b.seq_len = seq;
    b.vocab_tag = tag;
    for (int r = 0; r < batch; ++r) {
        const int body = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(seq - 2)));
        for (int s = 0; s < seq; ++s) {
            int id = 0;
            if (s == 0) {
                id = 2;
            } else if (s <= body) {
                id = 4 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(vocab - 4)));
            } else if (s == body + 1) {
                id = 3;
            }
            b.ids.push_back(id);
            b.mask.push_back(s <= body + 1 ? 1 : 0);
        }
    }
    return b;
}

// --- criterion 1: gradient fidelity at desk config -------------------------

void criterion_gradient_fidelity() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double kTol = 1e-4;
    constexpr double kH = 1e-5;
    constexpr int kCoordsPerParam = 5;
    double worst = 0.0;
    std::string worst_at;

    const auto track = [&](const std::string& arch, const testutil::FdReport& rep) {
        if (rep.worst_rel > worst) {
            worst = rep.worst_rel;
            worst_at = arch + "/" + rep.worst_param;
        }
    };

    {
        Rng rng(1001);
        miniens::model::EncoderConfig cfg = miniens::model::EncoderConfig::named("mini-roberta");
        cfg.dropout_p = 0.0;
        miniens::model::EncoderClassifier clf(cfg, 7, rng);
        Rng data_rng(5);
        const TokenBatch batch = random_batch(4, 8, cfg.vocab_size, 7, data_rng);
        const std::vector<int> targets{0, 1, 2, 1};
        auto params = clf.parameters();
        auto loss_fn = [&]() { return cross_entropy(clf.logits(batch), targets); };
        Rng pick(1);
        track("single", testutil::check_grads_fd(params, loss_fn, kH, kCoordsPerParam, pick));
    }
    for (const bool use_mha : {true, false}) {
        Rng rng(1002);
        miniens::model::EnsembleConfig cfg = miniens::model::EnsembleConfig::desk_default(use_mha);
        cfg.arabic.dropout_p = cfg.english.dropout_p = cfg.shared.dropout_p = 0.0;
        cfg.dropout_p = 0.0;
        miniens::model::Ensemble ens(cfg, 11, 12, 13, rng);
        Rng data_rng(6);
        const TokenBatch lang = random_batch(4, 8, cfg.arabic.vocab_size, 11, data_rng);
        const TokenBatch shared = random_batch(4, 8, cfg.shared.vocab_size, 13, data_rng);
        const std::vector<int> targets{2, 0, 1, 0};
        auto params = ens.parameters();
        auto loss_fn = [&]() {
            return cross_entropy(ens.logits(Language::ar, lang, shared), targets);
        };
        Rng pick(2);
        track(use_mha ? "variant-a" : "variant-b",
              testutil::check_grads_fd(params, loss_fn, kH, kCoordsPerParam, pick));
    }

    const double secs = seconds_since(t0);
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "worst rel err %.3g at %s (tol %.0e, h=%.0e), %.1fs (budget 120s)", worst,
                  worst_at.c_str(), kTol, kH, secs);
    report(1, "gradient fidelity (single, variant A, variant B)", worst < kTol && secs < 120.0,
           detail);
}

// --- criterion 2: metric oracle equivalence --------------------------------

miniens::metrics::MetricsReport brute_force_report(const std::vector<int>& gold,
                                                   const std::vector<int>& pred) {
    miniens::metrics::MetricsReport r;
    const double total = static_cast<double>(gold.size());
    double correct = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i) correct += gold[i] == pred[i] ? 1.0 : 0.0;
    r.accuracy = correct / total;
    double wp = 0.0, wr = 0.0, mf1 = 0.0;
    for (int c = 0; c < 3; ++c) {
        double tp = 0.0, fp = 0.0, fn = 0.0, support = 0.0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            if (gold[i] == c) {
                support += 1.0;
                if (pred[i] == c) {
                    tp += 1.0;
                } else {
                    fn += 1.0;
                }
            } else if (pred[i] == c) {
                fp += 1.0;
            }
        }
        const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        wp += support * precision;
        wr += support * recall;
        mf1 += f1;
    }
    r.weighted_precision = wp / total;
    r.weighted_recall = wr / total;
    r.macro_f1 = mf1 / 3.0;
    return r;
}

void criterion_metric_oracle() {
    Rng rng(2024);
    double worst = 0.0;
    double worst_identity = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.next_below(60);
        const int gold_classes = 1 + static_cast<int>(rng.next_below(3));  // zero-support cases
        std::vector<int> gold, pred;
        for (std::size_t i = 0; i < n; ++i) {
            gold.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(gold_classes))));
            pred.push_back(static_cast<int>(rng.next_below(3)));
        }
        const auto got = miniens::metrics::report(miniens::metrics::confusion(gold, pred));
        const auto expect = brute_force_report(gold, pred);
        worst = std::max({worst, std::abs(got.accuracy - expect.accuracy),
                          std::abs(got.weighted_precision - expect.weighted_precision),
                          std::abs(got.weighted_recall - expect.weighted_recall),
                          std::abs(got.macro_f1 - expect.macro_f1)});
        worst_identity = std::max(worst_identity, std::abs(got.weighted_recall - got.accuracy));
    }
    char detail[192];
    std::snprintf(detail, sizeof(detail),
                  "1000 random sets: max |report - oracle| %.3g (tol 1e-12), max |wR - acc| %.3g",
                  worst, worst_identity);
    report(2, "metric oracle equivalence + weighted_recall == accuracy",
           worst < 1e-12 && worst_identity < 1e-12, detail);
}

// --- criterion 3: overfit capability ----------------------------------------

void criterion_overfit() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    try {
        miniens::data::DatasetBundle bundle;
        bundle.train = miniens::data::load_semeval(g_fixtures / "overfit" / "train32-en.tsv",
                                                   Language::en);
        bundle.dev = miniens::data::load_semeval(g_fixtures / "overfit" / "dev-en.tsv",
                                                 Language::en);
        std::vector<miniens::text::CleanText> corpus;
        for (const auto& e : bundle.train) corpus.push_back(miniens::text::clean_text(e.text));

        for (const auto loss : {miniens::train::LossKind::bce_logits,
                                miniens::train::LossKind::cross_entropy}) {
            miniens::model::EncoderConfig enc = miniens::model::EncoderConfig::named("mini-roberta");
            enc.max_positions = 32;
            enc.dropout_p = 0.0;
            Rng init = Rng(42).fork(0);
            miniens::train::SingleModelRunner runner(enc, miniens::bpe::train_bpe(corpus, 2048),
                                                     32, init);
            miniens::train::FitOptions opts;
            opts.loss = loss;  // setup-1 geometry; epochs and lr desk-overridden
            opts.lr = 1e-3;
            opts.batch_size = 16;
            opts.epochs = 200;
            opts.seed = 42;
            miniens::train::fit(runner, bundle.train, bundle.dev, opts);
            const auto final_train =
                miniens::train::evaluate(runner, bundle.train, loss, opts.batch_size);
            char part[128];
            std::snprintf(part, sizeof(part), "%s: acc %.3f loss %.4f; ",
                          std::string(miniens::train::loss_name(loss)).c_str(),
                          final_train.report.accuracy, final_train.loss);
            detail += part;
            pass = pass && final_train.report.accuracy == 1.0 && final_train.loss < 0.05;
        }
    } catch (const std::exception& e) {
        pass = false;
        detail += std::string("exception: ") + e.what();
    }
    const double secs = seconds_since(t0);
    char tail[96];
    std::snprintf(tail, sizeof(tail), "%.1fs (budget 180s)", secs);
    report(3, "overfit on the 32-example fixture, both losses", pass && secs < 180.0,
           detail + tail);
}

// --- criterion 4: end-to-end experiment parity ------------------------------

// Replays the English committee vote from the dumped prediction TSVs and
// checks the metrics against the majority-vote row of results.tsv.
bool vote_row_matches_dumped_predictions() {
    const auto parse_predictions = [](const fs::path& path) {
        std::vector<miniens::model::Prediction> preds;
        std::ifstream f(path);
        std::string line;
        std::getline(f, line);  // header
        while (std::getline(f, line)) {
            std::istringstream row(line);
            std::string id, lang, label;
            miniens::model::Prediction p;
            row >> id >> lang >> p.probs[0] >> p.probs[1] >> p.probs[2] >> label;
            p.language = miniens::model::parse_language(lang);
            p.label = label == "positive" ? 0 : label == "negative" ? 1 : 2;
            preds.push_back(p);
        }
        return preds;
    };

    std::vector<std::vector<miniens::model::Prediction>> committee;
    for (const char* m : {"mini-roberta", "mini-mbert", "mini-xlmr"}) {
        committee.push_back(parse_predictions(g_scratch / "results" / "predictions" /
                                              (std::string("s1-en-") + m + ".en.tsv")));
    }
    const auto test_rows = miniens::data::load_semeval(
        g_scratch / "data" / "en" / "test.tsv", Language::en);
    if (test_rows.empty() || committee[0].size() != test_rows.size()) return false;

    std::vector<int> gold, voted;
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        gold.push_back(static_cast<int>(test_rows[i].label));
        std::vector<miniens::model::Prediction> member;
        for (const auto& c : committee) member.push_back(c[i]);
        voted.push_back(miniens::model::majority_vote(member));
    }
    const auto expect = miniens::metrics::report(miniens::metrics::confusion(gold, voted));

    std::ifstream tsv(g_scratch / "results" / "results.tsv");
    std::string line;
    while (std::getline(tsv, line)) {
        if (line.rfind("majority-vote\ten\t", 0) != 0) continue;
        std::istringstream row(line);
        std::string system, lang;
        double acc = -1, wp = -1, wr = -1, mf1 = -1;
        row >> system >> lang >> acc >> wp >> wr >> mf1;
        return std::abs(acc - expect.accuracy) < 1e-12 &&
               std::abs(wp - expect.weighted_precision) < 1e-12 &&
               std::abs(wr - expect.weighted_recall) < 1e-12 &&
               std::abs(mf1 - expect.macro_f1) < 1e-12;
    }
    return false;
}

void criterion_end_to_end() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path data = g_scratch / "data";
    const fs::path runs = g_scratch / "runs";
    const std::string overrides = " --max-seq-len 32 --vocab-size 512 --lr 1e-3";
    bool pass = true;
    std::string detail;

    const std::string prep =
        "prepare --english-train " + (g_fixtures / "en" / "semeval2013-train.tsv").string() +
        " --english-train " + (g_fixtures / "en" / "semeval2014-train.tsv").string() +
        " --english-train " + (g_fixtures / "en" / "semeval2015-train.tsv").string() +
        " --english-train " + (g_fixtures / "en" / "semeval2016-train.tsv").string() +
        " --english-dev " + (g_fixtures / "en" / "semeval2013-test.tsv").string() +
        " --english-dev " + (g_fixtures / "en" / "semeval2014-test.tsv").string() +
        " --english-test " + (g_fixtures / "en" / "semeval2017-test.tsv").string() +
        " --arabic-train " + (g_fixtures / "ar" / "semeval17-taskA-train.tsv").string() +
        " --arabic-train " + (g_fixtures / "ar" / "semeval17-taskB-train.tsv").string() +
        " --arabic-train " + (g_fixtures / "ar" / "semeval17-taskD-train.tsv").string() +
        " --astd " + (g_fixtures / "ar" / "astd.tsv").string() +
        " --arabic-test " + (g_fixtures / "ar" / "semeval17-taskA-test.tsv").string() +
        " --out " + data.string() + " --seed 42";
    if (run_cli(prep, "prepare") != 0) {
        report(4, "end-to-end experiment parity", false, "prepare failed, see scratch logs");
        return;
    }

    struct Job {
        std::string name;
        std::string config;
        std::string model;
    };
    std::vector<Job> jobs;
    for (const char* m : {"mini-roberta", "mini-mbert", "mini-xlmr"}) {
        jobs.push_back({std::string("s1-en-") + m, "setup1-en.cfg", m});
    }
    for (const char* m : {"mini-arabert", "mini-mbert", "mini-xlmr"}) {
        jobs.push_back({std::string("s1-ar-") + m, "setup1-ar.cfg", m});
    }
    for (const char* v : {"ensemble-a", "ensemble-b"}) {
        jobs.push_back({std::string("s2-") + v, "setup2-merged.cfg", v});
        jobs.push_back({std::string("s3-en-") + v, "setup3-en.cfg", v});
        jobs.push_back({std::string("s3-ar-") + v, "setup3-ar.cfg", v});
    }
    std::string eval_args = "eval --data " + data.string() + " --vote --out " +
                            (g_scratch / "results").string();
    for (const auto& job : jobs) {
        const std::string args = "train --config " + (g_configs / job.config).string() +
                                 " --model " + job.model + " --data " + data.string() + " --out " +
                                 (runs / job.name).string() + overrides;
        if (run_cli(args, "train-" + job.name) != 0) {
            pass = false;
            detail += job.name + " failed; ";
        }
        eval_args += " --run " + (runs / job.name).string();
    }
    if (pass && run_cli(eval_args, "eval") != 0) {
        pass = false;
        detail += "eval failed; ";
    }

    if (pass) {
        const std::string table = testutil::read_file(g_scratch / "results" / "results.txt");
        const std::vector<std::string> required{
            "== language: en", "== language: ar", "mini-roberta", "mini-arabert", "mini-mbert",
            "mini-xlmr",       "ensemble-a s2",   "ensemble-b s2", "ensemble-a s3",
            "ensemble-b s3",   "majority-vote"};
        for (const auto& needle : required) {
            if (table.find(needle) == std::string::npos) {
                pass = false;
                detail += "missing '" + needle + "'; ";
            }
        }
    }
    if (pass && !vote_row_matches_dumped_predictions()) {
        pass = false;
        detail += "vote row does not match a recompute from the dumped prediction TSVs; ";
    }
    const double secs = seconds_since(t0);
    char tail[128];
    std::snprintf(tail, sizeof(tail), "12 runs + vote table + vote recompute, %.0fs (budget 600s)",
                  secs);
    report(4, "end-to-end experiment parity", pass && secs < 600.0, detail + tail);
}

// --- criterion 5: hyperparameter fidelity -----------------------------------

void criterion_preset_audit() {
    struct Expect {
        const char* file;
        int setup;
        miniens::train::LossKind loss;
        int batch;
        int epochs;
    };
    const Expect presets[] = {
        {"setup1-en.cfg", 1, miniens::train::LossKind::bce_logits, 16, 3},
        {"setup1-ar.cfg", 1, miniens::train::LossKind::bce_logits, 16, 3},
        {"setup2-merged.cfg", 2, miniens::train::LossKind::cross_entropy, 24, 2},
        {"setup3-en.cfg", 3, miniens::train::LossKind::cross_entropy, 24, 2},
        {"setup3-ar.cfg", 3, miniens::train::LossKind::cross_entropy, 24, 2},
    };
    bool pass = true;
    std::string detail;
    for (const auto& p : presets) {
        try {
            const auto cfg = miniens::cli::ConfigFile::parse_file(g_configs / p.file);
            const auto exp = miniens::cli::experiment_from_config(cfg);
            const bool ok = exp.setup == p.setup && exp.loss == p.loss && exp.lr == 2e-5 &&
                            exp.max_seq_len == 256 && exp.batch_size == p.batch &&
                            exp.epochs == p.epochs;
            if (!ok) {
                pass = false;
                detail += std::string(p.file) + " deviates; ";
            }
        } catch (const std::exception& e) {
            pass = false;
            detail += std::string(p.file) + ": " + e.what() + "; ";
        }
    }
    if (pass) detail = "5 presets: lr=2e-5, msl=256, (batch 16, 3 epochs) bce / (batch 24, 2 epochs) ce";
    report(5, "hyperparameter fidelity of shipped presets", pass, detail);
}

// --- criterion 6: data-pipeline invariants ----------------------------------

void criterion_data_invariants() {
    bool pass = true;
    std::string detail;
    try {
        // OBJ rows all dropped
        std::ifstream astd(g_fixtures / "ar" / "astd.tsv");
        std::string line;
        std::size_t obj_rows = 0, total_rows = 0;
        while (std::getline(astd, line)) {
            if (line.empty()) continue;
            ++total_rows;
            if (line.size() >= 4 && line.compare(line.size() - 4, 4, "\tOBJ") == 0) ++obj_rows;
        }
        const auto loaded = miniens::data::load_astd(g_fixtures / "ar" / "astd.tsv");
        if (obj_rows == 0 || loaded.size() != total_rows - obj_rows) {
            pass = false;
            detail += "OBJ drop mismatch; ";
        }

        // exact 90/10 split of the merged unique pool
        const std::vector<fs::path> ar_train{g_fixtures / "ar" / "semeval17-taskA-train.tsv",
                                             g_fixtures / "ar" / "semeval17-taskB-train.tsv",
                                             g_fixtures / "ar" / "semeval17-taskD-train.tsv"};
        const auto bundle = miniens::data::build_arabic_bundle(
            ar_train, g_fixtures / "ar" / "astd.tsv",
            g_fixtures / "ar" / "semeval17-taskA-test.tsv", 42);
        const std::size_t n = bundle.train.size() + bundle.dev.size();
        if (bundle.dev.size() != n / 10 || bundle.train.size() != n - n / 10) {
            pass = false;
            detail += "split ratio broken; ";
        }
        char part[96];
        std::snprintf(part, sizeof(part), "astd %zu->%zu rows, split %zu/%zu; ", total_rows,
                      loaded.size(), bundle.train.size(), bundle.dev.size());
        detail += part;

        // planted duplicate of a test tweet must trip the leak detector
        const fs::path tampered = g_scratch / "tampered-taskA.tsv";
        std::ofstream out(tampered, std::ios::binary);
        out << testutil::read_file(ar_train[0]);
        const auto test_rows = miniens::data::load_semeval(
            g_fixtures / "ar" / "semeval17-taskA-test.tsv", Language::ar);
        out << "planted-1\t" << miniens::data::label_name(test_rows.front().label) << '\t'
            << test_rows.front().text << '\n';
        out.close();
        try {
            miniens::data::build_arabic_bundle({tampered, ar_train[1], ar_train[2]},
                                               g_fixtures / "ar" / "astd.tsv",
                                               g_fixtures / "ar" / "semeval17-taskA-test.tsv", 42);
            pass = false;
            detail += "leak detector silent on planted duplicate; ";
        } catch (const miniens::DuplicateTestLeak&) {
            detail += "leak detector fired";
        }
    } catch (const std::exception& e) {
        pass = false;
        detail += std::string("exception: ") + e.what();
    }
    report(6, "data-pipeline invariants (OBJ drop, 90/10, leak guard)", pass, detail);
}

// --- criterion 7: structural ensemble invariants ----------------------------

void criterion_ensemble_invariants() {
    bool pass = true;
    std::string detail;
    try {
        Rng rng(7001);
        miniens::model::EnsembleConfig cfg = miniens::model::EnsembleConfig::desk_default(true);
        miniens::model::Ensemble ens(cfg, 21, 22, 23, rng);
        Rng data_rng(9);
        const TokenBatch ar = random_batch(4, 8, cfg.arabic.vocab_size, 21, data_rng);
        const TokenBatch shared = random_batch(4, 8, cfg.shared.vocab_size, 23, data_rng);

        // routing exclusivity
        auto params = ens.parameters();
        for (auto& p : params) p.tensor.zero_grad();
        Tensor loss = cross_entropy(ens.logits(Language::ar, ar, shared), {0, 1, 2, 0});
        miniens::tensor::backward(loss);
        for (const auto& p : params) {
            if (p.name.rfind("english.", 0) != 0) continue;
            for (const double g : p.tensor.grad()) {
                if (g != 0.0) {
                    pass = false;
                    detail += "english encoder got gradient on an Arabic batch; ";
                    break;
                }
            }
        }

        // pooler bound and prediction validity
        const auto out = ens.route(Language::ar).forward(ar);
        for (const double v : out.pooler_output.data()) {
            if (!(v > -1.0 && v < 1.0)) {
                pass = false;
                detail += "pooler left (-1,1); ";
                break;
            }
        }
        const auto preds = ens.predict(Language::ar, ar, shared);
        for (const auto& p : preds) {
            const double sum = p.probs[0] + p.probs[1] + p.probs[2];
            int argmax = 0;
            for (int c = 1; c < 3; ++c) {
                if (p.probs[static_cast<std::size_t>(c)] > p.probs[static_cast<std::size_t>(argmax)]) {
                    argmax = c;
                }
            }
            if (std::abs(sum - 1.0) >= 1e-9 || p.label != argmax || p.probs[0] < 0.0 ||
                p.probs[1] < 0.0 || p.probs[2] < 0.0) {
                pass = false;
                detail += "prediction invariants broken; ";
                break;
            }
        }

        // majority vote == mode on all strict-majority assignments, k in {3,5}
        std::size_t checked = 0;
        for (const int k : {3, 5}) {
            const auto total = static_cast<std::size_t>(std::pow(3, k));
            for (std::size_t code = 0; code < total; ++code) {
                std::size_t rest = code;
                std::array<int, 3> counts{};
                std::vector<miniens::model::Prediction> votes;
                for (int i = 0; i < k; ++i) {
                    const int label = static_cast<int>(rest % 3);
                    rest /= 3;
                    counts[static_cast<std::size_t>(label)]++;
                    miniens::model::Prediction p;
                    p.label = label;
                    p.probs = {0.05, 0.05, 0.05};
                    p.probs[static_cast<std::size_t>(label)] = 0.9;
                    p.language = Language::en;
                    votes.push_back(p);
                }
                int mode = 0;
                for (int c = 1; c < 3; ++c) {
                    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(mode)]) {
                        mode = c;
                    }
                }
                if (counts[static_cast<std::size_t>(mode)] * 2 > k) {
                    ++checked;
                    if (miniens::model::majority_vote(votes) != mode) {
                        pass = false;
                        detail += "vote != mode at code " + std::to_string(code) + " (k=" +
                                  std::to_string(k) + "); ";
                    }
                }
            }
        }
        detail += "checked " + std::to_string(checked) + " strict-majority assignments";
    } catch (const std::exception& e) {
        pass = false;
        detail += std::string("exception: ") + e.what();
    }
    report(7, "structural ensemble invariants", pass, detail);
}

// --- criterion 8: determinism ------------------------------------------------

void criterion_determinism() {
    bool pass = true;
    std::string detail;
    const fs::path data = g_scratch / "data";  // prepared by criterion 4
    if (!fs::exists(data / "en" / "train.tsv")) {
        report(8, "seeded determinism", false, "prepared data missing (criterion 4 runs first)");
        return;
    }
    const std::string overrides = " --max-seq-len 32 --vocab-size 512 --lr 1e-3";
    for (const char* tag : {"det-a", "det-b"}) {
        const std::string args = "train --config " + (g_configs / "setup1-en.cfg").string() +
                                 " --model mini-roberta --data " + data.string() + " --out " +
                                 (g_scratch / tag).string() + overrides;
        if (run_cli(args, std::string("train-") + tag) != 0) {
            pass = false;
            detail += std::string(tag) + " failed; ";
        }
        const std::string eval_args = "eval --data " + data.string() + " --run " +
                                      (g_scratch / tag).string() + " --out " +
                                      (g_scratch / (std::string(tag) + "-results")).string();
        if (run_cli(eval_args, std::string("eval-") + tag) != 0) {
            pass = false;
            detail += std::string(tag) + " eval failed; ";
        }
    }
    if (pass) {
        const auto same = [&](const fs::path& a, const fs::path& b, const char* what) {
            if (testutil::read_file(a) != testutil::read_file(b)) {
                pass = false;
                detail += std::string(what) + " differ; ";
            }
        };
        same(g_scratch / "det-a" / "model.ckpt", g_scratch / "det-b" / "model.ckpt", "checkpoints");
        same(g_scratch / "det-a" / "trainlog.tsv", g_scratch / "det-b" / "trainlog.tsv",
             "train logs");
        same(g_scratch / "det-a-results" / "results.txt",
             g_scratch / "det-b-results" / "results.txt", "results tables");
        same(g_scratch / "det-a-results" / "results.tsv",
             g_scratch / "det-b-results" / "results.tsv", "results TSVs");
        if (pass) detail = "two seeded runs: checkpoints, train logs and results byte-identical";
    }
    report(8, "seeded determinism (checkpoints, logs, results)", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::fprintf(stderr, "usage: %s <fixtures-dir> <cli-binary> <configs-dir>\n", argv[0]);
        return 2;
    }
    g_fixtures = argv[1];
    g_cli = argv[2];
    g_configs = argv[3];
    g_scratch = fs::temp_directory_path() / "miniens-acceptance";
    fs::remove_all(g_scratch);
    fs::create_directories(g_scratch);
    std::printf("scratch: %s\n", g_scratch.string().c_str());

    criterion_gradient_fidelity();
    criterion_metric_oracle();
    criterion_overfit();
    criterion_end_to_end();
    criterion_preset_audit();
    criterion_data_invariants();
    criterion_ensemble_invariants();
    criterion_determinism();

    if (g_failures == 0) {
        std::printf("all 8 criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}

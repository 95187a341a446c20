#include <iostream>

#include <CLI11.hpp>

#include "miniens/cli/commands.hpp"
#include "miniens/error.hpp"

// Experiment runner: prepare -> (tokenizer-train) -> train -> eval/predict.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
int main(int argc, char** argv) {
    CLI::App app{"miniens: desk-scale multilingual tweet sentiment experiments"};
    app.require_subcommand(1);

    miniens::cli::PrepareOptions prep;
    auto* prepare = app.add_subcommand("prepare", "Build train/dev/test splits from raw TSVs");
    prepare->add_option("--english-train", prep.english_train, "SemEval English train files")
        ->required();
    prepare->add_option("--english-dev", prep.english_dev, "SemEval English dev files (2013/14 test)")
        ->required();
    prepare->add_option("--english-test", prep.english_test, "SemEval English 2017 test file")
        ->required();
    prepare->add_option("--arabic-train", prep.arabic_train, "SemEval Arabic subtask train files")
        ->required();
    prepare->add_option("--astd", prep.astd, "ASTD file (text<TAB>label)")->required();
    prepare->add_option("--arabic-test", prep.arabic_test, "SemEval Arabic official test file")
        ->required();
    prepare->add_option("--out", prep.out, "Output directory")->required();
    prepare->add_option("--seed", prep.seed, "Shuffle seed for the Arabic 90/10 split");

    miniens::cli::TokenizerTrainOptions tok;
    auto* tokenizer = app.add_subcommand("tokenizer-train", "Train a BPE tokenizer for one model");
    tokenizer->add_option("--data", tok.data, "Prepared data directory")->required();
    tokenizer->add_option("--model", tok.model, "Encoder name, e.g. mini-roberta")->required();
    tokenizer->add_option("--vocab-size", tok.vocab_size, "Target vocabulary size");
    tokenizer->add_option("--out", tok.out, "Output directory (default under --data)");

    miniens::cli::TrainOptions tr;
    auto* train = app.add_subcommand("train", "Run one experiment");
    train->add_option("--config", tr.config, "Experiment config file")->required();
    train->add_option("--data", tr.data, "Prepared data directory")->required();
    train->add_option("--out", tr.out, "Run output directory")->required();
    train->add_option("--model", tr.model, "Override config model");
    train->add_option("--language", tr.language, "Override config language (ar|en|merged)");
    train->add_option("--epochs", tr.epochs, "Override epochs (desk-scale)");
    train->add_option("--batch-size", tr.batch_size, "Override batch size");
    train->add_option("--max-seq-len", tr.max_seq_len, "Override max sequence length");
    train->add_option("--vocab-size", tr.vocab_size, "Override tokenizer vocab size");
    train->add_option("--lr", tr.lr, "Override learning rate");
    train->add_option("--dropout", tr.dropout, "Override dropout probability");
    train->add_option("--seed", tr.seed, "Override seed (beats MINIENS_SEED)");

    miniens::cli::EvalOptions ev;
    auto* eval = app.add_subcommand("eval", "Evaluate runs on the test splits");
    eval->add_option("--data", ev.data, "Prepared data directory")->required();
    eval->add_option("--run", ev.runs, "Run directories (repeatable)")->required();
    eval->add_flag("--vote", ev.vote, "Add per-language majority-vote committee rows");
    eval->add_option("--out", ev.out, "Output directory")->required();
    eval->add_option("--batch-size", ev.batch_size, "Inference batch size");

    miniens::cli::PredictOptions pr;
    auto* predict = app.add_subcommand("predict", "Classify one text with a trained run");
    predict->add_option("--run", pr.run, "Run directory")->required();
    predict->add_option("--text", pr.text, "Input text")->required();
    predict->add_option("--language", pr.language, "ar or en")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*prepare) return miniens::cli::cmd_prepare(prep);
        if (*tokenizer) return miniens::cli::cmd_tokenizer_train(tok);
        if (*train) return miniens::cli::cmd_train(tr);
        if (*eval) return miniens::cli::cmd_eval(ev);
        if (*predict) return miniens::cli::cmd_predict(pr);
    } catch (const miniens::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

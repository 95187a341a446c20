#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "miniens/bpe/bpe.hpp"
#include "miniens/train/train.hpp"

namespace miniens::cli {

struct PrepareOptions {
    std::vector<std::filesystem::path> english_train;
    std::vector<std::filesystem::path> english_dev;
    std::filesystem::path english_test;
    std::vector<std::filesystem::path> arabic_train;
    std::filesystem::path astd;
    std::filesystem::path arabic_test;
    std::filesystem::path out;
    std::uint64_t seed = 42;
};

struct TokenizerTrainOptions {
    std::filesystem::path data;
    std::string model;
    int vocab_size = 2048;
    std::filesystem::path out;  // empty: <data>/tokenizers/<model>-v<size>
};

struct TrainOptions {
    std::filesystem::path config;
    std::filesystem::path data;
    std::filesystem::path out;
    std::optional<std::string> model;
    std::optional<std::string> language;
    std::optional<int> epochs;
    std::optional<int> batch_size;
    std::optional<int> max_seq_len;
    std::optional<int> vocab_size;
    std::optional<double> lr;
    std::optional<double> dropout;
    std::optional<std::uint64_t> seed;  // wins over MINIENS_SEED and the file
};

struct EvalOptions {
    std::filesystem::path data;
    std::vector<std::filesystem::path> runs;
    bool vote = false;
    std::filesystem::path out;
    int batch_size = 24;
};

struct PredictOptions {
    std::filesystem::path run;
    std::string text;
    std::string language;
};

int cmd_prepare(const PrepareOptions& opts);
int cmd_tokenizer_train(const TokenizerTrainOptions& opts);
int cmd_train(const TrainOptions& opts);
int cmd_eval(const EvalOptions& opts);
int cmd_predict(const PredictOptions& opts);

// Seed precedence: explicit --seed flag, then MINIENS_SEED, then the config.
std::uint64_t resolve_seed(std::uint64_t config_seed, std::optional<std::uint64_t> cli_flag);

// Shared by train/eval/predict: a run directory holds manifest.json,
// model.ckpt, trainlog.tsv and per-role tokenizers.
struct LoadedRun {
    train::ExperimentConfig config;
    std::string language;  // "ar", "en" or "merged"
    std::unique_ptr<train::SentimentModel> model;
    std::string system_label;
};

LoadedRun load_run(const std::filesystem::path& run_dir);

}  // namespace miniens::cli

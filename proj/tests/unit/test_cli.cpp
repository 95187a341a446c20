#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "miniens/cli/commands.hpp"
#include "miniens/cli/config.hpp"
#include "miniens/cli/manifest.hpp"
#include "miniens/error.hpp"
#include "test_helpers.hpp"

using miniens::cli::ConfigFile;
using miniens::cli::experiment_from_config;
using miniens::train::LossKind;

TEST_CASE("config file grammar") {
    const auto cfg = ConfigFile::parse_text(
        "# experiment knobs\n"
        "setup = 2\n"
        "model= ensemble-a\n"
        "lr =2e-5   # inline comment\n"
        "\n"
        "epochs = 2\n");
    CHECK(cfg.get_int("setup", 0) == 2);
    CHECK(cfg.get_str("model", "") == "ensemble-a");
    CHECK(cfg.get_double("lr", 0.0) == 2e-5);
    CHECK(cfg.get_int("epochs", 0) == 2);
    CHECK(!cfg.has("seed"));

    CHECK_THROWS_AS(ConfigFile::parse_text("setup 2\n"), miniens::InvalidArgument);
    CHECK_THROWS_AS(ConfigFile::parse_text("a = 1\na = 2\n"), miniens::InvalidArgument);
    CHECK_THROWS_AS(ConfigFile::parse_text("setup = \n"), miniens::InvalidArgument);
    CHECK_THROWS_AS(ConfigFile::parse_text("setup = x\n").get_int("setup", 0),
                    miniens::InvalidArgument);
}

TEST_CASE("experiment assembly applies setup defaults and rejects bad pairings") {
    const auto s1 = experiment_from_config(ConfigFile::parse_text("setup = 1\nmodel = mini-mbert\n"
                                                                  "language = en\n"));
    CHECK(s1.loss == LossKind::bce_logits);
    CHECK(s1.batch_size == 16);
    CHECK(s1.epochs == 3);

    CHECK_THROWS_AS(experiment_from_config(
                        ConfigFile::parse_text("setup = 1\nloss = cross_entropy\n")),
                    miniens::ConfigMismatch);
    CHECK_THROWS_AS(experiment_from_config(ConfigFile::parse_text("setup = 1\nbanana = 1\n")),
                    miniens::InvalidArgument);
    CHECK_THROWS_AS(experiment_from_config(ConfigFile::parse_text("setup = 1\nloss = mse\n")),
                    miniens::ConfigMismatch);
}

TEST_CASE("language scoping rules per setup") {
    using miniens::cli::config_language;
    CHECK(config_language(ConfigFile::parse_text("setup = 1\nlanguage = ar\n")) == "ar");
    CHECK(config_language(ConfigFile::parse_text("setup = 2\n")) == "merged");
    CHECK_THROWS_AS(config_language(ConfigFile::parse_text("setup = 2\nlanguage = en\n")),
                    miniens::ConfigMismatch);
    CHECK_THROWS_AS(config_language(ConfigFile::parse_text("setup = 1\n")),
                    miniens::ConfigMismatch);
    CHECK_THROWS_AS(config_language(ConfigFile::parse_text("setup = 3\nlanguage = fr\n")),
                    miniens::ConfigMismatch);
}

TEST_CASE("shipped presets encode the published hyperparameters") {
    const std::filesystem::path configs = std::filesystem::path(MINIENS_SOURCE_DIR) / "configs";
    struct Preset {
        const char* file;
        int setup;
        LossKind loss;
        int batch;
        int epochs;
    };
    const Preset presets[] = {
        {"setup1-en.cfg", 1, LossKind::bce_logits, 16, 3},
        {"setup1-ar.cfg", 1, LossKind::bce_logits, 16, 3},
        {"setup2-merged.cfg", 2, LossKind::cross_entropy, 24, 2},
        {"setup3-en.cfg", 3, LossKind::cross_entropy, 24, 2},
        {"setup3-ar.cfg", 3, LossKind::cross_entropy, 24, 2},
    };
    for (const auto& p : presets) {
        CAPTURE(p.file);
        const auto cfg = ConfigFile::parse_file(configs / p.file);
        const auto exp = experiment_from_config(cfg);
        CHECK(exp.setup == p.setup);
        CHECK(exp.loss == p.loss);
        CHECK(exp.lr == 2e-5);
        CHECK(exp.max_seq_len == 256);
        CHECK(exp.batch_size == p.batch);
        CHECK(exp.epochs == p.epochs);
        CHECK_NOTHROW(miniens::cli::config_language(cfg));
    }
}

TEST_CASE("seed precedence: flag beats MINIENS_SEED beats config") {
    unsetenv("MINIENS_SEED");
    CHECK(miniens::cli::resolve_seed(42, std::nullopt) == 42);
    setenv("MINIENS_SEED", "777", 1);
    CHECK(miniens::cli::resolve_seed(42, std::nullopt) == 777);
    CHECK(miniens::cli::resolve_seed(42, 9) == 9);
    setenv("MINIENS_SEED", "not-a-number", 1);
    CHECK_THROWS_AS(miniens::cli::resolve_seed(42, std::nullopt), miniens::InvalidArgument);
    unsetenv("MINIENS_SEED");
}

TEST_CASE("tokenizer-train writes a loadable vocabulary") {
    testutil::TempDir tmp("toktrain");
    testutil::write_file(tmp.path() / "data" / "en" / "train.tsv",
                         "1\tpositive\tgreat happy day\n2\tnegative\tawful sad day\n");
    testutil::write_file(tmp.path() / "data" / "ar" / "train.tsv",
                         "a1\tpositive\tجيد رائع\na2\tnegative\tسيء فظيع\n");

    miniens::cli::TokenizerTrainOptions opts;
    opts.data = tmp.path() / "data";
    opts.model = "mini-mbert";
    opts.vocab_size = 64;
    opts.out = tmp.path() / "tok";
    CHECK(miniens::cli::cmd_tokenizer_train(opts) == 0);
    const auto vocab = miniens::bpe::load_vocab(tmp.path() / "tok");
    CHECK(vocab.size() > 4);
    CHECK(vocab.size() <= 64);

    // monolingual recipe rejects a model with no rule
    opts.model = "no-such-model";
    CHECK_THROWS_AS(miniens::cli::cmd_tokenizer_train(opts), miniens::InvalidArgument);
}

TEST_CASE("error kinds map onto the documented exit codes") {
    CHECK(static_cast<int>(miniens::ErrorKind::usage) == 1);
    CHECK(static_cast<int>(miniens::ErrorKind::data) == 2);
    CHECK(static_cast<int>(miniens::ErrorKind::numeric) == 3);
    CHECK(miniens::ConfigMismatch("x").kind() == miniens::ErrorKind::usage);
    CHECK(miniens::MalformedRow("x").kind() == miniens::ErrorKind::data);
    CHECK(miniens::NumericError("x").kind() == miniens::ErrorKind::numeric);
}

TEST_CASE("manifest round-trip and digest stability") {
    testutil::TempDir tmp("manifest");
    testutil::write_file(tmp.path() / "input.tsv", "1\tpositive\thello\n");
    const std::string d1 = miniens::cli::file_digest_hex(tmp.path() / "input.tsv");
    const std::string d2 = miniens::cli::file_digest_hex(tmp.path() / "input.tsv");
    CHECK(d1 == d2);
    CHECK(d1.size() == 16);
    testutil::write_file(tmp.path() / "other.tsv", "1\tpositive\thellp\n");
    CHECK(miniens::cli::file_digest_hex(tmp.path() / "other.tsv") != d1);

    miniens::cli::RunManifest m;
    m.body["command"] = "train";
    m.body["seed"] = 42;
    m.write_atomic(tmp.path() / "manifest.json");
    CHECK(!std::filesystem::exists(tmp.path() / "manifest.json.tmp"));
    const auto back = miniens::cli::RunManifest::read(tmp.path() / "manifest.json");
    CHECK(back.body["command"] == "train");
    CHECK(back.body["seed"] == 42);
}

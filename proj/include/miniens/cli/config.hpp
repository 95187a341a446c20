#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "miniens/train/train.hpp"

namespace miniens::cli {

// Flat `key = value` experiment config. '#' starts a comment, blank lines
// are skipped, keys may not repeat.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::filesystem::path& path);
    static ConfigFile parse_text(std::string_view text, const std::string& origin = "<text>");

    bool has(const std::string& key) const { return values_.contains(key); }
    std::string get_str(const std::string& key, std::string fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

// Recognized keys: setup, model, language, loss, lr, batch_size, epochs,
// max_seq_len, seed, vocab_size, dropout. Unknown keys are rejected.
// Per-setup defaults fill whatever the file leaves out.
train::ExperimentConfig experiment_from_config(const ConfigFile& cfg);

// Language scope of a run: "ar", "en" or "merged" (setup 2 only).
std::string config_language(const ConfigFile& cfg);

}  // namespace miniens::cli

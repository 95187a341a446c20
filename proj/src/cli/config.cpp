#include "miniens/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "miniens/error.hpp"

namespace miniens::cli {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string_view::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MissingData("cannot open config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str(), path.string());
}

ConfigFile ConfigFile::parse_text(std::string_view text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": empty key or value");
        }
        if (!cfg.values_.emplace(key, value).second) {
            throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  key + "'");
        }
    }
    return cfg;
}

std::string ConfigFile::get_str(const std::string& key, std::string fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? std::move(fallback) : it->second;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t used = 0;
        const int v = std::stoi(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument(origin_ + ": key '" + key + "' is not an integer: " + it->second);
    }
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument(origin_ + ": key '" + key + "' is not a number: " + it->second);
    }
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument(origin_ + ": key '" + key + "' is not an unsigned integer: " +
                              it->second);
    }
}

train::ExperimentConfig experiment_from_config(const ConfigFile& cfg) {
    static const std::set<std::string> kKnown{"setup",       "model",    "language", "loss",
                                              "lr",          "batch_size", "epochs",
                                              "max_seq_len", "seed",     "vocab_size", "dropout"};
    for (const auto& [key, _] : cfg.values()) {
        if (!kKnown.contains(key)) {
            throw InvalidArgument("unknown config key '" + key + "'");
        }
    }

    const int setup = cfg.get_int("setup", 1);
    train::ExperimentConfig exp = train::ExperimentConfig::for_setup(setup);
    exp.model = cfg.get_str("model", exp.model);
    if (cfg.has("loss")) exp.loss = train::parse_loss(cfg.get_str("loss", ""));
    exp.lr = cfg.get_double("lr", exp.lr);
    exp.batch_size = cfg.get_int("batch_size", exp.batch_size);
    exp.epochs = cfg.get_int("epochs", exp.epochs);
    exp.max_seq_len = cfg.get_int("max_seq_len", exp.max_seq_len);
    exp.seed = cfg.get_u64("seed", exp.seed);
    exp.vocab_size = cfg.get_int("vocab_size", exp.vocab_size);
    exp.dropout_p = cfg.get_double("dropout", exp.dropout_p);
    exp.validate();
    return exp;
}

std::string config_language(const ConfigFile& cfg) {
    const int setup = cfg.get_int("setup", 1);
    const std::string lang = cfg.get_str("language", setup == 2 ? "merged" : "");
    if (setup == 2) {
        if (lang != "merged") {
            throw ConfigMismatch("setup 2 trains on merged data; language must be 'merged'");
        }
        return lang;
    }
    if (lang != "ar" && lang != "en") {
        throw ConfigMismatch("setup " + std::to_string(setup) +
                             " needs language = ar or en, got '" + lang + "'");
    }
    return lang;
}

}  // namespace miniens::cli

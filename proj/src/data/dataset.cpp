#include "miniens/data/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "miniens/error.hpp"
#include "miniens/rng.hpp"
#include "miniens/text/clean.hpp"

namespace miniens::data {

namespace {

std::string ascii_lower(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

std::string location(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MissingData("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void check_unique_ids(const std::vector<Example>& examples, const std::string& what) {
    std::unordered_set<std::string> seen;
    for (const auto& e : examples) {
        if (!seen.insert(e.id).second) {
            throw MalformedRow("duplicate id '" + e.id + "' in " + what);
        }
    }
}

void check_disjoint_and_leaks(const DatasetBundle& bundle) {
    check_unique_ids(bundle.train, "train split");
    check_unique_ids(bundle.dev, "dev split");
    check_unique_ids(bundle.test, "test split");

    std::unordered_set<std::string> train_dev_ids;
    std::unordered_set<std::string> train_dev_keys;
    for (const auto& e : bundle.train) {
        train_dev_ids.insert(e.id);
        train_dev_keys.insert(dedup_key(e.text));
    }
    for (const auto& e : bundle.dev) {
        if (!train_dev_ids.insert(e.id).second) {
            throw MalformedRow("id '" + e.id + "' appears in both train and dev");
        }
        train_dev_keys.insert(dedup_key(e.text));
    }
    for (const auto& e : bundle.test) {
        if (train_dev_ids.contains(e.id)) {
            throw MalformedRow("test id '" + e.id + "' appears in train/dev");
        }
        if (train_dev_keys.contains(dedup_key(e.text))) {
            throw DuplicateTestLeak("test text with id '" + e.id +
                                    "' appears in train/dev after normalization");
        }
    }
}

}  // namespace

std::string_view label_name(Label label) {
    switch (label) {
        case Label::positive: return "positive";
        case Label::negative: return "negative";
        case Label::neutral: return "neutral";
    }
    return "neutral";
}

std::vector<Example> load_semeval(const std::filesystem::path& path, model::Language language) {
    const auto lines = read_lines(path);
    std::vector<Example> out;
    out.reserve(lines.size());
    const std::string source = path.stem().string();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos || tab1 == 0) {
            throw MalformedRow(location(path, i + 1) + ": expected id<TAB>label<TAB>text");
        }
        Example e;
        e.id = line.substr(0, tab1);
        const std::string label = ascii_lower(line.substr(tab1 + 1, tab2 - tab1 - 1));
        if (label == "positive") {
            e.label = Label::positive;
        } else if (label == "negative") {
            e.label = Label::negative;
        } else if (label == "neutral") {
            e.label = Label::neutral;
        } else {
            throw UnknownLabel(location(path, i + 1) + ": '" + label + "'");
        }
        e.text = line.substr(tab2 + 1);
        e.language = language;
        e.source = source;
        out.push_back(std::move(e));
    }
    check_unique_ids(out, path.string());
    return out;
}

std::vector<Example> load_astd(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    std::vector<Example> out;
    const std::string source = path.stem().string();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos || tab + 1 >= line.size()) {
            throw MalformedRow(location(path, i + 1) + ": expected text<TAB>label");
        }
        const std::string label = line.substr(tab + 1);
        if (label == "OBJ") continue;  // the fourth class is dropped for consistency
        Example e;
        if (label == "POS") {
            e.label = Label::positive;
        } else if (label == "NEG") {
            e.label = Label::negative;
        } else if (label == "NEUTRAL") {
            e.label = Label::neutral;
        } else {
            throw UnknownLabel(location(path, i + 1) + ": '" + label + "'");
        }
        e.id = "astd-" + std::to_string(i + 1);
        e.text = line.substr(0, tab);
        e.language = model::Language::ar;
        e.source = source;
        out.push_back(std::move(e));
    }
    return out;
}

std::string dedup_key(const std::string& raw_text) {
    return ascii_lower(text::clean_text(raw_text).content);
}

DatasetBundle build_arabic_bundle(const std::vector<std::filesystem::path>& semeval_train_paths,
                                  const std::filesystem::path& astd_path,
                                  const std::filesystem::path& test_path, std::uint64_t seed) {
    std::vector<Example> merged;
    for (const auto& p : semeval_train_paths) {
        auto part = load_semeval(p, model::Language::ar);
        merged.insert(merged.end(), std::make_move_iterator(part.begin()),
                      std::make_move_iterator(part.end()));
    }
    {
        auto astd = load_astd(astd_path);
        merged.insert(merged.end(), std::make_move_iterator(astd.begin()),
                      std::make_move_iterator(astd.end()));
    }

    // Merged Arabic sources overlap; keep the first occurrence of each
    // normalized text so the 90/10 split stays independent.
    std::vector<Example> unique;
    unique.reserve(merged.size());
    std::unordered_set<std::string> seen;
    for (auto& e : merged) {
        if (seen.insert(dedup_key(e.text)).second) unique.push_back(std::move(e));
    }

    Rng rng(seed);
    const auto order = shuffled_indices(unique.size(), rng);
    const std::size_t dev_n = unique.size() / 10;
    const std::size_t train_n = unique.size() - dev_n;

    DatasetBundle bundle;
    bundle.train.reserve(train_n);
    bundle.dev.reserve(dev_n);
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& dst = i < train_n ? bundle.train : bundle.dev;
        dst.push_back(std::move(unique[order[i]]));
    }
    bundle.test = load_semeval(test_path, model::Language::ar);

    check_disjoint_and_leaks(bundle);
    return bundle;
}

DatasetBundle build_english_bundle(const std::vector<std::filesystem::path>& train_paths,
                                   const std::vector<std::filesystem::path>& dev_paths,
                                   const std::filesystem::path& test_path) {
    DatasetBundle bundle;
    for (const auto& p : dev_paths) {
        auto part = load_semeval(p, model::Language::en);
        bundle.dev.insert(bundle.dev.end(), std::make_move_iterator(part.begin()),
                          std::make_move_iterator(part.end()));
    }
    std::unordered_set<std::string> dev_ids;
    for (const auto& e : bundle.dev) dev_ids.insert(e.id);

    for (const auto& p : train_paths) {
        for (auto& e : load_semeval(p, model::Language::en)) {
            if (dev_ids.contains(e.id)) continue;  // excluded development rows
            bundle.train.push_back(std::move(e));
        }
    }
    bundle.test = load_semeval(test_path, model::Language::en);

    check_disjoint_and_leaks(bundle);
    return bundle;
}

void save_split(const std::vector<Example>& examples, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw MissingData("cannot write " + path.string());
    for (const auto& e : examples) {
        f << e.id << '\t' << label_name(e.label) << '\t' << e.text << '\n';
    }
}

}  // namespace miniens::data

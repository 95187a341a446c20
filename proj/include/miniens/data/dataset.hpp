#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "miniens/model/encoder.hpp"

namespace miniens::data {

// Index order matches the prediction/metrics convention.
enum class Label { positive = 0, negative = 1, neutral = 2 };

std::string_view label_name(Label label);

struct Example {
    std::string id;
    std::string text;  // raw; cleaning happens downstream
    model::Language language = model::Language::en;
    Label label = Label::neutral;
    std::string source;  // provenance tag (input file stem)
};

struct DatasetBundle {
    std::vector<Example> train;
    std::vector<Example> dev;
    std::vector<Example> test;
};

// SemEval rows: id<TAB>label<TAB>text, label in {positive, negative,
// neutral} case-insensitive. The text field may contain further tabs.
std::vector<Example> load_semeval(const std::filesystem::path& path, model::Language language);

// ASTD rows: text<TAB>label, label in {OBJ, POS, NEG, NEUTRAL}. OBJ rows are
// dropped; ids are synthesized as astd-<line>; language is Arabic.
std::vector<Example> load_astd(const std::filesystem::path& path);

// Deduplication / leak-detection key: cleaned text, ASCII-lowercased.
std::string dedup_key(const std::string& raw_text);

// Merges the SemEval Arabic subtask files with ASTD, deduplicates by
// normalized text (first occurrence wins), shuffles with the seed and splits
// 90/10 (dev gets floor(N/10)). The official test file stays untouched;
// a normalized test text found in train/dev raises DuplicateTestLeak.
DatasetBundle build_arabic_bundle(const std::vector<std::filesystem::path>& semeval_train_paths,
                                  const std::filesystem::path& astd_path,
                                  const std::filesystem::path& test_path, std::uint64_t seed);

// train = union of the train files minus (by id) the dev files' rows;
// dev = union of the dev files; test = the test file. Order is file order.
DatasetBundle build_english_bundle(const std::vector<std::filesystem::path>& train_paths,
                                   const std::vector<std::filesystem::path>& dev_paths,
                                   const std::filesystem::path& test_path);

// Materialized splits use the SemEval row format with lowercase labels.
void save_split(const std::vector<Example>& examples, const std::filesystem::path& path);

}  // namespace miniens::data

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace miniens::metrics {

inline constexpr int kClasses = 3;

// Rows are gold classes, columns predicted classes (0=Positive, 1=Negative,
// 2=Neutral). An all-zero matrix is valid; report() rejects it.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, kClasses>, kClasses> counts{};

    std::int64_t total() const;
    std::int64_t support(int gold_class) const;   // row sum
    std::int64_t predicted(int pred_class) const; // column sum
};

struct PerClass {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct MetricsReport {
    double accuracy = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double macro_f1 = 0.0;
    std::array<PerClass, kClasses> per_class{};
};

ConfusionMatrix confusion(const std::vector<int>& gold, const std::vector<int>& pred);

// Zero-denominator precision/recall score 0 (not NaN); F1 is 0 when both are
// 0; macro F1 averages over all three classes whether or not they occur.
MetricsReport report(const ConfusionMatrix& cm);

// Single TSV row: acc, weighted P, weighted R, macro F1 (17 significant
// digits, tab separated).
std::string report_tsv_row(const MetricsReport& r);

// One evaluated system in the results table.
struct ResultRow {
    std::string system;
    std::string language;  // "en", "ar" or "all"
    MetricsReport metrics;
};

// Aligned plain-text table grouped by language; the best macro-F1 system of
// each language group is marked with '*'.
std::string render_results_table(const std::vector<ResultRow>& rows);

}  // namespace miniens::metrics

#include "miniens/metrics/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "miniens/error.hpp"

namespace miniens::metrics {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts) {
        for (const auto c : row) t += c;
    }
    return t;
}

std::int64_t ConfusionMatrix::support(int gold_class) const {
    std::int64_t t = 0;
    for (const auto c : counts[static_cast<std::size_t>(gold_class)]) t += c;
    return t;
}

std::int64_t ConfusionMatrix::predicted(int pred_class) const {
    std::int64_t t = 0;
    for (const auto& row : counts) t += row[static_cast<std::size_t>(pred_class)];
    return t;
}

ConfusionMatrix confusion(const std::vector<int>& gold, const std::vector<int>& pred) {
    if (gold.size() != pred.size()) {
        throw LengthMismatch("confusion: " + std::to_string(gold.size()) + " gold vs " +
                             std::to_string(pred.size()) + " predicted labels");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] < 0 || gold[i] >= kClasses || pred[i] < 0 || pred[i] >= kClasses) {
            throw InvalidArgument("label outside the 3-class set at position " + std::to_string(i));
        }
        ++cm.counts[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(pred[i])];
    }
    return cm;
}

MetricsReport report(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) throw EmptyEvaluation("no examples evaluated");

    MetricsReport r;
    std::int64_t trace = 0;
    double weighted_p = 0.0, weighted_r = 0.0, macro_f1 = 0.0;
    for (int c = 0; c < kClasses; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const std::int64_t tp = cm.counts[cc][cc];
        const std::int64_t support = cm.support(c);
        const std::int64_t predicted = cm.predicted(c);
        trace += tp;

        PerClass& pc = r.per_class[cc];
        pc.support = support;
        pc.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
        pc.recall = support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(support);
        pc.f1 = (pc.precision + pc.recall) == 0.0
                    ? 0.0
                    : 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall);

        weighted_p += static_cast<double>(support) * pc.precision;
        weighted_r += static_cast<double>(support) * pc.recall;
        macro_f1 += pc.f1;
    }
    r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    r.weighted_precision = weighted_p / static_cast<double>(total);
    r.weighted_recall = weighted_r / static_cast<double>(total);
    r.macro_f1 = macro_f1 / kClasses;
    return r;
}

std::string report_tsv_row(const MetricsReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%.17g\t%.17g", r.accuracy,
                  r.weighted_precision, r.weighted_recall, r.macro_f1);
    return buf;
}

std::string render_results_table(const std::vector<ResultRow>& rows) {
    std::size_t name_width = 6;
    for (const auto& row : rows) name_width = std::max(name_width, row.system.size());

    // Preserve first-seen language order; mark the best macro F1 per group.
    std::vector<std::string> langs;
    for (const auto& row : rows) {
        if (std::find(langs.begin(), langs.end(), row.language) == langs.end()) {
            langs.push_back(row.language);
        }
    }

    std::ostringstream os;
    char buf[256];
    for (const auto& lang : langs) {
        double best_f1 = -1.0;
        for (const auto& row : rows) {
            if (row.language == lang) best_f1 = std::max(best_f1, row.metrics.macro_f1);
        }
        os << "== language: " << lang << "\n";
        std::snprintf(buf, sizeof(buf), "%-*s  %8s  %8s  %8s  %8s\n",
                      static_cast<int>(name_width + 1), "system", "acc", "w-prec", "w-rec",
                      "macro-f1");
        os << buf;
        for (const auto& row : rows) {
            if (row.language != lang) continue;
            const bool best = row.metrics.macro_f1 == best_f1;
            std::snprintf(buf, sizeof(buf), "%-*s%s  %8.4f  %8.4f  %8.4f  %8.4f\n",
                          static_cast<int>(name_width), row.system.c_str(), best ? "*" : " ",
                          row.metrics.accuracy, row.metrics.weighted_precision,
                          row.metrics.weighted_recall, row.metrics.macro_f1);
            os << buf;
        }
    }
    return os.str();
}

}  // namespace miniens::metrics

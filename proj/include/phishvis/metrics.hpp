#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "phishvis/error.hpp"
#include "phishvis/types.hpp"

namespace phishvis::metrics {

/// Phishing is the positive class.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }

    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
        tp += o.tp;
        tn += o.tn;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Prediction {
    Label predicted = Label::Legitimate;
    Label actual = Label::Legitimate;
};

struct CategorizedPrediction {
    Prediction pair;
    std::string category;
};

inline void tally(ConfusionCounts& c, const Prediction& p) noexcept {
    if (p.actual == Label::Phishing) {
        (p.predicted == Label::Phishing ? c.tp : c.fn) += 1;
    } else {
        (p.predicted == Label::Phishing ? c.fp : c.tn) += 1;
    }
}

inline ConfusionCounts confusion(std::span<const Prediction> pairs) noexcept {
    ConfusionCounts c;
    for (const auto& p : pairs) tally(c, p);
    return c;
}

inline double ratio(std::uint64_t num, std::uint64_t den, const char* what) {
    if (den == 0) throw Error(ErrorKind::Undefined, std::string(what) + " has a zero denominator");
    return static_cast<double>(num) / static_cast<double>(den);
}

inline double accuracy(const ConfusionCounts& c) { return ratio(c.tp + c.tn, c.total(), "accuracy"); }
inline double precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp, "precision"); }
inline double recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn, "recall"); }

inline double f1(double p, double r) {
    if (!(p + r > 0.0)) throw Error(ErrorKind::Undefined, "f1 with precision + recall == 0");
    return 2.0 * p * r / (p + r);
}

/// A metric value, or nullopt when its denominator is zero.
using Metric = std::optional<double>;

template <class F>
Metric defined(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Undefined) throw;
        return std::nullopt;
    }
}

struct OverallMetrics {
    Metric accuracy;
    Metric precision;
    Metric recall;
    Metric f1;
    ConfusionCounts counts;
};

struct CategoryMetrics {
    std::string name;
    Metric accuracy;
    Metric precision;
    std::uint64_t n = 0;
    ConfusionCounts counts;
};

struct EvalReport {
    OverallMetrics overall;
    std::vector<CategoryMetrics> per_category; ///< sorted by name
};

inline OverallMetrics overall_metrics(const ConfusionCounts& c) {
    OverallMetrics m;
    m.counts = c;
    m.accuracy = defined([&] { return accuracy(c); });
    m.precision = defined([&] { return precision(c); });
    m.recall = defined([&] { return recall(c); });
    if (m.precision && m.recall) m.f1 = defined([&] { return f1(*m.precision, *m.recall); });
    return m;
}

inline EvalReport per_category_report(std::span<const CategorizedPrediction> items) {
    std::map<std::string, ConfusionCounts> by_category;
    ConfusionCounts all;
    for (const auto& it : items) {
        tally(by_category[it.category], it.pair);
        tally(all, it.pair);
    }
    EvalReport r;
    r.overall = overall_metrics(all);
    for (const auto& [name, c] : by_category) {
        if (c.total() == 0) continue;
        r.per_category.push_back({name, defined([&] { return accuracy(c); }), defined([&] { return precision(c); }), c.total(), c});
    }
    return r;
}

/// Percentage with two decimals, halves rounded up: 0.857142 -> "85.71%".
inline std::string format_percent(const Metric& m) {
    if (!m) return "undefined";
    const auto hundredths = static_cast<long long>(std::floor(*m * 10000.0 + 0.5));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld%%", hundredths / 100, hundredths % 100);
    return buf;
}

inline nlohmann::ordered_json metric_json(const Metric& m) {
    return m ? nlohmann::ordered_json(*m) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& c : r.per_category) {
        per.push_back({{"name", c.name}, {"accuracy", metric_json(c.accuracy)}, {"precision", metric_json(c.precision)}, {"n", c.n}});
    }
    const auto& o = r.overall;
    return {{"overall",
             {{"accuracy", metric_json(o.accuracy)},
              {"precision", metric_json(o.precision)},
              {"recall", metric_json(o.recall)},
              {"f1", metric_json(o.f1)},
              {"counts", {{"tp", o.counts.tp}, {"tn", o.counts.tn}, {"fp", o.counts.fp}, {"fn", o.counts.fn}}}}},
            {"per_category", per}};
}

inline std::string to_table(const EvalReport& r) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %6s %10s %10s\n", "category", "n", "accuracy", "precision");
    out += line;
    for (const auto& c : r.per_category) {
        std::snprintf(line, sizeof line, "%-28s %6llu %10s %10s\n", c.name.c_str(), static_cast<unsigned long long>(c.n),
                      format_percent(c.accuracy).c_str(), format_percent(c.precision).c_str());
        out += line;
    }
    const auto& o = r.overall;
    std::snprintf(line, sizeof line, "\noverall: accuracy %s  precision %s  recall %s  f1 %s\n", format_percent(o.accuracy).c_str(),
                  format_percent(o.precision).c_str(), format_percent(o.recall).c_str(), format_percent(o.f1).c_str());
    out += line;
    std::snprintf(line, sizeof line, "counts: tp %llu  tn %llu  fp %llu  fn %llu\n", static_cast<unsigned long long>(o.counts.tp),
                  static_cast<unsigned long long>(o.counts.tn), static_cast<unsigned long long>(o.counts.fp),
                  static_cast<unsigned long long>(o.counts.fn));
    out += line;
    return out;
}

} // namespace phishvis::metrics

#pragma once

// URL check flow: dedupe lookup, then fetch -> render -> classify -> record.

#include <atomic>
#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "phishvis/bytevis.hpp"
#include "phishvis/classifier.hpp"
#include "phishvis/digest.hpp"
#include "phishvis/fetcher.hpp"
#include "phishvis/hilbert.hpp"
#include "phishvis/png.hpp"
#include "phishvis/store.hpp"

namespace phishvis {

/// Milliseconds spent in each stage that actually ran, in execution order.
using StageTimings = std::vector<std::pair<std::string, double>>;

struct CheckResult {
    NormalizedUrl url;
    bool cached = false;
    nn::Verdict verdict;
    std::string image_path;
    StageTimings timings;

    double stage_ms(std::string_view stage) const {
        for (const auto& [name, ms] : timings) {
            if (name == stage) return ms;
        }
        return 0.0;
    }
};

inline nlohmann::ordered_json to_json(const CheckResult& r) {
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [name, ms] : r.timings) t[name] = ms;
    return {{"url", r.url.str()},
            {"cached", r.cached},
            {"label", to_string(r.verdict.label)},
            {"confidence", r.verdict.confidence},
            {"image", r.image_path},
            {"timings_ms", t}};
}

struct PipelineCounters {
    std::atomic<std::uint64_t> lookups{0};
    std::atomic<std::uint64_t> fetches{0};
    std::atomic<std::uint64_t> renders{0};
    std::atomic<std::uint64_t> predictions{0};
};

class Pipeline {
public:
    Pipeline(Store& store, nn::Model model, FetchConfig fetch_cfg = {})
        : store_(store), model_(std::move(model)), fetch_cfg_(std::move(fetch_cfg)) {}

    /// Check one URL. A stored record is served without fetching or
    /// rendering unless `force` is set.
    CheckResult check(std::string_view raw_url, bool force = false) {
        using clock = std::chrono::steady_clock;
        CheckResult result;
        auto t0 = clock::now();
        auto lap = [&](const char* stage) {
            const auto t1 = clock::now();
            result.timings.emplace_back(stage, std::chrono::duration<double, std::milli>(t1 - t0).count());
            t0 = t1;
        };

        result.url = normalize_url(raw_url);
        ++counters_.lookups;
        const auto hit = force ? std::nullopt : store_.lookup(result.url);
        lap("lookup");
        if (hit) {
            result.cached = true;
            result.verdict = {hit->label, hit->confidence};
            result.image_path = hit->image_path;
            return result;
        }

        ++counters_.fetches;
        const PageContent page = fetch(result.url, fetch_cfg_);
        lap("fetch");

        ++counters_.renders;
        const VisImage image = render(page.body, hilbert::CurveOrder{});
        const Bytes png = encode_png(image);
        lap("render");

        ++counters_.predictions;
        result.verdict = nn::predict(model_, nn::downsample(image, model_.input_side()));
        lap("classify");

        result.image_path = store_.put_image(png);
        store_.put(UrlRecord{result.url, content_digest(page.body),
                             std::chrono::time_point_cast<std::chrono::seconds>(page.fetched_at), result.verdict.label,
                             result.verdict.confidence, result.image_path});
        lap("store");
        return result;
    }

    const PipelineCounters& counters() const noexcept { return counters_; }
    const nn::Model& model() const noexcept { return model_; }

private:
    Store& store_;
    nn::Model model_;
    FetchConfig fetch_cfg_;
    PipelineCounters counters_;
};

} // namespace phishvis

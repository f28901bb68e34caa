#pragma once

// Bridges manifests on disk and the classifier: loads labelled images,
// trains, and evaluates.

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "phishvis/classifier.hpp"
#include "phishvis/digest.hpp"
#include "phishvis/error.hpp"
#include "phishvis/metrics.hpp"
#include "phishvis/png.hpp"
#include "phishvis/store.hpp"

namespace phishvis {

/// Samples whose split matches `split`. Samples without a split tag are kept.
inline std::vector<Sample> select_split(std::span<const Sample> samples, std::optional<Split> split) {
    std::vector<Sample> out;
    for (const auto& s : samples) {
        if (!split || !s.split || *s.split == *split) out.push_back(s);
    }
    return out;
}

/// Decode a sample's image, verify its digest and scale it to `input_side`.
inline VisImage load_sample_image(const std::filesystem::path& manifest, const Sample& sample, std::uint32_t input_side) {
    const Bytes png = read_file(resolve_sample_path(manifest, sample));
    if (content_digest(png) != sample.digest) {
        throw Error(ErrorKind::StoreCorrupt, "digest mismatch for " + sample.path);
    }
    return nn::downsample(decode_png(png), input_side);
}

inline std::vector<nn::Example> load_examples(const std::filesystem::path& manifest, std::span<const Sample> samples, std::uint32_t input_side) {
    std::vector<nn::Example> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back({nn::to_tensor(load_sample_image(manifest, s, input_side)), s.label});
    }
    return out;
}

inline nn::Model train(const std::filesystem::path& manifest, std::span<const Sample> samples, const nn::TrainConfig& cfg,
                       nn::TrainingLog* log = nullptr) {
    cfg.validate();
    if (samples.empty()) throw Error(ErrorKind::DegenerateDataset, "no training samples");
    const auto examples = load_examples(manifest, samples, cfg.input_side);
    return nn::train(examples, cfg, log);
}

inline metrics::EvalReport evaluate(const nn::Model& model, const std::filesystem::path& manifest, std::span<const Sample> samples) {
    std::vector<metrics::CategorizedPrediction> items;
    items.reserve(samples.size());
    for (const auto& s : samples) {
        const auto v = nn::predict(model, load_sample_image(manifest, s, model.input_side()));
        items.push_back({{v.label, s.label}, s.category});
    }
    return metrics::per_category_report(items);
}

} // namespace phishvis

#pragma once

// URL cache and dataset manifests, both stored as append-only JSON lines.
//
// records.jsonl: {"url","digest","fetched_at","label","confidence","image"}
// manifest:      {"path","label","category","source_url","digest"[,"split"]}
//
// A torn final line (no trailing newline, unparsable) is dropped with a
// warning on open; any other unparsable line is corruption.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"

#include "phishvis/bytevis.hpp"
#include "phishvis/digest.hpp"
#include "phishvis/error.hpp"
#include "phishvis/fetcher.hpp"
#include "phishvis/io.hpp"
#include "phishvis/types.hpp"

namespace phishvis {

namespace fs = std::filesystem;
using Timestamp = std::chrono::sys_seconds;

inline std::string format_rfc3339(Timestamp t) {
    const std::time_t tt = t.time_since_epoch().count();
    std::tm tm{};
    ::gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Accepts the UTC "YYYY-MM-DDTHH:MM:SSZ" form written by format_rfc3339.
inline std::optional<Timestamp> parse_rfc3339(const std::string& s) {
    std::tm tm{};
    char tail = 0;
    if (s.size() != 20 ||
        std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                    &tm.tm_sec, &tail) != 7 ||
        tail != 'Z') {
        return std::nullopt;
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return Timestamp{std::chrono::seconds{::timegm(&tm)}};
}

inline Timestamp now_utc() {
    return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

struct UrlRecord {
    NormalizedUrl url;
    std::string content_digest;
    Timestamp fetched_at{};
    Label label = Label::Legitimate;
    double confidence = 0.0;
    std::string image_path; ///< relative to the store root

    friend bool operator==(const UrlRecord&, const UrlRecord&) = default;
};

inline nlohmann::ordered_json to_json(const UrlRecord& r) {
    return {{"url", r.url.str()},
            {"digest", r.content_digest},
            {"fetched_at", format_rfc3339(r.fetched_at)},
            {"label", to_string(r.label)},
            {"confidence", r.confidence},
            {"image", r.image_path}};
}

enum class Split : std::uint8_t { Train, Test };

constexpr std::string_view to_string(Split s) noexcept { return s == Split::Train ? "train" : "test"; }

struct Sample {
    std::string path; ///< image path, relative to the manifest's directory unless absolute
    Label label = Label::Legitimate;
    std::string category;
    std::optional<std::string> source_url;
    std::string digest;
    std::optional<Split> split;

    friend bool operator==(const Sample&, const Sample&) = default;
};

inline nlohmann::ordered_json to_json(const Sample& s) {
    nlohmann::ordered_json j = {{"path", s.path},
                                {"label", to_string(s.label)},
                                {"category", s.category},
                                {"source_url", s.source_url ? nlohmann::ordered_json(*s.source_url) : nlohmann::ordered_json(nullptr)},
                                {"digest", s.digest}};
    if (s.split) j["split"] = to_string(*s.split);
    return j;
}

namespace store_detail {

inline void validate(const UrlRecord& r) {
    if (!is_digest(r.content_digest)) {
        throw Error(ErrorKind::InvalidInput, "record digest must be 64 lowercase hex characters");
    }
    if (!std::isfinite(r.confidence) || r.confidence < 0.0 || r.confidence > 1.0) {
        throw Error(ErrorKind::InvalidInput, "record confidence " + std::to_string(r.confidence) + " outside [0, 1]");
    }
    if (r.image_path.empty()) throw Error(ErrorKind::InvalidInput, "record has no image path");
}

inline UrlRecord record_from_json(const nlohmann::json& j) {
    UrlRecord r;
    r.url = normalize_url(j.at("url").get<std::string>());
    r.content_digest = j.at("digest").get<std::string>();
    auto ts = parse_rfc3339(j.at("fetched_at").get<std::string>());
    if (!ts) throw Error(ErrorKind::InvalidInput, "bad timestamp");
    r.fetched_at = *ts;
    r.label = parse_label(j.at("label").get<std::string>());
    r.confidence = j.at("confidence").get<double>();
    r.image_path = j.at("image").get<std::string>();
    validate(r);
    return r;
}

inline Sample sample_from_json(const nlohmann::json& j) {
    Sample s;
    s.path = j.at("path").get<std::string>();
    if (s.path.empty()) throw Error(ErrorKind::InvalidInput, "empty path");
    s.label = parse_label(j.at("label").get<std::string>());
    s.category = j.at("category").get<std::string>();
    if (j.contains("source_url") && !j["source_url"].is_null()) s.source_url = j["source_url"].get<std::string>();
    s.digest = j.at("digest").get<std::string>();
    if (!is_digest(s.digest)) throw Error(ErrorKind::InvalidInput, "bad digest");
    if (j.contains("split")) {
        const auto v = j["split"].get<std::string>();
        if (v == "train") {
            s.split = Split::Train;
        } else if (v == "test") {
            s.split = Split::Test;
        } else {
            throw Error(ErrorKind::InvalidInput, "split must be train or test");
        }
    }
    return s;
}

/// fsync'd single-line append.
inline void append_line(const fs::path& path, const std::string& line) {
    std::FILE* f = std::fopen(path.c_str(), "ab");
    if (f == nullptr) throw Error(ErrorKind::StoreWriteFailed, "cannot open " + path.string() + " for append");
    const std::string data = line + "\n";
    const bool ok = std::fwrite(data.data(), 1, data.size(), f) == data.size() && std::fflush(f) == 0 && ::fsync(::fileno(f)) == 0;
    std::fclose(f);
    if (!ok) throw Error(ErrorKind::StoreWriteFailed, "short write to " + path.string());
}

} // namespace store_detail

/// Persistent URL -> verdict cache with content-addressed images.
/// One writer at a time; lookups may run concurrently with each other.
class Store {
public:
    static constexpr const char* records_file = "records.jsonl";
    static constexpr const char* images_dir = "images";

    explicit Store(fs::path root) : root_(std::move(root)) {
        std::error_code ec;
        fs::create_directories(root_ / images_dir, ec);
        if (ec) throw Error(ErrorKind::StoreWriteFailed, "cannot create store at " + root_.string() + ": " + ec.message());
        load();
    }

    /// $PHISHVIS_HOME, falling back to ./phishvis-data.
    static fs::path default_root() {
        const char* env = std::getenv("PHISHVIS_HOME");
        return (env != nullptr && *env != '\0') ? fs::path(env) : fs::path("phishvis-data");
    }

    const fs::path& root() const noexcept { return root_; }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return records_.size();
    }

    std::vector<UrlRecord> records() const {
        std::shared_lock lock(mutex_);
        return records_;
    }

    std::optional<UrlRecord> lookup(const NormalizedUrl& url) const {
        std::shared_lock lock(mutex_);
        const auto it = latest_.find(url.str());
        if (it == latest_.end()) return std::nullopt;
        return records_[it->second];
    }

    void put(const UrlRecord& record) {
        store_detail::validate(record);
        if (!fs::exists(root_ / record.image_path)) {
            throw Error(ErrorKind::InvalidInput, "record image " + record.image_path + " does not exist in store");
        }
        std::unique_lock lock(mutex_);
        store_detail::append_line(root_ / records_file, to_json(record).dump());
        latest_[record.url.str()] = records_.size();
        records_.push_back(record);
    }

    /// Store PNG bytes under their digest; returns the path relative to root.
    std::string put_image(ByteView png) {
        const std::string rel = std::string(images_dir) + "/" + content_digest(png) + ".png";
        const fs::path full = root_ / rel;
        std::unique_lock lock(mutex_);
        if (!fs::exists(full)) write_file(full, png);
        return rel;
    }

private:
    void load() {
        const fs::path file = root_ / records_file;
        if (!fs::exists(file)) return;
        const Bytes data = read_file(file);
        std::size_t start = 0;
        std::size_t line_no = 0;
        while (start < data.size()) {
            ++line_no;
            auto nl = std::find(data.begin() + static_cast<std::ptrdiff_t>(start), data.end(), '\n');
            const bool complete = nl != data.end();
            const std::size_t end = static_cast<std::size_t>(nl - data.begin());
            const std::string line(data.begin() + static_cast<std::ptrdiff_t>(start), data.begin() + static_cast<std::ptrdiff_t>(end));
            if (!line.empty()) {
                try {
                    UrlRecord r = store_detail::record_from_json(nlohmann::json::parse(line));
                    latest_[r.url.str()] = records_.size();
                    records_.push_back(std::move(r));
                } catch (const std::exception& e) {
                    if (complete) {
                        throw Error(ErrorKind::StoreCorrupt, file.string() + " line " + std::to_string(line_no) + ": " + e.what(),
                                    static_cast<long>(line_no));
                    }
                    std::cerr << "warning: discarding torn final record in " << file << "\n";
                    std::error_code ec;
                    fs::resize_file(file, start, ec);
                    if (ec) throw Error(ErrorKind::StoreWriteFailed, "cannot truncate torn record: " + ec.message());
                    break;
                }
            }
            start = end + 1;
        }
    }

    fs::path root_;
    mutable std::shared_mutex mutex_;
    std::vector<UrlRecord> records_;
    std::map<std::string, std::size_t> latest_;
};

inline std::vector<Sample> load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ManifestParse, "cannot open manifest " + path.string(), 0);
    std::vector<Sample> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(store_detail::sample_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::ManifestParse, path.string() + " line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    return out;
}

inline void append_manifest(const fs::path& path, const Sample& sample) {
    if (sample.path.empty() || !is_digest(sample.digest)) {
        throw Error(ErrorKind::InvalidInput, "sample needs a path and a SHA-256 digest");
    }
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    store_detail::append_line(path, to_json(sample).dump());
}

inline fs::path resolve_sample_path(const fs::path& manifest, const Sample& sample) {
    const fs::path p(sample.path);
    return p.is_absolute() ? p : manifest.parent_path() / p;
}

} // namespace phishvis

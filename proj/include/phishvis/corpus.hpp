#pragma once

// Seeded synthetic HTML corpus. Legitimate pages are large and byte-rich
// (stylesheets, scripts, navigation, long forms, licence footers with
// non-ASCII text); phishing pages are small clones with one login form.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phishvis/bytevis.hpp"
#include "phishvis/digest.hpp"
#include "phishvis/error.hpp"
#include "phishvis/hilbert.hpp"
#include "phishvis/io.hpp"
#include "phishvis/png.hpp"
#include "phishvis/random.hpp"
#include "phishvis/store.hpp"
#include "phishvis/types.hpp"

namespace phishvis::corpus {

namespace fs = std::filesystem;

struct Category {
    std::string name;
    Label label = Label::Legitimate;
};

inline std::vector<Category> default_categories() {
    return {
        {"Bank Of America PHISH", Label::Phishing},
        {"PayPal Phish", Label::Phishing},
        {"ABSA Phish", Label::Phishing},
        {"DHL TRACKING Phish", Label::Phishing},
        {"Microsoft Login Phish", Label::Phishing},
        {"Bank Of America", Label::Legitimate},
        {"PayPal", Label::Legitimate},
        {"ABSA", Label::Legitimate},
        {"DHL Tracking", Label::Legitimate},
        {"Microsoft Login", Label::Legitimate},
    };
}

struct CorpusConfig {
    std::uint32_t per_category = 250;
    std::vector<Category> categories = default_categories();
    std::uint64_t seed = 0;
    fs::path out_dir = "corpus";
    double train_fraction = 0.8;

    void validate() const {
        if (per_category < 1) throw Error(ErrorKind::InvalidInput, "per_category must be >= 1");
        const bool legit = std::any_of(categories.begin(), categories.end(), [](const Category& c) { return c.label == Label::Legitimate; });
        const bool phish = std::any_of(categories.begin(), categories.end(), [](const Category& c) { return c.label == Label::Phishing; });
        if (!legit || !phish) throw Error(ErrorKind::DegenerateDataset, "corpus needs at least one category per label");
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error(ErrorKind::InvalidInput, "train fraction must lie in (0, 1)");
    }
};

inline constexpr std::size_t legit_min_bytes = 20 * 1024;
inline constexpr std::size_t legit_max_bytes = 200 * 1024;
inline constexpr std::size_t phish_min_bytes = 1 * 1024;
inline constexpr std::size_t phish_max_bytes = 10 * 1024;

/// Lowercase alphanumeric slug, used for image directories.
inline std::string slug(std::string_view name) {
    std::string out;
    for (unsigned char c : name) {
        if (std::isalnum(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
        } else if (!out.empty() && out.back() != '-') {
            out.push_back('-');
        }
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out.empty() ? "category" : out;
}

namespace detail {

inline constexpr std::array<std::string_view, 48> words = {
    "account", "secure", "login", "payment", "transfer", "balance", "statement", "customer", "service", "support",
    "privacy", "terms", "online", "banking", "mobile", "card", "credit", "savings", "loan", "mortgage",
    "shipment", "tracking", "delivery", "parcel", "express", "invoice", "business", "personal", "profile", "settings",
    "security", "center", "help", "contact", "careers", "investor", "news", "product", "office", "cloud",
    "download", "update", "verify", "session", "password", "identity", "overview", "rewards"};

inline constexpr std::array<std::string_view, 8> tags = {"div", "section", "article", "aside", "span", "li", "p", "td"};

inline constexpr std::array<std::string_view, 6> non_ascii = {
    "\xC2\xA9", "\xE2\x84\xA2", "\xC2\xAE", "\xE2\x82\xAC", "\xC3\xA9", "\xE2\x80\x94"}; // copyright, trademark, registered, euro, e-acute, long dash

class PageWriter {
public:
    explicit PageWriter(Rng& rng) : rng_(rng) {}

    std::string_view word() { return words[rng_.below(words.size())]; }

    std::string sentence(std::size_t lo, std::size_t hi) {
        std::string s;
        const auto n = rng_.between(lo, hi);
        for (std::uint64_t i = 0; i < n; ++i) {
            if (i) s += ' ';
            s += word();
        }
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        s += '.';
        return s;
    }

    std::string path() {
        std::string p = "/";
        const auto depth = rng_.between(1, 4);
        for (std::uint64_t i = 0; i < depth; ++i) {
            if (i) p += '/';
            p += word();
        }
        if (rng_.chance(0.3)) p += "?ref=" + std::to_string(rng_.below(100000));
        return p;
    }

    std::string& out() { return out_; }
    Rng& rng() { return rng_; }

private:
    Rng& rng_;
    std::string out_;
};

inline std::string host_for(std::string_view category) {
    std::string h = slug(category);
    std::erase(h, '-');
    return "www." + h + ".com";
}

inline void legit_block(PageWriter& w, const std::string& host) {
    auto& o = w.out();
    auto& r = w.rng();
    switch (r.below(8)) {
    case 0: { // navigation with many links
        o += "\t<nav class=\"menu-" + std::string(w.word()) + "\">\n\t\t<ul>\n";
        const auto n = r.between(6, 20);
        for (std::uint64_t i = 0; i < n; ++i) {
            o += "\t\t\t<li><a href=\"https://" + host + w.path() + "\" title=\"" + w.sentence(2, 4) + "\">" + std::string(w.word()) + "</a></li>\n";
        }
        o += "\t\t</ul>\n\t</nav>\n";
        break;
    }
    case 1: { // style block
        o += "<style>\n";
        const auto n = r.between(4, 14);
        for (std::uint64_t i = 0; i < n; ++i) {
            o += "." + std::string(w.word()) + "-" + std::string(w.word()) + " { margin: " + std::to_string(r.below(40)) + "px " +
                 std::to_string(r.below(40)) + "px; color: #" + std::to_string(100000 + r.below(899999)) + "; font-size: " +
                 std::to_string(10 + r.below(14)) + "px; }\r\n";
        }
        o += "</style>\n";
        break;
    }
    case 2: { // script
        o += "<script type=\"text/javascript\">\n(function(w, d) {\n";
        const auto n = r.between(3, 12);
        for (std::uint64_t i = 0; i < n; ++i) {
            o += "\tvar " + std::string(w.word()) + std::to_string(i) + " = d.querySelector('#" + std::string(w.word()) + "');\n";
            o += "\tif (" + std::string(w.word()) + std::to_string(i) + ") { w.dataLayer.push({event: '" + std::string(w.word()) +
                 "', value: " + std::to_string(r.below(1000)) + "}); }\n";
        }
        o += "\tw.addEventListener('load', function() { d.body.classList.add('ready'); });\n})(window, document);\n</script>\n";
        break;
    }
    case 3: { // comment
        o += "<!-- " + w.sentence(8, 30) + " build " + std::to_string(r.below(1u << 20)) + " -->\n";
        break;
    }
    case 4: { // detailed data entry form
        o += "<form method=\"post\" action=\"https://" + host + w.path() + "\" autocomplete=\"on\">\n";
        o += "\t<input type=\"hidden\" name=\"csrf_token\" value=\"";
        for (int i = 0; i < 32; ++i) o += "0123456789abcdef"[r.below(16)];
        o += "\">\n";
        const auto n = r.between(5, 15);
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::string name = std::string(w.word()) + "_" + std::string(w.word());
            o += "\t<label for=\"" + name + "\">" + w.sentence(1, 3) + "</label>\n\t<input id=\"" + name + "\" name=\"" + name +
                 "\" type=\"text\" maxlength=\"" + std::to_string(8 + r.below(120)) + "\" required>\n";
        }
        o += "\t<button type=\"submit\">" + std::string(w.word()) + "</button>\n</form>\n";
        break;
    }
    case 5: { // licence / legal footer with non-ASCII symbols
        o += "<footer>\n\t<p class=\"legal\">";
        const auto n = r.between(3, 10);
        for (std::uint64_t i = 0; i < n; ++i) {
            o += std::string(non_ascii[r.below(non_ascii.size())]) + " " + std::to_string(1990 + r.below(35)) + " " + w.sentence(6, 18) + " ";
        }
        o += "</p>\n\t<p>Licensed under the terms at <a href=\"https://" + host + "/legal/licence\">" + std::string(w.word()) +
             "</a>.</p>\n</footer>\n";
        break;
    }
    case 6: { // external resources
        const auto n = r.between(2, 6);
        for (std::uint64_t i = 0; i < n; ++i) {
            o += "<link rel=\"stylesheet\" href=\"https://static." + host.substr(4) + "/css/" + std::string(w.word()) + "." +
                 std::to_string(r.below(1u << 24)) + ".css\" integrity=\"sha384-";
            for (int k = 0; k < 48; ++k) o += "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/"[r.below(64)];
            o += "\" crossorigin=\"anonymous\">\n";
        }
        break;
    }
    default: { // content
        const auto tag = tags[r.below(tags.size())];
        o += "<" + std::string(tag) + " class=\"" + std::string(w.word()) + "\">\n";
        const auto n = r.between(2, 8);
        for (std::uint64_t i = 0; i < n; ++i) o += "\t" + w.sentence(6, 24) + "\n";
        o += "</" + std::string(tag) + ">\n";
        break;
    }
    }
}

inline void phish_block(PageWriter& w) {
    auto& o = w.out();
    auto& r = w.rng();
    switch (r.below(3)) {
    case 0:
        o += "<img src=\"img/" + std::string(w.word()) + std::to_string(r.below(100)) + ".png\" alt=\"" + std::string(w.word()) + "\">\n";
        break;
    case 1:
        o += "<p>" + w.sentence(4, 14) + "</p>\n";
        break;
    default:
        o += "<div class=\"" + std::string(w.word()) + "\"><img src=\"img/banner" + std::to_string(r.below(10)) + ".jpg\"></div>\n";
        break;
    }
}

} // namespace detail

/// Deterministic page for (label, category, index, seed).
inline Bytes gen_page(Label label, std::string_view category, std::uint64_t index, std::uint64_t seed) {
    const std::uint64_t key = Rng::mix(seed) ^ Rng::mix(fnv1a(category)) ^ Rng::mix(index * 2 + class_index(label));
    Rng rng(key);
    detail::PageWriter w(rng);
    auto& o = w.out();
    const std::string host = detail::host_for(category);
    const std::string brand(category);

    if (label == Label::Legitimate) {
        const std::size_t target = rng.between(legit_min_bytes, legit_max_bytes - 8 * 1024);
        o += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" + brand + " | " + w.sentence(2, 5) + "</title>\n";
        o += "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n";
        detail::legit_block(w, host);
        o += "</head>\n<body class=\"" + std::string(w.word()) + "\">\n";
        while (o.size() < target) detail::legit_block(w, host);
        o += "</body>\n</html>\n";
    } else {
        const std::size_t target = rng.between(phish_min_bytes, phish_max_bytes - 2 * 1024);
        o += "<html>\n<head><title>" + brand + " - Sign in</title>\n";
        o += "<style>body{font-family:Arial;background:#f2f2f2} .box{width:360px;margin:40px auto}</style>\n</head>\n<body>\n";
        o += "<div class=\"box\">\n<img src=\"img/logo.png\" alt=\"" + brand + "\">\n";
        o += "<form method=\"post\" action=\"" + std::string(w.word()) + ".php\">\n";
        o += "<input type=\"text\" name=\"user\" placeholder=\"Email or username\">\n";
        o += "<input type=\"password\" name=\"pass\" placeholder=\"Password\">\n";
        o += "<button type=\"submit\">Sign in</button>\n</form>\n";
        const auto links = rng.between(0, 2);
        for (std::uint64_t i = 0; i < links; ++i) o += "<a href=\"#\">" + w.sentence(1, 3) + "</a>\n";
        while (o.size() < target) detail::phish_block(w);
        o += "</div>\n</body>\n</html>\n";
    }
    return Bytes(o.begin(), o.end());
}

/// Per-category split assignment: a seeded shuffle of indices, the first
/// floor(n * train_fraction) of which are training samples.
inline std::vector<Split> split_for(std::string_view category, std::uint32_t n, std::uint64_t seed, double train_fraction) {
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(Rng::mix(seed ^ 0xA5A5A5A5ull) ^ fnv1a(category));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto n_train = static_cast<std::uint32_t>(static_cast<double>(n) * train_fraction);
    std::vector<Split> out(n, Split::Test);
    for (std::uint32_t k = 0; k < n_train; ++k) out[order[k]] = Split::Train;
    return out;
}

inline constexpr const char* manifest_name = "manifest.jsonl";

/// Render every page, write PNGs under out_dir/images and a manifest at
/// out_dir/manifest.jsonl. Returns the manifest path.
inline fs::path build_corpus(const CorpusConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(ErrorKind::StoreWriteFailed, "cannot create " + cfg.out_dir.string() + ": " + ec.message());

    std::string manifest;
    for (const auto& cat : cfg.categories) {
        const auto splits = split_for(cat.name, cfg.per_category, cfg.seed, cfg.train_fraction);
        const std::string dir = "images/" + slug(cat.name);
        for (std::uint32_t i = 0; i < cfg.per_category; ++i) {
            const Bytes page = gen_page(cat.label, cat.name, i, cfg.seed);
            const Bytes png = encode_png(render(page, hilbert::CurveOrder{}));
            Sample s;
            s.path = dir + "/" + std::to_string(i) + ".png";
            s.label = cat.label;
            s.category = cat.name;
            s.digest = content_digest(png);
            s.split = splits[i];
            write_file(cfg.out_dir / s.path, png);
            manifest += to_json(s).dump();
            manifest += '\n';
        }
    }
    const fs::path path = cfg.out_dir / manifest_name;
    write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(manifest.data()), manifest.size()));
    return path;
}

} // namespace phishvis::corpus

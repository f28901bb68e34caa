#include <map>

#include <gtest/gtest.h>

#include "phishvis/corpus.hpp"
#include "phishvis/dataset.hpp"
#include "test_util.hpp"

using namespace phishvis;
using namespace phishvis::corpus;

namespace {

std::string text(const Bytes& b) { return std::string(b.begin(), b.end()); }

CorpusConfig small_config(const std::filesystem::path& out, std::uint32_t per_category) {
    CorpusConfig cfg;
    cfg.per_category = per_category;
    cfg.out_dir = out;
    return cfg;
}

} // namespace

TEST(GenPage, Deterministic) {
    for (const auto& cat : default_categories()) {
        EXPECT_EQ(gen_page(cat.label, cat.name, 3, 0), gen_page(cat.label, cat.name, 3, 0));
        EXPECT_NE(gen_page(cat.label, cat.name, 3, 0), gen_page(cat.label, cat.name, 4, 0));
        EXPECT_NE(gen_page(cat.label, cat.name, 3, 0), gen_page(cat.label, cat.name, 3, 1));
    }
}

TEST(GenPage, SizeBoundsAndSeparation) {
    std::size_t max_phish = 0, min_legit = SIZE_MAX;
    for (const auto& cat : default_categories()) {
        for (std::uint64_t i = 0; i < 40; ++i) {
            const std::size_t n = gen_page(cat.label, cat.name, i, 0).size();
            if (cat.label == Label::Phishing) {
                EXPECT_GE(n, phish_min_bytes);
                EXPECT_LE(n, phish_max_bytes);
                max_phish = std::max(max_phish, n);
            } else {
                EXPECT_GE(n, legit_min_bytes);
                EXPECT_LE(n, legit_max_bytes);
                min_legit = std::min(min_legit, n);
            }
        }
    }
    EXPECT_LT(max_phish, min_legit);
}

TEST(GenPage, LooksLikeHtml) {
    for (const auto& cat : default_categories()) {
        const std::string page = text(gen_page(cat.label, cat.name, 0, 0));
        EXPECT_NE(page.find("<html"), std::string::npos) << cat.name;
        EXPECT_NE(page.find("<body"), std::string::npos) << cat.name;
        EXPECT_NE(page.find("</html>"), std::string::npos) << cat.name;
    }
    const std::string phish = text(gen_page(Label::Phishing, default_categories()[0].name, 1, 0));
    EXPECT_NE(phish.find("<form"), std::string::npos);
}

TEST(Categories, BalancedDefaults) {
    const auto cats = default_categories();
    EXPECT_EQ(cats.size(), 10u);
    EXPECT_EQ(std::count_if(cats.begin(), cats.end(), [](const Category& c) { return c.label == Label::Phishing; }), 5);
    std::set<std::string> slugs;
    for (const auto& c : cats) slugs.insert(slug(c.name));
    EXPECT_EQ(slugs.size(), cats.size());
}

TEST(Slug, Examples) {
    EXPECT_EQ(slug("E-commerce / Retail"), "e-commerce-retail");
    EXPECT_EQ(slug("  "), "category");
}

TEST(Split, DefaultCounts) {
    for (const auto& cat : default_categories()) {
        const auto s = split_for(cat.name, 250, 0, 0.8);
        EXPECT_EQ(std::count(s.begin(), s.end(), Split::Train), 200);
        EXPECT_EQ(std::count(s.begin(), s.end(), Split::Test), 50);
        EXPECT_EQ(s, split_for(cat.name, 250, 0, 0.8));
    }
    const auto odd = split_for("x", 7, 0, 0.8);
    EXPECT_EQ(std::count(odd.begin(), odd.end(), Split::Train), 5);
}

TEST(Build, ManifestShape) {
    test_support::TempDir dir;
    CorpusConfig cfg = small_config(dir.path(), 2);
    cfg.categories.resize(1);
    cfg.categories.push_back(default_categories()[5]);
    ASSERT_EQ(cfg.categories[0].label, Label::Phishing);
    ASSERT_EQ(cfg.categories[1].label, Label::Legitimate);
    const auto manifest = build_corpus(cfg);
    const auto samples = load_manifest(manifest);
    ASSERT_EQ(samples.size(), 4u);
    std::map<Label, int> per_label;
    for (const auto& s : samples) {
        ++per_label[s.label];
        ASSERT_TRUE(s.split.has_value());
        const auto path = resolve_sample_path(manifest, s);
        ASSERT_TRUE(std::filesystem::exists(path)) << path;
        EXPECT_EQ(content_digest(read_file(path)), s.digest);
        EXPECT_EQ(decode_png(read_file(path)).side, 128u);
    }
    EXPECT_EQ(per_label[Label::Phishing], 2);
    EXPECT_EQ(per_label[Label::Legitimate], 2);
}

TEST(Build, Reproducible) {
    test_support::TempDir a, b;
    const auto ma = build_corpus(small_config(a.path(), 3));
    const auto mb = build_corpus(small_config(b.path(), 3));
    EXPECT_EQ(read_file(ma), read_file(mb));
    const auto samples = load_manifest(ma);
    EXPECT_EQ(samples.size(), 30u);
    for (const auto& s : samples) EXPECT_EQ(read_file(a / s.path), read_file(b / s.path));
}

TEST(Build, InvalidConfig) {
    test_support::TempDir dir;
    CorpusConfig cfg = small_config(dir.path(), 0);
    EXPECT_THROW(build_corpus(cfg), Error);
    cfg.per_category = 2;
    cfg.train_fraction = 1.5;
    EXPECT_THROW(build_corpus(cfg), Error);
}

TEST(Dataset, SelectSplitAndDigestCheck) {
    test_support::TempDir dir;
    const auto manifest = build_corpus(small_config(dir.path(), 5));
    const auto samples = load_manifest(manifest);
    const auto train = select_split(samples, Split::Train);
    const auto test = select_split(samples, Split::Test);
    EXPECT_EQ(train.size(), 40u);
    EXPECT_EQ(test.size(), 10u);
    EXPECT_EQ(select_split(samples, std::nullopt).size(), 50u);

    Sample bad = samples.front();
    bad.digest = std::string(64, '0');
    try {
        load_sample_image(manifest, bad, 64);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.exit_code(), exit_code::store);
    }
}

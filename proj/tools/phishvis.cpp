// phishvis command line: check URLs, visualise pages, build corpora, train
// and evaluate the classifier.

#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "phishvis/phishvis.hpp"

namespace {

using namespace phishvis;
namespace fs = std::filesystem;

bool looks_like_url(const std::string& s) {
    const auto colon = s.find("://");
    return colon != std::string::npos && colon > 0;
}

std::optional<Split> parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    if (s == "all") return std::nullopt;
    throw Error(ErrorKind::InvalidInput, "split must be train, test or all");
}

void print_check(const CheckResult& r) {
    std::printf("%s  %s  %.4f%s  %s\n", r.url.str().c_str(), std::string(to_string(r.verdict.label)).c_str(), r.verdict.confidence,
                r.cached ? "  (cached)" : "", r.image_path.c_str());
}

int run(int argc, char** argv) {
    CLI::App app{"Phishing page detection from binary visualisations"};
    app.require_subcommand(1);
    app.fallthrough();
    bool json = false;
    app.add_flag("--json", json, "Machine-readable JSON on stdout");

    // check
    auto* check = app.add_subcommand("check", "Classify one or more URLs, using the cache when possible");
    std::vector<std::string> urls;
    std::string model_path;
    bool force = false;
    FetchConfig fetch_cfg;
    long timeout_s = fetch_cfg.timeout.count();
    bool insecure = false;
    check->add_option("urls", urls, "URLs to check")->required();
    check->add_option("--model", model_path, "Model file (default $PHISHVIS_HOME/model.pvm)");
    check->add_flag("--force", force, "Ignore cached verdicts and re-fetch");
    check->add_option("--timeout", timeout_s, "Fetch timeout in seconds")->check(CLI::PositiveNumber);
    check->add_option("--max-redirects", fetch_cfg.max_redirects, "Redirect limit")->check(CLI::PositiveNumber);
    check->add_option("--max-body", fetch_cfg.max_body_bytes, "Maximum body size in bytes")->check(CLI::PositiveNumber);
    check->add_option("--user-agent", fetch_cfg.user_agent, "User-Agent header");
    check->add_flag("--insecure", insecure, "Skip TLS certificate validation (lab use only)");

    // visualize
    auto* vis = app.add_subcommand("visualize", "Render a URL or local file to a PNG");
    std::string vis_input;
    std::string vis_out;
    unsigned vis_order = hilbert::CurveOrder::default_order;
    vis->add_option("input", vis_input, "URL or file path")->required();
    vis->add_option("-o,--output", vis_out, "Output PNG")->required();
    vis->add_option("--order", vis_order, "Hilbert curve order (side = 2^order)")->check(CLI::Range(1, 12));

    // train
    auto* train = app.add_subcommand("train", "Train a model from a manifest");
    std::string train_manifest;
    std::string train_out;
    std::string train_split = "train";
    nn::TrainConfig train_cfg;
    train->add_option("--manifest", train_manifest, "Dataset manifest")->required();
    train->add_option("-o,--output", train_out, "Model file to write")->required();
    train->add_option("--steps", train_cfg.steps, "SGD steps")->capture_default_str();
    train->add_option("--lr", train_cfg.learning_rate, "Learning rate")->capture_default_str();
    train->add_option("--batch", train_cfg.batch_size, "Batch size")->capture_default_str();
    train->add_option("--seed", train_cfg.seed, "PRNG seed")->capture_default_str();
    train->add_option("--input-side", train_cfg.input_side, "Network input side (multiple of 8)")->capture_default_str();
    train->add_option("--split", train_split, "Manifest split to train on (train|test|all)")->capture_default_str();
    train->add_option("--threads", train_cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Evaluate a model on a manifest split");
    std::string eval_manifest;
    std::string eval_model;
    std::string eval_split = "test";
    eval->add_option("--manifest", eval_manifest, "Dataset manifest")->required();
    eval->add_option("--model", eval_model, "Model file")->required();
    eval->add_option("--split", eval_split, "Manifest split (train|test|all)")->capture_default_str();

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "Generate the synthetic labelled corpus");
    corpus::CorpusConfig corpus_cfg;
    std::string gen_out;
    gen->add_option("--per-category", corpus_cfg.per_category, "Samples per category")->capture_default_str()->check(CLI::PositiveNumber);
    gen->add_option("--seed", corpus_cfg.seed, "PRNG seed")->capture_default_str();
    gen->add_option("-o,--output", gen_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::usage;
    }

    if (*check) {
        Store store(Store::default_root());
        fetch_cfg.timeout = std::chrono::seconds(timeout_s);
        fetch_cfg.verify_tls = !insecure;
        const fs::path mp = model_path.empty() ? store.root() / "model.pvm" : fs::path(model_path);
        Pipeline pipeline(store, nn::load_model(mp), fetch_cfg);

        std::vector<std::string> unique;
        std::set<std::string> seen;
        for (const auto& u : urls) {
            if (seen.insert(normalize_url(u).str()).second) unique.push_back(u);
        }
        std::vector<std::future<CheckResult>> jobs;
        for (const auto& u : unique) {
            jobs.push_back(std::async(std::launch::async, [&pipeline, u, force] { return pipeline.check(u, force); }));
        }
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        std::optional<Error> first_error;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            try {
                const CheckResult r = jobs[i].get();
                if (json) {
                    out.push_back(to_json(r));
                } else {
                    print_check(r);
                }
            } catch (const Error& e) {
                std::cerr << "error: " << unique[i] << ": " << e.what() << "\n";
                if (json) out.push_back({{"url", unique[i]}, {"error", to_string(e.kind())}, {"message", e.what()}});
                if (!first_error) first_error = e;
            }
        }
        if (json) std::cout << (out.size() == 1 ? out[0] : out).dump(2) << "\n";
        return first_error ? first_error->exit_code() : exit_code::ok;
    }

    if (*vis) {
        Bytes bytes;
        if (looks_like_url(vis_input)) {
            bytes = fetch(normalize_url(vis_input)).body;
        } else {
            bytes = read_file(vis_input);
        }
        const Bytes png = encode_png(render(bytes, hilbert::CurveOrder{vis_order}));
        write_file(vis_out, png);
        if (json) {
            std::cout << nlohmann::ordered_json{{"output", vis_out}, {"input_bytes", bytes.size()}, {"digest", content_digest(png)}}.dump(2) << "\n";
        } else {
            std::cout << "wrote " << vis_out << " (" << bytes.size() << " input bytes)\n";
        }
        return exit_code::ok;
    }

    if (*train) {
        const auto samples = select_split(load_manifest(train_manifest), parse_split(train_split));
        nn::TrainingLog log;
        const nn::Model model = phishvis::train(train_manifest, samples, train_cfg, &log);
        nn::save_model(model, train_out);
        double tail = 0.0;
        const std::size_t k = std::min<std::size_t>(100, log.loss.size());
        for (std::size_t i = log.loss.size() - k; i < log.loss.size(); ++i) tail += log.loss[i];
        tail /= static_cast<double>(k);
        if (json) {
            std::cout << nlohmann::ordered_json{{"model", train_out}, {"samples", samples.size()}, {"steps", train_cfg.steps}, {"final_loss", tail}}.dump(2)
                      << "\n";
        } else {
            std::cout << "trained on " << samples.size() << " samples for " << train_cfg.steps << " steps; mean loss over last " << k
                      << " steps " << tail << "\nwrote " << train_out << "\n";
        }
        return exit_code::ok;
    }

    if (*eval) {
        const nn::Model model = nn::load_model(eval_model);
        const auto samples = select_split(load_manifest(eval_manifest), parse_split(eval_split));
        if (samples.empty()) throw Error(ErrorKind::DegenerateDataset, "no samples in split '" + eval_split + "'");
        const auto report = evaluate(model, eval_manifest, samples);
        if (json) {
            std::cout << metrics::to_json(report).dump(2) << "\n";
        } else {
            std::cout << metrics::to_table(report);
        }
        return exit_code::ok;
    }

    if (*gen) {
        corpus_cfg.out_dir = gen_out;
        const fs::path manifest = corpus::build_corpus(corpus_cfg);
        const auto n = corpus_cfg.per_category * corpus_cfg.categories.size();
        if (json) {
            std::cout << nlohmann::ordered_json{{"manifest", manifest.string()}, {"samples", n}}.dump(2) << "\n";
        } else {
            std::cout << "wrote " << n << " samples; manifest " << manifest.string() << "\n";
        }
        return exit_code::ok;
    }
    return exit_code::usage;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const phishvis::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return phishvis::exit_code::usage;
    }
}

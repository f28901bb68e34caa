// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "hilbert_oracle.hpp"
#include "phishvis/phishvis.hpp"
#include "test_util.hpp"

using namespace phishvis;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) note << "failed: ";
            else note << "; ";
            note << what;
            pass = false;
        }
    }
};

// C1
Outcome hilbert_criterion() {
    Outcome o;
    const auto t0 = clock_type::now();
    std::uint64_t cells = 0;
    for (unsigned k = 1; k <= 7; ++k) {
        const hilbert::CurveOrder order(k);
        const std::uint32_t side = order.side();
        std::vector<bool> seen(order.cells(), false);
        hilbert::Cell prev{};
        for (std::uint64_t d = 0; d < order.cells(); ++d) {
            const hilbert::Cell c = hilbert::d2xy(order, d);
            if (c.x >= side || c.y >= side) {
                o.require(false, "cell out of range at order " + std::to_string(k));
                return o;
            }
            const std::uint64_t slot = std::uint64_t{c.y} * side + c.x;
            if (seen[slot]) o.require(false, "duplicate cell at order " + std::to_string(k));
            seen[slot] = true;
            if (hilbert::xy2d(order, c) != d) o.require(false, "inverse mismatch at order " + std::to_string(k));
            if (d > 0) {
                const auto dx = c.x > prev.x ? c.x - prev.x : prev.x - c.x;
                const auto dy = c.y > prev.y ? c.y - prev.y : prev.y - c.y;
                if (dx + dy != 1) o.require(false, "non-adjacent step at order " + std::to_string(k));
            }
            prev = c;
            ++cells;
        }
        if (!o.pass) return o;
    }
    const double s = seconds_since(t0);
    o.require(s < 1.0, "took " + std::to_string(s) + " s");
    o.note << cells << " indices over orders 1-7 in " << s * 1000 << " ms";
    return o;
}

Rgb expected_rgb(int b) {
    if (b == 0x00) return {0, 0, 0};
    if (b == 0xFF) return {255, 255, 255};
    if (b >= 0x20 && b <= 0x7E) return {0, 0, 255};
    if (b < 0x20 || b == 0x7F) return {0, 255, 0};
    return {255, 0, 0};
}

// C2
Outcome colour_criterion() {
    Outcome o;
    int mismatches = 0;
    for (int b = 0; b < 256; ++b) {
        const auto byte = static_cast<std::uint8_t>(b);
        if (byte_to_rgb(byte) != expected_rgb(b) || class_color(classify_byte(byte)) != expected_rgb(b)) ++mismatches;
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " byte values differ from the table");
    o.require(byte_to_rgb(0x00) == Rgb{0, 0, 0}, "0x00 is not black");
    o.require(byte_to_rgb(0xFF) == Rgb{255, 255, 255}, "0xFF is not white");
    o.note << (o.pass ? "all 256 byte values match; 0x00 black, 0xFF white" : "");
    return o;
}

VisImage oracle_render(const Bytes& in, unsigned order) {
    const auto curve = test_support::hilbert_points(order);
    const std::size_t n = curve.size();
    VisImage img(1u << order);
    for (std::size_t d = 0; d < n; ++d) {
        int b = 0;
        if (in.size() >= n) b = in[static_cast<std::size_t>((static_cast<unsigned __int128>(d) * in.size()) / n)];
        else if (d < in.size()) b = in[d];
        img.at(curve[d].first, curve[d].second) = expected_rgb(b);
    }
    return img;
}

// C3
Outcome render_criterion() {
    Outcome o;
    std::mt19937 rng(31337);
    std::uniform_int_distribution<int> len(1, 1200), byte(0, 255);
    int compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Bytes in(static_cast<std::size_t>(len(rng)));
        for (auto& b : in) b = static_cast<std::uint8_t>(byte(rng));
        for (unsigned order = 1; order <= 4; ++order) {
            if (render(in, hilbert::CurveOrder(order)) != oracle_render(in, order)) {
                o.require(false, "trial " + std::to_string(trial) + " order " + std::to_string(order) + " differs from oracle");
                return o;
            }
            ++compared;
        }
        const Bytes a = encode_png(render(in));
        const Bytes b = encode_png(render(Bytes(in)));
        if (a != b) o.require(false, "PNG bytes differ for identical input");
    }
    o.note << compared << " renders match the oracle; PNG output byte-identical";
    return o;
}

// C4
Outcome gradient_criterion() {
    Outcome o;
    const auto t0 = clock_type::now();
    nn::TrainConfig cfg;
    cfg.input_side = 8;
    cfg.arch = {{2, 2, 2}, 4};
    cfg.seed = 2718;
    nn::Model m = nn::init_model(cfg);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    nn::Tensor x({3, 8, 8});
    for (double& v : x.data) v = u(rng);
    const std::vector<nn::Example> batch = {{x, Label::Phishing}};

    const nn::Gradients analytic = nn::gradients(m, batch);
    auto params = m.parameters();
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        std::size_t checked = 0;
        for (std::size_t i = 0; i < params[t]->size(); ++i) {
            double& w = (*params[t])[i];
            const double saved = w;
            w = saved + h;
            const double up = nn::loss(m, batch);
            w = saved - h;
            const double down = nn::loss(m, batch);
            w = saved;
            const double numeric = (up - down) / (2 * h);
            const double a = analytic[t][i];
            const double denom = std::abs(a) + std::abs(numeric);
            if (denom > 1e-8) {
                worst = std::max(worst, std::abs(a - numeric) / denom);
                ++checked;
            }
        }
        o.require(checked > 0, "tensor " + std::to_string(t) + " has no measurable gradient");
    }
    const double s = seconds_since(t0);
    o.require(worst <= 1e-4, "max relative error " + std::to_string(worst));
    o.require(s < 30.0, "took " + std::to_string(s) + " s");
    o.note << m.parameter_count() << " parameters in " << params.size() << " tensors, max relative error " << worst << ", " << s << " s";
    return o;
}

// C5
Outcome metrics_criterion() {
    Outcome o;
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> len(0, 60), coin(0, 1);
    int undefined_seen = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<metrics::Prediction> preds(static_cast<std::size_t>(len(rng)));
        int tp = 0, tn = 0, fp = 0, fn = 0;
        for (auto& p : preds) {
            p.predicted = coin(rng) ? Label::Phishing : Label::Legitimate;
            p.actual = coin(rng) ? Label::Phishing : Label::Legitimate;
            const bool pp = p.predicted == Label::Phishing, ap = p.actual == Label::Phishing;
            tp += pp && ap;
            tn += !pp && !ap;
            fp += pp && !ap;
            fn += !pp && ap;
        }
        const auto c = metrics::confusion(preds);
        const auto m = metrics::overall_metrics(c);
        auto check = [&](const metrics::Metric& got, int num, int den, const char* name) {
            if (den == 0) {
                ++undefined_seen;
                if (got) o.require(false, std::string(name) + " defined with zero denominator");
            } else if (!got || std::abs(*got - double(num) / den) > 1e-12) {
                o.require(false, std::string(name) + " mismatch in trial " + std::to_string(trial));
            }
        };
        check(m.accuracy, tp + tn, tp + tn + fp + fn, "accuracy");
        check(m.precision, tp, tp + fp, "precision");
        check(m.recall, tp, tp + fn, "recall");
        if (tp + fp > 0 && tp + fn > 0) {
            const double p = double(tp) / (tp + fp), r = double(tp) / (tp + fn);
            if (tp == 0) {
                ++undefined_seen;
                if (m.f1) o.require(false, "f1 defined with p + r == 0");
            } else if (!m.f1 || std::abs(*m.f1 - 2 * p * r / (p + r)) > 1e-12) {
                o.require(false, "f1 mismatch in trial " + std::to_string(trial));
            }
        }
        if (!o.pass) return o;
    }
    const double f1 = metrics::f1(0.9583, 0.8750);
    o.require(std::abs(f1 - 0.9147) <= 0.0005, "F1 from 95.83%/87.50% is " + std::to_string(f1));
    o.note << "1000 label sets match brute-force counts (" << undefined_seen << " undefined cases); F1(95.83%, 87.50%) = " << f1;
    return o;
}

struct ExperimentRun {
    Bytes model;
    std::string eval_json;
    double accuracy = 0.0;
    double loss_first = 0.0, loss_last = 0.0;
    std::size_t train_n = 0, test_n = 0;
    double seconds = 0.0;
};

ExperimentRun run_experiment(const fs::path& dir) {
    const auto t0 = clock_type::now();
    corpus::CorpusConfig ccfg;
    ccfg.out_dir = dir;
    const fs::path manifest = corpus::build_corpus(ccfg);
    const auto samples = load_manifest(manifest);
    const auto train_set = select_split(samples, Split::Train);
    const auto test_set = select_split(samples, Split::Test);

    nn::TrainConfig cfg; // 4000 steps, lr 0.005, seed 0
    nn::TrainingLog log;
    const nn::Model model = train(manifest, train_set, cfg, &log);
    const auto report = evaluate(model, manifest, test_set);

    ExperimentRun r;
    r.model = nn::serialize_model(model);
    r.eval_json = metrics::to_json(report).dump();
    r.accuracy = report.overall.accuracy.value_or(0.0);
    const std::size_t k = std::min<std::size_t>(100, log.loss.size());
    for (std::size_t i = 0; i < k; ++i) {
        r.loss_first += log.loss[i] / double(k);
        r.loss_last += log.loss[log.loss.size() - 1 - i] / double(k);
    }
    r.train_n = train_set.size();
    r.test_n = test_set.size();
    r.seconds = seconds_since(t0);
    return r;
}

// C6
Outcome experiment_criterion(const ExperimentRun& r) {
    Outcome o;
    o.require(r.train_n == 2000 && r.test_n == 500, "split sizes " + std::to_string(r.train_n) + "/" + std::to_string(r.test_n));
    o.require(r.accuracy >= 0.90, "test accuracy " + metrics::format_percent(r.accuracy));
    o.require(r.loss_last < r.loss_first, "loss did not decrease");
    o.require(r.seconds <= 20 * 60, "took " + std::to_string(r.seconds) + " s");
    o.note << "train " << r.train_n << ", test " << r.test_n << ", test accuracy " << metrics::format_percent(r.accuracy) << ", mean loss "
           << r.loss_first << " -> " << r.loss_last << ", " << r.seconds << " s";
    return o;
}

// C7
Outcome dedupe_criterion() {
    Outcome o;
    test_support::TempDir home;
    test_support::StubServer stub;
    stub.server().Get("/login", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("<html><body><form action=\"/post\"><input name=\"password\"></form></body></html>", "text/html");
    });
    stub.start();
    Store store(home.path());
    Pipeline p(store, nn::init_model(nn::TrainConfig{}));
    const auto first = p.check(stub.url("/login"));
    const auto requests_after_first = stub.requests().size();
    const auto renders_after_first = p.counters().renders.load();
    stub.clear_log();
    const auto second = p.check(stub.url("/login"));
    o.require(!first.cached && requests_after_first == 1 && renders_after_first == 1, "first check did not fetch exactly once");
    o.require(second.cached, "second check not served from store");
    o.require(stub.requests().empty(), std::to_string(stub.requests().size()) + " HTTP requests on second check");
    o.require(p.counters().renders == renders_after_first, "second check rendered");
    o.require(p.counters().fetches == 1, "second check fetched");
    o.require(second.verdict == first.verdict, "verdict changed");
    o.note << "second check: 0 HTTP requests, 0 renders, same verdict";
    return o;
}

// C8
Outcome determinism_criterion(const ExperimentRun& a, const ExperimentRun& b) {
    Outcome o;
    o.require(a.model == b.model, "model files differ");
    o.require(a.eval_json == b.eval_json, "evaluation JSON differs");
    o.note << "model files (" << a.model.size() << " bytes) and evaluation JSON identical across runs";
    return o;
}

// C9
Outcome error_criterion() {
    Outcome o;
    test_support::TempDir home;
    test_support::StubServer stub;
    stub.server().Get("/empty", [](const httplib::Request&, httplib::Response& res) { res.set_content("", "text/html"); });
    stub.server().Get("/big", [](const httplib::Request&, httplib::Response& res) { res.set_content(std::string(8192, 'x'), "text/html"); });
    stub.server().Get("/gone", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
    stub.start();
    nn::save_model(nn::init_model(nn::TrainConfig{}), home / "model.pvm");

    corpus::CorpusConfig ccfg;
    ccfg.per_category = 1;
    ccfg.out_dir = home / "corpus";
    const auto manifest = corpus::build_corpus(ccfg);
    const fs::path one_class = home / "corpus" / "one-class.jsonl";
    for (const auto& s : load_manifest(manifest)) {
        if (s.label == Label::Legitimate) append_manifest(one_class, s);
    }
    write_file(home / "broken.jsonl", Bytes{'n', 'o', 't', ' ', 'j', 's', 'o', 'n', '\n'});
    write_file(home / "bad.pvm", Bytes{'X', 'X', 'X', 'X', 1, 2, 3});

    auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
    struct Case {
        const char* name;
        std::string args;
        int expected;
    };
    const std::vector<Case> cases = {
        {"EmptyContent", "check " + q(stub.url("/empty")), exit_code::fetch},
        {"BodyTooLarge", "check --max-body 1024 " + q(stub.url("/big")), exit_code::fetch},
        {"HttpStatus", "check " + q(stub.url("/gone")), exit_code::fetch},
        {"ManifestParse", "train --manifest " + q(home / "broken.jsonl") + " -o " + q(home / "m.pvm"), exit_code::store},
        {"ModelFormat", "check --model " + q(home / "bad.pvm") + " " + q(stub.url("/empty")), exit_code::model},
        {"DegenerateDataset", "train --split all --steps 1 --manifest " + q(one_class) + " -o " + q(home / "m.pvm"), exit_code::degenerate},
    };
    for (const auto& c : cases) {
        const int rc = test_support::run_cli(c.args, home.path());
        o.require(rc == c.expected, std::string(c.name) + " exited " + std::to_string(rc) + ", expected " + std::to_string(c.expected));
    }

    // Undefined metrics: precision with no positive predictions.
    metrics::ConfusionCounts none{};
    none.tn = 3;
    try {
        (void)metrics::precision(none);
        o.require(false, "Undefined precision not raised");
    } catch (const Error& e) {
        o.require(e.kind() == ErrorKind::Undefined && e.exit_code() == exit_code::degenerate, "Undefined maps to exit " + std::to_string(e.exit_code()));
    }
    o.note << cases.size() + 1 << " error kinds map to their exit codes";
    return o;
}

bool report(int id, const char* title, const std::function<Outcome()>& f) {
    Outcome o;
    try {
        o = f();
    } catch (const std::exception& e) {
        o.pass = false;
        o.note << "exception: " << e.what();
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "C" << id << " " << title << ": " << o.note.str() << std::endl;
    return o.pass;
}

} // namespace

int main() {
    bool ok = true;
    ok &= report(1, "hilbert bijection/inverse/adjacency", hilbert_criterion);
    ok &= report(2, "byte colour map", colour_criterion);
    ok &= report(3, "render oracle and PNG determinism", render_criterion);
    ok &= report(4, "gradient check", gradient_criterion);
    ok &= report(5, "metrics oracle", metrics_criterion);

    test_support::TempDir work;
    std::optional<ExperimentRun> first, second;
    ok &= report(6, "end-to-end synthetic experiment", [&] {
        first = run_experiment(work / "run1");
        return experiment_criterion(*first);
    });
    ok &= report(7, "dedupe", dedupe_criterion);
    ok &= report(8, "end-to-end determinism", [&] {
        if (!first) throw std::runtime_error("first run unavailable");
        second = run_experiment(work / "run2");
        return determinism_criterion(*first, *second);
    });
    ok &= report(9, "error taxonomy exit codes", error_criterion);

    std::cout << (ok ? "all criteria passed" : "some criteria failed") << std::endl;
    return ok ? 0 : 1;
}

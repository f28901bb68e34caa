#pragma once

// Compact CNN for 2-class image classification, trained from scratch.
//
//   conv3x3(c0) relu pool2 -> conv3x3(c1) relu pool2 -> conv3x3(c2) relu pool2
//   -> dense(hidden) relu -> dense(2) -> softmax
//
// All arithmetic is 64-bit floating point and single-threaded per sample.
// Batch gradients are reduced in sample order, so results do not depend on
// how many worker threads computed them.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "phishvis/bytevis.hpp"
#include "phishvis/error.hpp"
#include "phishvis/io.hpp"
#include "phishvis/random.hpp"
#include "phishvis/types.hpp"

namespace phishvis::nn {

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), data(std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{}), 0.0) {}

    std::size_t size() const noexcept { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct Architecture {
    std::array<std::uint32_t, 3> conv_channels{8, 16, 32};
    std::uint32_t hidden = 64;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct TrainConfig {
    double learning_rate = 0.005;
    std::uint32_t steps = 4000;
    std::uint32_t batch_size = 32;
    std::uint64_t seed = 0;
    std::uint32_t input_side = 64;
    Architecture arch{};
    /// Worker threads for per-sample gradients; 0 picks hardware concurrency.
    unsigned threads = 0;

    void validate() const {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw Error(ErrorKind::InvalidInput, "learning rate must be > 0");
        if (steps < 1) throw Error(ErrorKind::InvalidInput, "steps must be >= 1");
        if (batch_size < 1) throw Error(ErrorKind::InvalidInput, "batch size must be >= 1");
        if (input_side == 0 || input_side % 8 != 0) {
            throw Error(ErrorKind::BadShape, "input side " + std::to_string(input_side) + " is not a positive multiple of 8");
        }
        for (auto c : arch.conv_channels) {
            if (c == 0) throw Error(ErrorKind::BadShape, "conv layers need at least one filter");
        }
        if (arch.hidden == 0) throw Error(ErrorKind::BadShape, "hidden layer needs at least one unit");
    }
};

inline constexpr std::size_t n_classes = 2;
inline constexpr std::size_t n_conv = 3;
inline constexpr std::uint32_t input_channels = 3;

struct ConvLayer {
    std::uint32_t in = 0;
    std::uint32_t out = 0;
    Tensor weight; ///< (out, in, 3, 3)
    Tensor bias;   ///< (out)

    friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

struct DenseLayer {
    std::uint32_t in = 0;
    std::uint32_t out = 0;
    Tensor weight; ///< (out, in)
    Tensor bias;   ///< (out)

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

class Model {
public:
    Model() = default;

    Model(std::uint32_t input_side, const Architecture& arch) : input_side_(input_side) {
        if (input_side == 0 || input_side % 8 != 0) {
            throw Error(ErrorKind::BadShape, "input side " + std::to_string(input_side) + " is not a positive multiple of 8");
        }
        std::uint32_t in = input_channels;
        for (std::size_t l = 0; l < n_conv; ++l) {
            const std::uint32_t out = arch.conv_channels[l];
            convs_[l] = ConvLayer{in, out, Tensor({out, in, 3, 3}), Tensor({out})};
            in = out;
        }
        const std::uint32_t s = input_side / 8;
        const std::uint32_t flat = in * s * s;
        hidden_ = DenseLayer{flat, arch.hidden, Tensor({arch.hidden, flat}), Tensor({arch.hidden})};
        output_ = DenseLayer{arch.hidden, n_classes, Tensor({n_classes, arch.hidden}), Tensor({n_classes})};
    }

    std::uint32_t input_side() const noexcept { return input_side_; }
    Architecture architecture() const {
        return {{convs_[0].out, convs_[1].out, convs_[2].out}, hidden_.out};
    }

    const ConvLayer& conv(std::size_t l) const { return convs_[l]; }
    const DenseLayer& hidden() const { return hidden_; }
    const DenseLayer& output() const { return output_; }

    /// Parameter tensors in declaration order: per layer, weight then bias.
    std::vector<Tensor*> parameters() {
        std::vector<Tensor*> p;
        for (auto& c : convs_) {
            p.push_back(&c.weight);
            p.push_back(&c.bias);
        }
        p.insert(p.end(), {&hidden_.weight, &hidden_.bias, &output_.weight, &output_.bias});
        return p;
    }

    std::vector<const Tensor*> parameters() const {
        auto p = const_cast<Model*>(this)->parameters();
        return {p.begin(), p.end()};
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const Tensor* t : parameters()) n += t->size();
        return n;
    }

    friend bool operator==(const Model&, const Model&) = default;

private:
    std::uint32_t input_side_ = 0;
    std::array<ConvLayer, n_conv> convs_{};
    DenseLayer hidden_{};
    DenseLayer output_{};
};

/// One gradient tensor per model parameter, same order as Model::parameters().
using Gradients = std::vector<Tensor>;

inline Gradients zero_gradients(const Model& m) {
    Gradients g;
    for (const Tensor* t : m.parameters()) g.emplace_back(t->shape);
    return g;
}

using Probabilities = std::array<double, n_classes>;

struct Verdict {
    Label label = Label::Legitimate;
    double confidence = 0.5;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct Example {
    Tensor input; ///< (3, side, side), channels scaled to [0, 1]
    Label label = Label::Legitimate;
};

struct TrainingLog {
    std::vector<double> loss; ///< mean batch cross-entropy per step
};

namespace detail {

/// Per-sample activations and backward scratch, sized once per model.
struct Workspace {
    std::array<std::vector<double>, n_conv> padded;   // (in, S+2, S+2)
    std::array<std::vector<double>, n_conv> act;      // (out, S, S) post-ReLU
    std::array<std::vector<double>, n_conv> pooled;   // (out, S/2, S/2)
    std::array<std::vector<std::uint32_t>, n_conv> argmax;
    std::vector<double> hidden; // post-ReLU
    Probabilities logits{};
    Probabilities probs{};

    std::array<std::vector<double>, n_conv> d_act;
    std::array<std::vector<double>, n_conv> d_padded;
    std::array<std::vector<double>, n_conv> d_pooled;
    std::vector<double> d_hidden;

    explicit Workspace(const Model& m) {
        std::uint32_t side = m.input_side();
        for (std::size_t l = 0; l < n_conv; ++l) {
            const auto& c = m.conv(l);
            const std::size_t p = std::size_t{side + 2} * (side + 2);
            padded[l].assign(c.in * p, 0.0);
            d_padded[l].assign(c.in * p, 0.0);
            act[l].assign(std::size_t{c.out} * side * side, 0.0);
            d_act[l].assign(act[l].size(), 0.0);
            side /= 2;
            pooled[l].assign(std::size_t{c.out} * side * side, 0.0);
            d_pooled[l].assign(pooled[l].size(), 0.0);
            argmax[l].assign(pooled[l].size(), 0);
        }
        hidden.assign(m.hidden().out, 0.0);
        d_hidden.assign(m.hidden().out, 0.0);
    }
};

inline void pad_into(std::span<const double> src, std::uint32_t channels, std::uint32_t side, std::vector<double>& dst) {
    const std::size_t ps = side + 2;
    for (std::uint32_t c = 0; c < channels; ++c) {
        for (std::uint32_t y = 0; y < side; ++y) {
            const double* s = src.data() + (std::size_t{c} * side + y) * side;
            double* d = dst.data() + (c * ps + y + 1) * ps + 1;
            std::copy(s, s + side, d);
        }
    }
}

// 3x3 same convolution followed by ReLU. `in` is the zero-padded input.
inline void conv_relu_forward(const ConvLayer& layer, std::uint32_t side, const std::vector<double>& in, std::vector<double>& out) {
    const std::size_t ps = side + 2;
    const std::size_t plane = std::size_t{side} * side;
    for (std::uint32_t o = 0; o < layer.out; ++o) {
        double* dst_plane = out.data() + o * plane;
        std::fill(dst_plane, dst_plane + plane, layer.bias[o]);
        for (std::uint32_t c = 0; c < layer.in; ++c) {
            const double* w = layer.weight.data.data() + (std::size_t{o} * layer.in + c) * 9;
            const double* src_plane = in.data() + c * ps * ps;
            for (std::uint32_t ky = 0; ky < 3; ++ky) {
                for (std::uint32_t kx = 0; kx < 3; ++kx) {
                    const double wv = w[ky * 3 + kx];
                    for (std::uint32_t y = 0; y < side; ++y) {
                        const double* __restrict s = src_plane + (y + ky) * ps + kx;
                        double* __restrict d = dst_plane + std::size_t{y} * side;
                        for (std::uint32_t x = 0; x < side; ++x) d[x] += wv * s[x];
                    }
                }
            }
        }
        for (std::size_t i = 0; i < plane; ++i) dst_plane[i] = std::max(dst_plane[i], 0.0);
    }
}

// 2x2 stride-2 max pool. Ties go to the first element in row-major order.
inline void maxpool_forward(const std::vector<double>& in, std::uint32_t channels, std::uint32_t side, std::vector<double>& out,
                            std::vector<std::uint32_t>& argmax) {
    const std::uint32_t half = side / 2;
    for (std::uint32_t c = 0; c < channels; ++c) {
        for (std::uint32_t y = 0; y < half; ++y) {
            for (std::uint32_t x = 0; x < half; ++x) {
                const std::uint32_t base = (c * side + 2 * y) * side + 2 * x;
                const std::array<std::uint32_t, 4> idx = {base, base + 1, base + side, base + side + 1};
                std::uint32_t best = idx[0];
                for (std::size_t k = 1; k < 4; ++k) {
                    if (in[idx[k]] > in[best]) best = idx[k];
                }
                const std::size_t o = (std::size_t{c} * half + y) * half + x;
                out[o] = in[best];
                argmax[o] = best;
            }
        }
    }
}

inline Probabilities softmax(const Probabilities& logits) {
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double z = e0 + e1;
    return {e0 / z, e1 / z};
}

inline void check_input(const Model& m, const Tensor& x) {
    const std::size_t s = m.input_side();
    if (x.shape != std::vector<std::size_t>{input_channels, s, s} || x.size() != input_channels * s * s) {
        throw Error(ErrorKind::BadShape, "input tensor does not match model input (3, " + std::to_string(s) + ", " + std::to_string(s) + ")");
    }
}

inline void forward(const Model& m, const Tensor& x, Workspace& ws) {
    std::uint32_t side = m.input_side();
    std::span<const double> src(x.data);
    for (std::size_t l = 0; l < n_conv; ++l) {
        const auto& layer = m.conv(l);
        pad_into(src, layer.in, side, ws.padded[l]);
        conv_relu_forward(layer, side, ws.padded[l], ws.act[l]);
        maxpool_forward(ws.act[l], layer.out, side, ws.pooled[l], ws.argmax[l]);
        side /= 2;
        src = ws.pooled[l];
    }
    const auto& h = m.hidden();
    for (std::uint32_t o = 0; o < h.out; ++o) {
        const double* w = h.weight.data.data() + std::size_t{o} * h.in;
        double acc = h.bias[o];
        for (std::uint32_t i = 0; i < h.in; ++i) acc += w[i] * src[i];
        ws.hidden[o] = std::max(acc, 0.0);
    }
    const auto& out = m.output();
    for (std::uint32_t o = 0; o < n_classes; ++o) {
        const double* w = out.weight.data.data() + std::size_t{o} * out.in;
        double acc = out.bias[o];
        for (std::uint32_t i = 0; i < out.in; ++i) acc += w[i] * ws.hidden[i];
        ws.logits[o] = acc;
    }
    ws.probs = softmax(ws.logits);
}

// Accumulates d(loss)/d(params) for one example into `g` (added, not
// overwritten). Loss is cross-entropy of ws.probs against `label`.
inline void backward(const Model& m, Label label, Workspace& ws, Gradients& g, double scale) {
    // g layout: [conv0.w, conv0.b, conv1.w, conv1.b, conv2.w, conv2.b, hid.w, hid.b, out.w, out.b]
    Probabilities d_logits = ws.probs;
    d_logits[class_index(label)] -= 1.0;
    for (auto& v : d_logits) v *= scale;

    const auto& out = m.output();
    Tensor& g_out_w = g[8];
    Tensor& g_out_b = g[9];
    std::fill(ws.d_hidden.begin(), ws.d_hidden.end(), 0.0);
    for (std::uint32_t o = 0; o < n_classes; ++o) {
        g_out_b[o] += d_logits[o];
        double* gw = g_out_w.data.data() + std::size_t{o} * out.in;
        const double* w = out.weight.data.data() + std::size_t{o} * out.in;
        for (std::uint32_t i = 0; i < out.in; ++i) {
            gw[i] += d_logits[o] * ws.hidden[i];
            ws.d_hidden[i] += w[i] * d_logits[o];
        }
    }

    const auto& h = m.hidden();
    Tensor& g_h_w = g[6];
    Tensor& g_h_b = g[7];
    const std::vector<double>& flat = ws.pooled[n_conv - 1];
    std::vector<double>& d_flat = ws.d_pooled[n_conv - 1];
    std::fill(d_flat.begin(), d_flat.end(), 0.0);
    for (std::uint32_t o = 0; o < h.out; ++o) {
        const double d = ws.hidden[o] > 0.0 ? ws.d_hidden[o] : 0.0;
        if (d == 0.0) continue;
        g_h_b[o] += d;
        double* __restrict gw = g_h_w.data.data() + std::size_t{o} * h.in;
        const double* __restrict w = h.weight.data.data() + std::size_t{o} * h.in;
        double* __restrict df = d_flat.data();
        for (std::uint32_t i = 0; i < h.in; ++i) {
            gw[i] += d * flat[i];
            df[i] += w[i] * d;
        }
    }

    std::uint32_t side = m.input_side() >> (n_conv - 1);
    for (std::size_t li = n_conv; li-- > 0;) {
        const auto& layer = m.conv(li);
        const std::size_t plane = std::size_t{side} * side;
        const std::size_t ps = side + 2;

        // Route pooled gradient to the selected input, then mask by ReLU.
        auto& d_act = ws.d_act[li];
        std::fill(d_act.begin(), d_act.end(), 0.0);
        const auto& d_pool = ws.d_pooled[li];
        const auto& arg = ws.argmax[li];
        for (std::size_t i = 0; i < d_pool.size(); ++i) d_act[arg[i]] += d_pool[i];
        const auto& act = ws.act[li];
        for (std::size_t i = 0; i < d_act.size(); ++i) {
            if (!(act[i] > 0.0)) d_act[i] = 0.0;
        }

        Tensor& gw = g[2 * li];
        Tensor& gb = g[2 * li + 1];
        const bool need_input_grad = li > 0;
        auto& d_pad = ws.d_padded[li];
        if (need_input_grad) std::fill(d_pad.begin(), d_pad.end(), 0.0);
        std::vector<double> row_acc(side);

        for (std::uint32_t o = 0; o < layer.out; ++o) {
            const double* dp = d_act.data() + o * plane;
            double bsum = 0.0;
            for (std::size_t i = 0; i < plane; ++i) bsum += dp[i];
            gb[o] += bsum;
            for (std::uint32_t c = 0; c < layer.in; ++c) {
                const double* in_plane = ws.padded[li].data() + c * ps * ps;
                double* din_plane = d_pad.data() + c * ps * ps;
                const std::size_t wbase = (std::size_t{o} * layer.in + c) * 9;
                for (std::uint32_t ky = 0; ky < 3; ++ky) {
                    for (std::uint32_t kx = 0; kx < 3; ++kx) {
                        std::fill(row_acc.begin(), row_acc.end(), 0.0);
                        double* __restrict acc = row_acc.data();
                        const double wv = layer.weight[wbase + ky * 3 + kx];
                        for (std::uint32_t y = 0; y < side; ++y) {
                            const double* __restrict s = in_plane + (y + ky) * ps + kx;
                            const double* __restrict d = dp + std::size_t{y} * side;
                            for (std::uint32_t x = 0; x < side; ++x) acc[x] += d[x] * s[x];
                            if (need_input_grad) {
                                double* __restrict ds = din_plane + (y + ky) * ps + kx;
                                for (std::uint32_t x = 0; x < side; ++x) ds[x] += wv * d[x];
                            }
                        }
                        double sum = 0.0;
                        for (std::uint32_t x = 0; x < side; ++x) sum += acc[x];
                        gw[wbase + ky * 3 + kx] += sum;
                    }
                }
            }
        }

        if (need_input_grad) {
            auto& d_prev = ws.d_pooled[li - 1];
            for (std::uint32_t c = 0; c < layer.in; ++c) {
                for (std::uint32_t y = 0; y < side; ++y) {
                    const double* s = d_pad.data() + (c * ps + y + 1) * ps + 1;
                    std::copy(s, s + side, d_prev.data() + (std::size_t{c} * side + y) * side);
                }
            }
        }
        side *= 2;
    }
}

inline double cross_entropy(const Probabilities& p, Label label) {
    return -std::log(std::max(p[class_index(label)], 1e-300));
}

} // namespace detail

/// He-normal weights (std = sqrt(2 / fan_in)) drawn in declaration order,
/// zero biases.
inline Model init_model(const TrainConfig& cfg) {
    cfg.validate();
    Model m(cfg.input_side, cfg.arch);
    Rng rng(cfg.seed);
    auto params = m.parameters();
    for (std::size_t i = 0; i < params.size(); i += 2) {
        Tensor& w = *params[i];
        std::size_t fan_in = 1;
        for (std::size_t d = 1; d < w.shape.size(); ++d) fan_in *= w.shape[d];
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (double& v : w.data) v = std_dev * rng.normal();
    }
    return m;
}

/// Block-average an image to `out_side`, rounding each channel to nearest
/// (halves round up).
inline VisImage downsample(const VisImage& img, std::uint32_t out_side) {
    if (out_side == 0 || !img.valid() || img.side % out_side != 0) {
        throw Error(ErrorKind::BadShape, "cannot downsample side " + std::to_string(img.side) + " to " + std::to_string(out_side));
    }
    const std::uint32_t f = img.side / out_side;
    if (f == 1) return img;
    const std::uint32_t n = f * f;
    VisImage out(out_side);
    for (std::uint32_t y = 0; y < out_side; ++y) {
        for (std::uint32_t x = 0; x < out_side; ++x) {
            std::uint32_t r = 0, g = 0, b = 0;
            for (std::uint32_t dy = 0; dy < f; ++dy) {
                for (std::uint32_t dx = 0; dx < f; ++dx) {
                    const Rgb& p = img.at(x * f + dx, y * f + dy);
                    r += p.r;
                    g += p.g;
                    b += p.b;
                }
            }
            auto round = [n](std::uint32_t sum) { return static_cast<std::uint8_t>((2 * sum + n) / (2 * n)); };
            out.at(x, y) = {round(r), round(g), round(b)};
        }
    }
    return out;
}

/// (3, side, side) tensor with channels divided by 255.
inline Tensor to_tensor(const VisImage& img) {
    Tensor t({input_channels, img.side, img.side});
    const std::size_t plane = std::size_t{img.side} * img.side;
    for (std::size_t i = 0; i < plane; ++i) {
        t[i] = img.pixels[i].r / 255.0;
        t[plane + i] = img.pixels[i].g / 255.0;
        t[2 * plane + i] = img.pixels[i].b / 255.0;
    }
    return t;
}

inline Probabilities forward(const Model& m, const Tensor& x) {
    detail::check_input(m, x);
    detail::Workspace ws(m);
    detail::forward(m, x, ws);
    return ws.probs;
}

inline Probabilities forward(const Model& m, const VisImage& img) {
    if (img.side != m.input_side()) {
        throw Error(ErrorKind::BadShape, "image side " + std::to_string(img.side) + " != model input side " + std::to_string(m.input_side()));
    }
    return forward(m, to_tensor(img));
}

/// Gradient of the mean cross-entropy over `batch`. Also reports the mean loss.
inline Gradients gradients(const Model& m, std::span<const Example> batch, double* mean_loss = nullptr, unsigned threads = 1) {
    if (batch.empty()) throw Error(ErrorKind::BadShape, "empty batch");
    for (const auto& ex : batch) detail::check_input(m, ex.input);

    const double scale = 1.0 / static_cast<double>(batch.size());
    Gradients total = zero_gradients(m);
    std::vector<double> losses(batch.size());

    auto add_into = [](Gradients& dst, const Gradients& src) {
        for (std::size_t t = 0; t < dst.size(); ++t) {
            double* __restrict d = dst[t].data.data();
            const double* __restrict s = src[t].data.data();
            for (std::size_t i = 0; i < dst[t].size(); ++i) d[i] += s[i];
        }
    };
    auto reset = [](Gradients& g) {
        for (auto& t : g) std::fill(t.data.begin(), t.data.end(), 0.0);
    };

    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(batch.size()));
    if (threads == 1) {
        detail::Workspace ws(m);
        Gradients scratch = zero_gradients(m);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            reset(scratch);
            detail::forward(m, batch[i].input, ws);
            losses[i] = detail::cross_entropy(ws.probs, batch[i].label);
            detail::backward(m, batch[i].label, ws, scratch, scale);
            add_into(total, scratch);
        }
    } else {
        std::vector<Gradients> per_sample(batch.size());
        {
            std::vector<std::jthread> workers;
            for (unsigned t = 0; t < threads; ++t) {
                workers.emplace_back([&, t] {
                    detail::Workspace ws(m);
                    for (std::size_t i = t; i < batch.size(); i += threads) {
                        per_sample[i] = zero_gradients(m);
                        detail::forward(m, batch[i].input, ws);
                        losses[i] = detail::cross_entropy(ws.probs, batch[i].label);
                        detail::backward(m, batch[i].label, ws, per_sample[i], scale);
                    }
                });
            }
        }
        for (const auto& g : per_sample) add_into(total, g);
    }
    if (mean_loss != nullptr) {
        double sum = 0.0;
        for (double l : losses) sum += l;
        *mean_loss = sum * scale;
    }
    return total;
}

/// Mean cross-entropy of `batch`; used by finite-difference checks.
inline double loss(const Model& m, std::span<const Example> batch) {
    detail::Workspace ws(m);
    double sum = 0.0;
    for (const auto& ex : batch) {
        detail::check_input(m, ex.input);
        detail::forward(m, ex.input, ws);
        sum += detail::cross_entropy(ws.probs, ex.label);
    }
    return sum / static_cast<double>(batch.size());
}

inline void sgd_step(Model& m, const Gradients& g, double lr) {
    auto params = m.parameters();
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t]->size(); ++i) (*params[t])[i] -= lr * g[t][i];
    }
}

/// Plain minibatch SGD over seeded reshuffled epochs.
inline Model train(std::span<const Example> data, const TrainConfig& cfg, TrainingLog* log = nullptr) {
    cfg.validate();
    bool has[n_classes] = {false, false};
    for (const auto& ex : data) has[class_index(ex.label)] = true;
    if (!has[0] || !has[1]) {
        throw Error(ErrorKind::DegenerateDataset, "training data must contain both legitimate and phishing samples");
    }
    Model m = init_model(cfg);
    for (const auto& ex : data) detail::check_input(m, ex.input);

    Rng rng(cfg.seed ^ 0x5DEECE66Dull);
    std::vector<std::size_t> order(data.size());
    std::size_t cursor = order.size();
    auto reshuffle = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        cursor = 0;
    };

    const unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    std::vector<Example> batch(cfg.batch_size);
    if (log != nullptr) log->loss.assign(cfg.steps, 0.0);
    for (std::uint32_t step = 0; step < cfg.steps; ++step) {
        for (auto& slot : batch) {
            if (cursor == order.size()) reshuffle();
            slot = data[order[cursor++]];
        }
        double batch_loss = 0.0;
        const Gradients g = gradients(m, batch, &batch_loss, threads);
        sgd_step(m, g, cfg.learning_rate);
        if (log != nullptr) log->loss[step] = batch_loss;
    }
    return m;
}

/// Argmax of the two class probabilities; exact ties go to legitimate.
inline Verdict verdict_from(const Probabilities& p) {
    return p[1] > p[0] ? Verdict{Label::Phishing, p[1]} : Verdict{Label::Legitimate, p[0]};
}

inline Verdict predict(const Model& m, const VisImage& img) { return verdict_from(forward(m, img)); }

// Model file layout (all integers little-endian u32, floats little-endian f64):
//   "PVM1" | version u8 | input_side | layer_count
//   per layer: kind (0 conv, 1 dense) | rank | dims of the weight tensor
//   then every parameter tensor in declaration order (weight, bias per layer).
inline constexpr std::array<char, 4> model_magic = {'P', 'V', 'M', '1'};
inline constexpr std::uint8_t model_version = 1;

namespace detail {

inline void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(Bytes& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw Error(ErrorKind::ModelFormat, "model file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_++]} << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_++]} << (8 * i);
        return std::bit_cast<double>(v);
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Bytes serialize_model(const Model& m) {
    Bytes out(model_magic.begin(), model_magic.end());
    out.push_back(model_version);
    detail::put_u32(out, m.input_side());
    const auto params = m.parameters();
    detail::put_u32(out, static_cast<std::uint32_t>(params.size() / 2));
    for (std::size_t i = 0; i < params.size(); i += 2) {
        const Tensor& w = *params[i];
        detail::put_u32(out, w.shape.size() == 4 ? 0 : 1);
        detail::put_u32(out, static_cast<std::uint32_t>(w.shape.size()));
        for (auto d : w.shape) detail::put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (const Tensor* t : params) {
        for (double v : t->data) detail::put_f64(out, v);
    }
    return out;
}

inline Model deserialize_model(ByteView data) {
    auto bad = [](const std::string& why) { return Error(ErrorKind::ModelFormat, why); };
    detail::Reader in(data);
    in.need(model_magic.size());
    for (char c : model_magic) {
        if (in.u8() != static_cast<std::uint8_t>(c)) throw bad("bad magic");
    }
    if (const auto v = in.u8(); v != model_version) throw bad("unsupported model version " + std::to_string(v));
    const std::uint32_t side = in.u32();
    if (side == 0 || side % 8 != 0 || side > 4096) throw bad("bad input side " + std::to_string(side));
    const std::uint32_t layers = in.u32();
    if (layers != n_conv + 2) throw bad("expected 5 parametric layers, found " + std::to_string(layers));

    Architecture arch;
    std::uint32_t expected_in = input_channels;
    for (std::uint32_t l = 0; l < layers; ++l) {
        const std::uint32_t kind = in.u32();
        const std::uint32_t rank = in.u32();
        const bool conv = l < n_conv;
        if (kind != (conv ? 0u : 1u) || rank != (conv ? 4u : 2u)) throw bad("layer " + std::to_string(l) + " has wrong kind");
        std::vector<std::uint32_t> dims(rank);
        for (auto& d : dims) {
            d = in.u32();
            if (d == 0 || d > (1u << 20)) throw bad("layer dimension out of range");
        }
        if (dims[1] != expected_in) throw bad("layer " + std::to_string(l) + " input does not chain");
        if (conv) {
            if (dims[2] != 3 || dims[3] != 3) throw bad("conv kernels must be 3x3");
            arch.conv_channels[l] = dims[0];
            expected_in = dims[0];
            if (l == n_conv - 1) expected_in = dims[0] * (side / 8) * (side / 8);
        } else if (l == n_conv) {
            arch.hidden = dims[0];
            expected_in = dims[0];
        } else if (dims[0] != n_classes) {
            throw bad("output layer must have 2 units");
        }
    }
    Model m(side, arch);
    if (m.parameter_count() > (std::size_t{1} << 28)) throw bad("model too large");
    in.need(m.parameter_count() * 8);
    for (Tensor* t : m.parameters()) {
        for (double& v : t->data) v = in.f64();
    }
    if (!in.at_end()) throw bad("trailing bytes after parameters");
    return m;
}

inline void save_model(const Model& m, const std::filesystem::path& path) { write_file(path, serialize_model(m)); }

inline Model load_model(const std::filesystem::path& path) {
    Bytes data;
    try {
        data = read_file(path);
    } catch (const Error& e) {
        throw Error(ErrorKind::ModelFormat, e.what());
    }
    return deserialize_model(data);
}

} // namespace phishvis::nn

#include "uaplab/net.hpp"

#include <cmath>
#include <stdexcept>

#include "uaplab/rng.hpp"
#include "uaplab/threads.hpp"

namespace uaplab {

std::string layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::Input: return "input";
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Relu: return "relu";
        case LayerKind::MaxPool2x2: return "maxpool2x2";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Dense: return "dense";
    }
    throw std::logic_error("layer_kind_name: bad kind");
}

void Classifier::finalize() {
    if (layers.empty() || layers.front().kind != LayerKind::Input)
        throw std::invalid_argument("classifier '" + id + "': first layer must be input");
    if (layers.front().extents.size() != 3)
        throw std::invalid_argument("classifier '" + id + "': input needs [C,H,W] extents");

    shapes.clear();
    shapes.reserve(layers.size());
    FeatShape cur{layers[0].extents[0], layers[0].extents[1], layers[0].extents[2]};
    shapes.push_back(cur);

    for (std::size_t i = 1; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        const std::string where = "classifier '" + id + "' layer " + std::to_string(i) +
                                  " (" + layer_kind_name(l.kind) + ")";
        switch (l.kind) {
            case LayerKind::Input:
                throw std::invalid_argument(where + ": input only allowed first");
            case LayerKind::Conv2d: {
                if (l.extents.size() != 4)
                    throw std::invalid_argument(where + ": needs [outC,inC,kH,kW]");
                auto [oc, ic, kh, kw] = std::tuple(l.extents[0], l.extents[1],
                                                   l.extents[2], l.extents[3]);
                if (ic != cur.c)
                    throw std::invalid_argument(where + ": expects " + std::to_string(ic) +
                                                " input channels, got " + std::to_string(cur.c));
                if (cur.h < kh || cur.w < kw)
                    throw std::invalid_argument(where + ": kernel larger than feature map");
                if (l.weights.size() != oc * ic * kh * kw || l.bias.size() != oc)
                    throw std::invalid_argument(where + ": parameter size mismatch");
                cur = {oc, cur.h - kh + 1, cur.w - kw + 1};
                break;
            }
            case LayerKind::Relu:
                break;
            case LayerKind::MaxPool2x2:
                if (cur.h < 2 || cur.w < 2)
                    throw std::invalid_argument(where + ": feature map smaller than window");
                cur = {cur.c, cur.h / 2, cur.w / 2};
                break;
            case LayerKind::Flatten:
                cur = {cur.count(), 1, 1};
                break;
            case LayerKind::Dense: {
                if (l.extents.size() != 2)
                    throw std::invalid_argument(where + ": needs [out,in]");
                std::size_t out = l.extents[0], in = l.extents[1];
                if (cur.h != 1 || cur.w != 1 || cur.c != in)
                    throw std::invalid_argument(where + ": expects flat input of " +
                                                std::to_string(in) + ", got " +
                                                std::to_string(cur.count()));
                if (l.weights.size() != out * in || l.bias.size() != out)
                    throw std::invalid_argument(where + ": parameter size mismatch");
                cur = {out, 1, 1};
                break;
            }
        }
        shapes.push_back(cur);
    }

    if (cur.h != 1 || cur.w != 1 || cur.c < 1)
        throw std::invalid_argument("classifier '" + id + "': final shape is not a logit vector");
    class_count = static_cast<int>(cur.c);
}

ClassifierBuilder::ClassifierBuilder(std::string id, std::size_t c, std::size_t h,
                                     std::size_t w) {
    net_.id = std::move(id);
    net_.layers.push_back({LayerKind::Input, {c, h, w}, {}, {}});
}

ClassifierBuilder& ClassifierBuilder::conv2d(std::size_t out_channels, std::size_t kernel) {
    net_.layers.push_back({LayerKind::Conv2d, {out_channels, 0, kernel, kernel}, {}, {}});
    return *this;
}
ClassifierBuilder& ClassifierBuilder::relu() {
    net_.layers.push_back({LayerKind::Relu, {}, {}, {}});
    return *this;
}
ClassifierBuilder& ClassifierBuilder::maxpool2x2() {
    net_.layers.push_back({LayerKind::MaxPool2x2, {}, {}, {}});
    return *this;
}
ClassifierBuilder& ClassifierBuilder::flatten() {
    net_.layers.push_back({LayerKind::Flatten, {}, {}, {}});
    return *this;
}
ClassifierBuilder& ClassifierBuilder::dense(std::size_t out) {
    net_.layers.push_back({LayerKind::Dense, {out, 0}, {}, {}});
    return *this;
}

Classifier ClassifierBuilder::build(std::uint64_t seed) {
    Rng rng(seed);
    // Resolve the open extents and initialize parameters in layer order.
    FeatShape cur{net_.layers[0].extents[0], net_.layers[0].extents[1],
                  net_.layers[0].extents[2]};
    for (std::size_t i = 1; i < net_.layers.size(); ++i) {
        Layer& l = net_.layers[i];
        switch (l.kind) {
            case LayerKind::Conv2d: {
                l.extents[1] = cur.c;
                std::size_t oc = l.extents[0], ic = l.extents[1];
                std::size_t kh = l.extents[2], kw = l.extents[3];
                std::size_t fan_in = ic * kh * kw;
                float sd = std::sqrt(2.0f / static_cast<float>(fan_in));
                l.weights.resize(oc * ic * kh * kw);
                for (float& v : l.weights) v = static_cast<float>(rng.normal(0.0, sd));
                l.bias.assign(oc, 0.0f);
                cur = {oc, cur.h - kh + 1, cur.w - kw + 1};
                break;
            }
            case LayerKind::Dense: {
                std::size_t in = cur.count();
                l.extents[1] = in;
                std::size_t out = l.extents[0];
                float sd = std::sqrt(2.0f / static_cast<float>(in));
                l.weights.resize(out * in);
                for (float& v : l.weights) v = static_cast<float>(rng.normal(0.0, sd));
                l.bias.assign(out, 0.0f);
                cur = {out, 1, 1};
                break;
            }
            case LayerKind::Relu:
                break;
            case LayerKind::MaxPool2x2:
                cur = {cur.c, cur.h / 2, cur.w / 2};
                break;
            case LayerKind::Flatten:
                cur = {cur.count(), 1, 1};
                break;
            case LayerKind::Input:
                break;
        }
    }
    net_.finalize();
    return std::move(net_);
}

Classifier make_ref_a(int class_count, std::size_t c, std::size_t h, std::size_t w,
                      std::uint64_t seed) {
    return ClassifierBuilder("ref-a", c, h, w)
        .conv2d(16, 3).relu().maxpool2x2()
        .conv2d(32, 3).relu().maxpool2x2()
        .flatten().dense(static_cast<std::size_t>(class_count))
        .build(seed);
}

Classifier make_ref_b(int class_count, std::size_t c, std::size_t h, std::size_t w,
                      std::uint64_t seed) {
    return ClassifierBuilder("ref-b", c, h, w)
        .conv2d(8, 3).relu().maxpool2x2()
        .flatten().dense(64).relu()
        .dense(static_cast<std::size_t>(class_count))
        .build(seed);
}

Classifier make_arch(const std::string& name, int class_count, std::size_t c,
                     std::size_t h, std::size_t w, std::uint64_t seed) {
    if (name == "ref-a") return make_ref_a(class_count, c, h, w, seed);
    if (name == "ref-b") return make_ref_b(class_count, c, h, w, seed);
    throw std::invalid_argument("unknown architecture '" + name + "' (expected ref-a|ref-b)");
}

// ---------------------------------------------------------------------------
// Per-sample kernels

SampleTape::SampleTape(const Classifier& net) : net_(&net) {
    act_.resize(net.layers.size());
    grad_.resize(net.layers.size());
    pool_src_.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        act_[i].resize(net.shapes[i].count());
        grad_[i].resize(net.shapes[i].count());
        if (net.layers[i].kind == LayerKind::MaxPool2x2)
            pool_src_[i].resize(net.shapes[i].count());
    }
}

std::span<const float> SampleTape::run_forward(std::span<const float> image) {
    const Classifier& net = *net_;
    if (image.size() != net.input_size())
        throw std::invalid_argument("forward: image has " + std::to_string(image.size()) +
                                    " values, classifier expects " +
                                    std::to_string(net.input_size()));
    std::copy(image.begin(), image.end(), act_[0].begin());

    for (std::size_t i = 1; i < net.layers.size(); ++i) {
        const Layer& l = net.layers[i];
        const FeatShape in = net.shapes[i - 1];
        const FeatShape out = net.shapes[i];
        const float* x = act_[i - 1].data();
        float* y = act_[i].data();

        switch (l.kind) {
            case LayerKind::Conv2d: {
                const std::size_t oc = l.extents[0], ic = l.extents[1];
                const std::size_t kh = l.extents[2], kw = l.extents[3];
                for (std::size_t o = 0; o < oc; ++o) {
                    float* yo = y + o * out.h * out.w;
                    const float b = l.bias[o];
                    for (std::size_t p = 0; p < out.h * out.w; ++p) yo[p] = b;
                    for (std::size_t ci = 0; ci < ic; ++ci) {
                        const float* xi = x + ci * in.h * in.w;
                        const float* wk = l.weights.data() + (o * ic + ci) * kh * kw;
                        for (std::size_t ky = 0; ky < kh; ++ky) {
                            for (std::size_t kx = 0; kx < kw; ++kx) {
                                const float wv = wk[ky * kw + kx];
                                for (std::size_t oy = 0; oy < out.h; ++oy) {
                                    const float* xrow = xi + (oy + ky) * in.w + kx;
                                    float* yrow = yo + oy * out.w;
                                    for (std::size_t ox = 0; ox < out.w; ++ox)
                                        yrow[ox] += wv * xrow[ox];
                                }
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::Relu:
                for (std::size_t p = 0; p < out.count(); ++p)
                    y[p] = x[p] > 0.0f ? x[p] : 0.0f;
                break;
            case LayerKind::MaxPool2x2: {
                std::int32_t* src = pool_src_[i].data();
                for (std::size_t ci = 0; ci < out.c; ++ci) {
                    const float* xi = x + ci * in.h * in.w;
                    float* yo = y + ci * out.h * out.w;
                    std::int32_t* so = src + ci * out.h * out.w;
                    for (std::size_t oy = 0; oy < out.h; ++oy) {
                        for (std::size_t ox = 0; ox < out.w; ++ox) {
                            // first max in scan order wins (deterministic routing)
                            std::size_t base = (2 * oy) * in.w + 2 * ox;
                            std::size_t best = base;
                            float bv = xi[base];
                            const std::size_t cand[3] = {base + 1, base + in.w,
                                                         base + in.w + 1};
                            for (std::size_t q : cand) {
                                if (xi[q] > bv) { bv = xi[q]; best = q; }
                            }
                            yo[oy * out.w + ox] = bv;
                            so[oy * out.w + ox] =
                                static_cast<std::int32_t>(ci * in.h * in.w + best);
                        }
                    }
                }
                break;
            }
            case LayerKind::Flatten:
                std::copy(x, x + in.count(), y);
                break;
            case LayerKind::Dense: {
                const std::size_t out_n = l.extents[0], in_n = l.extents[1];
                for (std::size_t o = 0; o < out_n; ++o) {
                    const float* wrow = l.weights.data() + o * in_n;
                    float acc = l.bias[o];
                    for (std::size_t j = 0; j < in_n; ++j) acc += wrow[j] * x[j];
                    y[o] = acc;
                }
                break;
            }
            case LayerKind::Input:
                break;
        }
    }
    return {act_.back().data(), act_.back().size()};
}

void SampleTape::run_backward(std::span<const float> dlogits, std::span<float> dinput,
                              ParamGrads* pg) {
    const Classifier& net = *net_;
    const std::size_t last = net.layers.size() - 1;
    if (dlogits.size() != static_cast<std::size_t>(net.class_count))
        throw std::invalid_argument("backward: loss gradient size mismatch");
    check_finite(dlogits, "loss gradient over logits");
    std::copy(dlogits.begin(), dlogits.end(), grad_[last].begin());

    for (std::size_t i = last; i >= 1; --i) {
        const Layer& l = net.layers[i];
        const FeatShape in = net.shapes[i - 1];
        const FeatShape out = net.shapes[i];
        const float* x = act_[i - 1].data();
        const float* dy = grad_[i].data();
        float* dx = grad_[i - 1].data();

        switch (l.kind) {
            case LayerKind::Conv2d: {
                const std::size_t oc = l.extents[0], ic = l.extents[1];
                const std::size_t kh = l.extents[2], kw = l.extents[3];
                std::fill(dx, dx + in.count(), 0.0f);
                for (std::size_t o = 0; o < oc; ++o) {
                    const float* dyo = dy + o * out.h * out.w;
                    if (pg) {
                        float acc = 0.0f;
                        for (std::size_t p = 0; p < out.h * out.w; ++p) acc += dyo[p];
                        pg->bias[i][o] += acc;
                    }
                    for (std::size_t ci = 0; ci < ic; ++ci) {
                        const float* xi = x + ci * in.h * in.w;
                        float* dxi = dx + ci * in.h * in.w;
                        const float* wk = l.weights.data() + (o * ic + ci) * kh * kw;
                        float* dwk = pg ? pg->weights[i].data() + (o * ic + ci) * kh * kw
                                        : nullptr;
                        for (std::size_t ky = 0; ky < kh; ++ky) {
                            for (std::size_t kx = 0; kx < kw; ++kx) {
                                const float wv = wk[ky * kw + kx];
                                float wacc = 0.0f;
                                for (std::size_t oy = 0; oy < out.h; ++oy) {
                                    const float* dyrow = dyo + oy * out.w;
                                    const float* xrow = xi + (oy + ky) * in.w + kx;
                                    float* dxrow = dxi + (oy + ky) * in.w + kx;
                                    for (std::size_t ox = 0; ox < out.w; ++ox) {
                                        dxrow[ox] += wv * dyrow[ox];
                                        wacc += dyrow[ox] * xrow[ox];
                                    }
                                }
                                if (dwk) dwk[ky * kw + kx] += wacc;
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::Relu:
                for (std::size_t p = 0; p < out.count(); ++p)
                    dx[p] = x[p] > 0.0f ? dy[p] : 0.0f;
                break;
            case LayerKind::MaxPool2x2: {
                std::fill(dx, dx + in.count(), 0.0f);
                const std::int32_t* src = pool_src_[i].data();
                for (std::size_t p = 0; p < out.count(); ++p) dx[src[p]] += dy[p];
                break;
            }
            case LayerKind::Flatten:
                std::copy(dy, dy + out.count(), dx);
                break;
            case LayerKind::Dense: {
                const std::size_t out_n = l.extents[0], in_n = l.extents[1];
                std::fill(dx, dx + in_n, 0.0f);
                for (std::size_t o = 0; o < out_n; ++o) {
                    const float g = dy[o];
                    const float* wrow = l.weights.data() + o * in_n;
                    if (pg) {
                        pg->bias[i][o] += g;
                        float* dwrow = pg->weights[i].data() + o * in_n;
                        for (std::size_t j = 0; j < in_n; ++j) {
                            dwrow[j] += g * x[j];
                            dx[j] += g * wrow[j];
                        }
                    } else {
                        for (std::size_t j = 0; j < in_n; ++j) dx[j] += g * wrow[j];
                    }
                }
                break;
            }
            case LayerKind::Input:
                break;
        }
        check_finite(std::span<const float>(dx, in.count()),
                     "gradient after layer " + std::to_string(i) + " (" +
                         layer_kind_name(l.kind) + ")");
    }
    std::copy(grad_[0].begin(), grad_[0].end(), dinput.begin());
}

// ---------------------------------------------------------------------------
// Batch drivers

namespace {

void validate_batch(const Classifier& net, const Tensor& batch, const char* op) {
    const FeatShape& in = net.input_shape();
    if (batch.rank() != 4 || batch.extent(1) != in.c || batch.extent(2) != in.h ||
        batch.extent(3) != in.w) {
        throw std::invalid_argument(std::string(op) + ": batch shape " +
                                    shape_string(batch.shape) + " does not match input [N," +
                                    std::to_string(in.c) + "," + std::to_string(in.h) + "," +
                                    std::to_string(in.w) + "] of classifier '" + net.id + "'");
    }
}

// Runs fn(sample_index, tape) over the batch in parallel, rethrowing the
// first (lowest-index) failure after the region joins.
template <class Fn>
void parallel_samples(const Classifier& net, std::size_t n, Fn&& fn) {
    std::vector<std::string> errors(n);
    bool failed = false;
#pragma omp parallel num_threads(worker_count())
    {
        SampleTape tape(net);
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            try {
                fn(static_cast<std::size_t>(i), tape);
            } catch (const std::exception& e) {
                errors[i] = e.what();
#pragma omp atomic write
                failed = true;
            }
        }
    }
    if (failed) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!errors[i].empty())
                throw std::runtime_error(errors[i] + " (sample " + std::to_string(i) + ")");
        }
    }
}

} // namespace

Tensor forward(const Classifier& net, const Tensor& batch) {
    validate_batch(net, batch, "forward");
    const std::size_t n = batch.extent(0);
    const std::size_t d = net.input_size();
    const std::size_t k = static_cast<std::size_t>(net.class_count);
    Tensor out = Tensor::zeros({n, k});

    parallel_samples(net, n, [&](std::size_t i, SampleTape& tape) {
        auto logits = tape.run_forward({batch.data.data() + i * d, d});
        std::copy(logits.begin(), logits.end(), out.data.begin() + i * k);
    });
    check_finite(out.view(), "logits");
    return out;
}

std::vector<float> forward_single(const Classifier& net, std::span<const float> image) {
    SampleTape tape(net);
    auto logits = tape.run_forward(image);
    std::vector<float> out(logits.begin(), logits.end());
    check_finite(out, "logits");
    return out;
}

int argmax_lowest(std::span<const float> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return static_cast<int>(best);
}

std::vector<int> predict(const Classifier& net, const Tensor& batch) {
    Tensor logits = forward(net, batch);
    const std::size_t n = logits.extent(0), k = logits.extent(1);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = argmax_lowest({logits.data.data() + i * k, k});
    return out;
}

namespace {

Tensor input_gradient_impl(const Classifier& net, const Tensor& batch,
                           LossVariant variant, double kappa,
                           std::span<const int> per_sample_cls, int uniform_cls) {
    validate_batch(net, batch, "input_gradient");
    const std::size_t n = batch.extent(0);
    const std::size_t d = net.input_size();
    Tensor out = Tensor::zeros(batch.shape);

    parallel_samples(net, n, [&](std::size_t i, SampleTape& tape) {
        auto logits = tape.run_forward({batch.data.data() + i * d, d});
        LossKind kind{variant, kappa,
                      per_sample_cls.empty() ? uniform_cls : per_sample_cls[i]};
        LossEval<float> le = eval_loss<float>(kind, logits);
        tape.run_backward(le.grad, {out.data.data() + i * d, d}, nullptr);
    });
    return out;
}

} // namespace

Tensor input_gradient(const Classifier& net, const Tensor& batch, const LossKind& loss) {
    return input_gradient_impl(net, batch, loss.variant, loss.kappa, {}, loss.cls);
}

Tensor input_gradient(const Classifier& net, const Tensor& batch, LossVariant variant,
                      double kappa, std::span<const int> per_sample_cls) {
    if (per_sample_cls.size() != batch.extent(0))
        throw std::invalid_argument("input_gradient: need one class per sample");
    return input_gradient_impl(net, batch, variant, kappa, per_sample_cls, 0);
}

ParamGrads ParamGrads::zeros_like(const Classifier& net) {
    ParamGrads pg;
    pg.weights.resize(net.layers.size());
    pg.bias.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        pg.weights[i].assign(net.layers[i].weights.size(), 0.0f);
        pg.bias[i].assign(net.layers[i].bias.size(), 0.0f);
    }
    return pg;
}

void ParamGrads::accumulate(const ParamGrads& other) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
        for (std::size_t j = 0; j < weights[i].size(); ++j)
            weights[i][j] += other.weights[i][j];
        for (std::size_t j = 0; j < bias[i].size(); ++j) bias[i][j] += other.bias[i][j];
    }
}

void ParamGrads::scale(float s) {
    for (auto& w : weights)
        for (float& v : w) v *= s;
    for (auto& b : bias)
        for (float& v : b) v *= s;
}

std::uint64_t param_checksum(const Classifier& net) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::vector<float>& vals) {
        for (float v : vals) {
            std::uint32_t bits;
            static_assert(sizeof(bits) == sizeof(v));
            __builtin_memcpy(&bits, &v, sizeof(bits));
            for (int b = 0; b < 4; ++b) {
                h ^= (bits >> (8 * b)) & 0xffu;
                h *= 1099511628211ull;
            }
        }
    };
    for (const Layer& l : net.layers) {
        mix(l.weights);
        mix(l.bias);
    }
    return h;
}

} // namespace uaplab

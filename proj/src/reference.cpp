#include "uaplab/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uaplab::refnet {

namespace {

struct Volume {
    FeatShape shape;
    std::vector<double> v;

    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return v[(c * shape.h + y) * shape.w + x];
    }
    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return v[(c * shape.h + y) * shape.w + x];
    }
};

Volume apply_layer(const Layer& l, const Volume& in, FeatShape out_shape) {
    Volume out{out_shape, std::vector<double>(out_shape.count(), 0.0)};
    switch (l.kind) {
        case LayerKind::Conv2d: {
            std::size_t oc = l.extents[0], ic = l.extents[1];
            std::size_t kh = l.extents[2], kw = l.extents[3];
            for (std::size_t o = 0; o < oc; ++o)
                for (std::size_t y = 0; y < out_shape.h; ++y)
                    for (std::size_t x = 0; x < out_shape.w; ++x) {
                        double acc = l.bias[o];
                        for (std::size_t ci = 0; ci < ic; ++ci)
                            for (std::size_t ky = 0; ky < kh; ++ky)
                                for (std::size_t kx = 0; kx < kw; ++kx)
                                    acc += static_cast<double>(
                                               l.weights[((o * ic + ci) * kh + ky) * kw + kx]) *
                                           in.at(ci, y + ky, x + kx);
                        out.at(o, y, x) = acc;
                    }
            break;
        }
        case LayerKind::Relu:
            for (std::size_t p = 0; p < in.v.size(); ++p)
                out.v[p] = in.v[p] > 0.0 ? in.v[p] : 0.0;
            break;
        case LayerKind::MaxPool2x2:
            for (std::size_t c = 0; c < out_shape.c; ++c)
                for (std::size_t y = 0; y < out_shape.h; ++y)
                    for (std::size_t x = 0; x < out_shape.w; ++x)
                        out.at(c, y, x) = std::max(
                            std::max(in.at(c, 2 * y, 2 * x), in.at(c, 2 * y, 2 * x + 1)),
                            std::max(in.at(c, 2 * y + 1, 2 * x), in.at(c, 2 * y + 1, 2 * x + 1)));
            break;
        case LayerKind::Flatten:
            out.v = in.v;
            break;
        case LayerKind::Dense: {
            std::size_t out_n = l.extents[0], in_n = l.extents[1];
            for (std::size_t o = 0; o < out_n; ++o) {
                double acc = l.bias[o];
                for (std::size_t j = 0; j < in_n; ++j)
                    acc += static_cast<double>(l.weights[o * in_n + j]) * in.v[j];
                out.v[o] = acc;
            }
            break;
        }
        case LayerKind::Input:
            break;
    }
    return out;
}

std::vector<Volume> forward_all(const Classifier& net, std::span<const double> image) {
    if (image.size() != net.input_size())
        throw std::invalid_argument("refnet: image size mismatch");
    std::vector<Volume> acts;
    acts.reserve(net.layers.size());
    acts.push_back({net.input_shape(), std::vector<double>(image.begin(), image.end())});
    for (std::size_t i = 1; i < net.layers.size(); ++i)
        acts.push_back(apply_layer(net.layers[i], acts[i - 1], net.shapes[i]));
    return acts;
}

} // namespace

std::vector<double> forward_logits(const Classifier& net, std::span<const double> image) {
    return forward_all(net, image).back().v;
}

std::vector<double> forward_logits(const Classifier& net, std::span<const float> image) {
    std::vector<double> d(image.begin(), image.end());
    return forward_logits(net, d);
}

double loss_value(const Classifier& net, std::span<const double> image,
                  const LossKind& loss) {
    auto logits = forward_logits(net, image);
    return eval_loss<double>(loss, logits).value;
}

std::vector<double> input_gradient(const Classifier& net, std::span<const double> image,
                                   const LossKind& loss) {
    auto acts = forward_all(net, image);
    LossEval<double> le = eval_loss<double>(loss, std::span<const double>(acts.back().v));

    std::vector<double> grad = le.grad;
    for (std::size_t i = net.layers.size() - 1; i >= 1; --i) {
        const Layer& l = net.layers[i];
        const Volume& in = acts[i - 1];
        const FeatShape os = net.shapes[i];
        std::vector<double> dx(in.v.size(), 0.0);
        switch (l.kind) {
            case LayerKind::Conv2d: {
                std::size_t oc = l.extents[0], ic = l.extents[1];
                std::size_t kh = l.extents[2], kw = l.extents[3];
                for (std::size_t o = 0; o < oc; ++o)
                    for (std::size_t y = 0; y < os.h; ++y)
                        for (std::size_t x = 0; x < os.w; ++x) {
                            double g = grad[(o * os.h + y) * os.w + x];
                            for (std::size_t ci = 0; ci < ic; ++ci)
                                for (std::size_t ky = 0; ky < kh; ++ky)
                                    for (std::size_t kx = 0; kx < kw; ++kx)
                                        dx[(ci * in.shape.h + y + ky) * in.shape.w + x + kx] +=
                                            g * static_cast<double>(
                                                    l.weights[((o * ic + ci) * kh + ky) * kw +
                                                              kx]);
                        }
                break;
            }
            case LayerKind::Relu:
                for (std::size_t p = 0; p < dx.size(); ++p)
                    dx[p] = in.v[p] > 0.0 ? grad[p] : 0.0;
                break;
            case LayerKind::MaxPool2x2:
                for (std::size_t c = 0; c < os.c; ++c)
                    for (std::size_t y = 0; y < os.h; ++y)
                        for (std::size_t x = 0; x < os.w; ++x) {
                            // first max in scan order, matching the forward rule
                            std::size_t best_y = 2 * y, best_x = 2 * x;
                            double bv = in.at(c, best_y, best_x);
                            const std::size_t cy[4] = {2 * y, 2 * y, 2 * y + 1, 2 * y + 1};
                            const std::size_t cx[4] = {2 * x, 2 * x + 1, 2 * x, 2 * x + 1};
                            for (int q = 1; q < 4; ++q) {
                                if (in.at(c, cy[q], cx[q]) > bv) {
                                    bv = in.at(c, cy[q], cx[q]);
                                    best_y = cy[q];
                                    best_x = cx[q];
                                }
                            }
                            dx[(c * in.shape.h + best_y) * in.shape.w + best_x] +=
                                grad[(c * os.h + y) * os.w + x];
                        }
                break;
            case LayerKind::Flatten:
                dx = grad;
                break;
            case LayerKind::Dense: {
                std::size_t out_n = l.extents[0], in_n = l.extents[1];
                for (std::size_t j = 0; j < in_n; ++j) {
                    double acc = 0.0;
                    for (std::size_t o = 0; o < out_n; ++o)
                        acc += grad[o] * static_cast<double>(l.weights[o * in_n + j]);
                    dx[j] = acc;
                }
                break;
            }
            case LayerKind::Input:
                break;
        }
        grad = std::move(dx);
    }
    return grad;
}

double kink_margin(const Classifier& net, std::span<const double> image,
                   const LossKind& loss) {
    auto acts = forward_all(net, image);
    double margin = std::numeric_limits<double>::infinity();

    for (std::size_t i = 1; i < net.layers.size(); ++i) {
        const Layer& l = net.layers[i];
        const Volume& in = acts[i - 1];
        if (l.kind == LayerKind::Relu) {
            for (double v : in.v) margin = std::min(margin, std::abs(v));
        } else if (l.kind == LayerKind::MaxPool2x2) {
            const FeatShape os = net.shapes[i];
            for (std::size_t c = 0; c < os.c; ++c)
                for (std::size_t y = 0; y < os.h; ++y)
                    for (std::size_t x = 0; x < os.w; ++x) {
                        double best = -std::numeric_limits<double>::infinity();
                        double second = best;
                        const double w[4] = {in.at(c, 2 * y, 2 * x), in.at(c, 2 * y, 2 * x + 1),
                                             in.at(c, 2 * y + 1, 2 * x),
                                             in.at(c, 2 * y + 1, 2 * x + 1)};
                        for (double v : w) {
                            if (v > best) {
                                second = best;
                                best = v;
                            } else if (v > second) {
                                second = v;
                            }
                        }
                        margin = std::min(margin, best - second);
                    }
        }
    }

    const std::vector<double>& logits = acts.back().v;
    if (loss.variant == LossVariant::CL1 || loss.variant == LossVariant::CL2 ||
        loss.variant == LossVariant::NT) {
        // gap between the two highest non-target logits (argmax switch) and
        // distance to the clamp boundary
        double best = -std::numeric_limits<double>::infinity(), second = best;
        for (std::size_t i = 0; i < logits.size(); ++i) {
            if (static_cast<int>(i) == loss.cls) continue;
            if (logits[i] > best) {
                second = best;
                best = logits[i];
            } else if (logits[i] > second) {
                second = logits[i];
            }
        }
        if (std::isfinite(second)) margin = std::min(margin, best - second);
        double m = loss.variant == LossVariant::NT ? logits[loss.cls] - best
                                                   : best - logits[loss.cls];
        margin = std::min(margin, std::abs(m + loss.kappa));
    }
    return margin;
}

} // namespace uaplab::refnet

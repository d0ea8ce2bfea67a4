#include "uaplab/attacks.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace uaplab {

using ordered_json = nlohmann::ordered_json;

std::string norm_order_name(NormOrder p) {
    return p == NormOrder::Inf ? "inf" : "2";
}

NormOrder parse_norm_order(const std::string& name) {
    if (name == "inf") return NormOrder::Inf;
    if (name == "2") return NormOrder::L2;
    throw std::invalid_argument("unsupported norm order '" + name + "' (expected inf|2)");
}

std::string projection_name(ProjectionMode m) {
    return m == ProjectionMode::Rescale ? "rescale" : "clip";
}

ProjectionMode parse_projection(const std::string& name) {
    if (name == "rescale") return ProjectionMode::Rescale;
    if (name == "clip") return ProjectionMode::Clip;
    throw std::invalid_argument("unknown projection '" + name + "' (expected rescale|clip)");
}

float norm_value(std::span<const float> v, NormOrder p) {
    if (p == NormOrder::Inf) {
        float m = 0.0f;
        for (float x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
    return static_cast<float>(std::sqrt(acc));
}

Tensor project_norm(const Tensor& v, float epsilon, NormOrder p, ProjectionMode mode) {
    if (!(epsilon > 0)) throw std::invalid_argument("project_norm: epsilon must be > 0");
    Tensor out = v;
    if (mode == ProjectionMode::Clip) {
        if (p != NormOrder::Inf)
            throw std::invalid_argument("project_norm: clip mode requires p = inf");
        for (float& x : out.data)
            x = x < -epsilon ? -epsilon : (x > epsilon ? epsilon : x);
        return out;
    }
    float n = norm_value(v.view(), p);
    if (n == 0.0f) return out; // zero maps to zero
    // (x/n)*eps puts the extremal coordinate exactly on +-eps for p=inf
    for (float& x : out.data) x = (x / n) * epsilon;
    return out;
}

AdamState AdamState::zeros(std::size_t n) {
    AdamState st;
    st.first_moment.assign(n, 0.0f);
    st.second_moment.assign(n, 0.0f);
    return st;
}

std::vector<float> adam_step(AdamState& state, std::span<const float> grad, float lr) {
    if (grad.size() != state.first_moment.size())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    state.step_count += 1;
    const float c1 = 1.0f - std::pow(state.beta1, static_cast<float>(state.step_count));
    const float c2 = 1.0f - std::pow(state.beta2, static_cast<float>(state.step_count));
    std::vector<float> delta(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        float g = grad[i];
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0f - state.beta1) * g;
        state.second_moment[i] =
            state.beta2 * state.second_moment[i] + (1.0f - state.beta2) * g * g;
        float mh = state.first_moment[i] / c1;
        float vh = state.second_moment[i] / c2;
        delta[i] = -lr * mh / (std::sqrt(vh) + state.eps);
    }
    return delta;
}

Perturbation craft_uap(const Classifier& net, const DatasetHandle& proxy,
                       const AttackConfig& cfg, const CraftObserver& observer) {
    if (proxy.count() == 0) throw std::invalid_argument("craft_uap: empty proxy dataset");
    const FeatShape& in = net.input_shape();
    if (proxy.image_size() != in.count() || proxy.images.extent(1) != in.c ||
        proxy.images.extent(2) != in.h || proxy.images.extent(3) != in.w)
        throw std::invalid_argument("craft_uap: proxy image shape " +
                                    shape_string(proxy.images.shape) +
                                    " does not match classifier input");
    if (cfg.loss.variant == LossVariant::NT && !proxy.labels)
        throw std::invalid_argument(
            "craft_uap: the nt loss needs ground-truth labels, so the proxy must be the "
            "original (labeled) training dataset");
    if (!(cfg.epsilon > 0)) throw std::invalid_argument("craft_uap: epsilon must be > 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("craft_uap: batch_size must be >= 1");

    const std::size_t d = in.count();
    Tensor v = Tensor::zeros({in.c, in.h, in.w});
    AdamState adam = AdamState::zeros(d);
    Rng rng(cfg.seed);

    Tensor batch = Tensor::zeros({cfg.batch_size, in.c, in.h, in.w});
    std::vector<int> batch_cls(cfg.batch_size, cfg.loss.cls);

    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
        auto idx = sample_indices(proxy, cfg.batch_size, rng);
        for (std::size_t bi = 0; bi < cfg.batch_size; ++bi) {
            auto src = proxy.image(idx[bi]);
            float* dst = batch.data.data() + bi * d;
            for (std::size_t p = 0; p < d; ++p) {
                float x = src[p] + v.data[p];
                dst[p] = cfg.clamp_input ? clamp01(x) : x;
            }
            if (cfg.loss.variant == LossVariant::NT) batch_cls[bi] = (*proxy.labels)[idx[bi]];
        }

        Tensor grads = input_gradient(net, batch, cfg.loss.variant, cfg.loss.kappa, batch_cls);
        if (cfg.clamp_input) {
            // clamped coordinates contribute no gradient to v
            for (std::size_t bi = 0; bi < cfg.batch_size; ++bi) {
                auto src = proxy.image(idx[bi]);
                float* g = grads.data.data() + bi * d;
                for (std::size_t p = 0; p < d; ++p) {
                    float x = src[p] + v.data[p];
                    if (x < 0.0f || x > 1.0f) g[p] = 0.0f;
                }
            }
        }

        // E[grad] over the batch, fixed sample order
        std::vector<float> mean_grad(d, 0.0f);
        for (std::size_t bi = 0; bi < cfg.batch_size; ++bi) {
            const float* g = grads.data.data() + bi * d;
            for (std::size_t p = 0; p < d; ++p) mean_grad[p] += g[p];
        }
        const float inv_m = 1.0f / static_cast<float>(cfg.batch_size);
        for (std::size_t p = 0; p < d; ++p) mean_grad[p] *= inv_m;

        std::vector<float> delta = adam_step(adam, mean_grad, cfg.learning_rate);
        for (std::size_t p = 0; p < d; ++p) v.data[p] += delta[p];
        v = project_norm(v, cfg.epsilon, cfg.p, cfg.projection);

        if (observer) observer(it, v);
    }

    Perturbation pert;
    pert.v = std::move(v);
    pert.epsilon = cfg.epsilon;
    pert.p = cfg.p;
    if (cfg.loss.variant != LossVariant::NT) pert.target = cfg.loss.cls;
    pert.source_model_id = net.id;
    pert.loss_name = loss_name(cfg.loss.variant);
    pert.seed = cfg.seed;
    return pert;
}

Perturbation craft_pgd(const Classifier& net, const Tensor& image,
                       std::optional<int> target, float epsilon, float step,
                       std::size_t steps, std::uint64_t seed) {
    if (!(epsilon > 0)) throw std::invalid_argument("craft_pgd: epsilon must be > 0");
    const FeatShape& in = net.input_shape();
    if (image.size() != in.count())
        throw std::invalid_argument("craft_pgd: image shape mismatch");
    const std::size_t d = in.count();

    int cls;
    float direction;
    if (target) {
        cls = *target;
        direction = -1.0f; // descend loss toward the target
    } else {
        cls = argmax_lowest(forward_single(net, image.view()));
        direction = 1.0f; // ascend loss on the clean prediction
    }
    LossKind loss{LossVariant::CE, 0.0, cls};

    Tensor v = Tensor::zeros({in.c, in.h, in.w});
    Tensor adv = Tensor::zeros({1, in.c, in.h, in.w});
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t p = 0; p < d; ++p)
            adv.data[p] = clamp01(image.data[p] + v.data[p]);
        Tensor g = input_gradient(net, adv, loss);
        for (std::size_t p = 0; p < d; ++p) {
            float gv = g.data[p];
            float sign = gv > 0.0f ? 1.0f : (gv < 0.0f ? -1.0f : 0.0f);
            float x = v.data[p] + direction * step * sign;
            x = x < -epsilon ? -epsilon : (x > epsilon ? epsilon : x);
            // keep image+v a valid picture
            float px = image.data[p] + x;
            x = clamp01(px) - image.data[p];
            v.data[p] = x;
        }
    }

    Perturbation pert;
    pert.v = std::move(v);
    pert.epsilon = epsilon;
    pert.p = NormOrder::Inf;
    pert.target = target;
    pert.source_model_id = net.id;
    pert.loss_name = target ? "pgd-ce" : "pgd-ce-nt";
    pert.seed = seed;
    return pert;
}

namespace {

std::string sidecar_path(const std::string& path) {
    std::filesystem::path p(path);
    p.replace_extension(".json");
    return p.string();
}

} // namespace

void save_uapb(const Perturbation& pert, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write perturbation file: " + path);
    os.write("UAPB", 4);
    std::uint16_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 2);
    os.put(0); // dtype f32 LE
    os.put(static_cast<char>(pert.v.rank()));
    for (std::size_t e : pert.v.shape) {
        std::uint32_t v32 = static_cast<std::uint32_t>(e);
        os.write(reinterpret_cast<const char*>(&v32), 4);
    }
    os.write(reinterpret_cast<const char*>(pert.v.data.data()),
             static_cast<std::streamsize>(pert.v.size() * 4));
    if (!os) throw std::runtime_error("write failed: " + path);

    ordered_json meta;
    if (pert.target) meta["target"] = *pert.target;
    else meta["target"] = nullptr;
    meta["epsilon"] = pert.epsilon;
    meta["p"] = norm_order_name(pert.p);
    meta["loss"] = pert.loss_name;
    meta["source_model_id"] = pert.source_model_id;
    meta["seed"] = pert.seed;
    std::ofstream ms(sidecar_path(path));
    if (!ms) throw std::runtime_error("cannot write sidecar: " + sidecar_path(path));
    ms << meta.dump(2) << "\n";
}

Perturbation load_uapb(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open perturbation file: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "UAPB", 4) != 0)
        throw std::runtime_error("bad magic, not a UAPB file: " + path);
    std::uint16_t version;
    if (!is.read(reinterpret_cast<char*>(&version), 2) || version != 1)
        throw std::runtime_error("unsupported UAPB version in " + path);
    int dtype = is.get();
    if (dtype != 0) throw std::runtime_error("unsupported UAPB dtype in " + path);
    int ndim = is.get();
    if (ndim < 0) throw std::runtime_error("truncated UAPB file: " + path);

    std::vector<std::size_t> shape(ndim);
    for (int i = 0; i < ndim; ++i) {
        std::uint32_t e;
        if (!is.read(reinterpret_cast<char*>(&e), 4))
            throw std::runtime_error("truncated UAPB file: " + path);
        shape[i] = e;
    }
    std::size_t n = shape_product(shape);
    std::vector<float> data(n);
    if (!is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * 4)))
        throw std::runtime_error("truncated UAPB payload: " + path);

    Perturbation pert;
    pert.v = Tensor(std::move(shape), std::move(data));

    std::ifstream ms(sidecar_path(path));
    if (!ms) throw std::runtime_error("missing UAPB sidecar: " + sidecar_path(path));
    ordered_json meta = ordered_json::parse(ms);
    if (!meta.at("target").is_null()) pert.target = meta.at("target").get<int>();
    pert.epsilon = meta.at("epsilon").get<float>();
    pert.p = parse_norm_order(meta.at("p").get<std::string>());
    pert.loss_name = meta.at("loss").get<std::string>();
    pert.source_model_id = meta.at("source_model_id").get<std::string>();
    pert.seed = meta.at("seed").get<std::uint64_t>();

    float n_val = norm_value(pert.v.view(), pert.p);
    if (n_val > pert.epsilon + 1e-6f)
        throw std::runtime_error("perturbation in " + path + " violates its norm budget: ||v|| = " +
                                 std::to_string(n_val) + " > " + std::to_string(pert.epsilon));
    return pert;
}

} // namespace uaplab

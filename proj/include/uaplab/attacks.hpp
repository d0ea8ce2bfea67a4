#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "uaplab/data.hpp"
#include "uaplab/losses.hpp"
#include "uaplab/net.hpp"
#include "uaplab/tensor.hpp"

namespace uaplab {

enum class NormOrder { Inf, L2 };
enum class ProjectionMode { Rescale, Clip };

std::string norm_order_name(NormOrder p);
NormOrder parse_norm_order(const std::string& name);
std::string projection_name(ProjectionMode m);
ProjectionMode parse_projection(const std::string& name);

struct AttackConfig {
    float epsilon = 10.0f / 255.0f;
    NormOrder p = NormOrder::Inf;
    std::size_t iterations = 1000;
    std::size_t batch_size = 32;
    float learning_rate = 0.005f;
    LossKind loss{LossVariant::CL2, 0.0, 0};
    ProjectionMode projection = ProjectionMode::Rescale;
    std::uint64_t seed = 0;
    bool clamp_input = false; // clamp x+v to [0,1] while crafting
};

// A crafted perturbation plus the provenance needed to reuse it.
struct Perturbation {
    Tensor v; // [C,H,W]
    float epsilon = 0.0f;
    NormOrder p = NormOrder::Inf;
    std::optional<int> target; // absent for non-targeted
    std::string source_model_id;
    std::string loss_name;
    std::uint64_t seed = 0;
};

float norm_value(std::span<const float> v, NormOrder p);

// Algorithm's norm projection. Rescale maps any nonzero v onto the
// epsilon sphere (v <- eps * v/||v||_p); clip clamps coordinates to
// [-eps, eps] (p = inf only). Zero stays zero in both modes.
Tensor project_norm(const Tensor& v, float epsilon, NormOrder p, ProjectionMode mode);

struct AdamState {
    std::vector<float> first_moment;
    std::vector<float> second_moment;
    std::size_t step_count = 0;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;

    static AdamState zeros(std::size_t n);
};

// One bias-corrected ADAM step; returns the additive update for v.
std::vector<float> adam_step(AdamState& state, std::span<const float> grad, float lr);

// Callback invoked after each crafting iteration with the projected v.
using CraftObserver = std::function<void(std::size_t iteration, const Tensor& v)>;

// Universal perturbation crafting: v starts at zero; each iteration
// samples a batch from the proxy, averages the per-sample input
// gradients at x+v, applies ADAM, then projects. Deterministic per seed.
// Targeted losses read cfg.loss.cls as the target class; the NT loss
// requires a labeled proxy and uses per-sample ground truths.
Perturbation craft_uap(const Classifier& net, const DatasetHandle& proxy,
                       const AttackConfig& cfg, const CraftObserver& observer = nullptr);

// Image-dependent PGD: signed gradient steps from v = 0, each followed by
// an l-inf clip to [-eps, eps] and a clamp of image+v into [0,1].
// Descends cross-entropy toward `target` when given, otherwise ascends
// it on the clean prediction.
Perturbation craft_pgd(const Classifier& net, const Tensor& image,
                       std::optional<int> target, float epsilon, float step,
                       std::size_t steps, std::uint64_t seed);

// UAPB container: magic "UAPB", version u16 LE, dtype u8 (0 = f32 LE),
// ndim u8, extents u32 each, raw payload; JSON metadata sidecar at
// <stem>.json holding target/epsilon/p/loss/source_model_id/seed.
void save_uapb(const Perturbation& pert, const std::string& path);
Perturbation load_uapb(const std::string& path);

} // namespace uaplab

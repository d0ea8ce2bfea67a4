#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uaplab/losses.hpp"
#include "uaplab/tensor.hpp"

namespace uaplab {

enum class LayerKind : std::uint8_t {
    Input = 0,
    Conv2d = 1,
    Relu = 2,
    MaxPool2x2 = 3,
    Flatten = 4,
    Dense = 5,
};

std::string layer_kind_name(LayerKind kind);

// One layer descriptor. Extents by kind:
//   Input      {C,H,W}            no parameters
//   Conv2d     {outC,inC,kH,kW}   weights outC*inC*kH*kW, bias outC (stride 1, valid)
//   Dense      {out,in}           weights out*in, bias out
//   Relu / MaxPool2x2 / Flatten   none
struct Layer {
    LayerKind kind;
    std::vector<std::size_t> extents;
    std::vector<float> weights;
    std::vector<float> bias;
};

struct FeatShape {
    std::size_t c = 0, h = 0, w = 0;
    std::size_t count() const { return c * h * w; }
};

// Immutable after finalize(); safe to share across threads. Training
// produces one, attacks and analysis only read it.
struct Classifier {
    std::string id;
    int class_count = 0;
    std::vector<Layer> layers; // layers[0] is the Input descriptor

    // Output shape of each layer (index 0 = input shape). Filled by finalize().
    std::vector<FeatShape> shapes;

    // Validates the shape chain, caches per-layer shapes, derives class_count.
    void finalize();

    const FeatShape& input_shape() const { return shapes.front(); }
    std::size_t input_size() const { return shapes.front().count(); }
};

class ClassifierBuilder {
public:
    ClassifierBuilder(std::string id, std::size_t c, std::size_t h, std::size_t w);
    ClassifierBuilder& conv2d(std::size_t out_channels, std::size_t kernel);
    ClassifierBuilder& relu();
    ClassifierBuilder& maxpool2x2();
    ClassifierBuilder& flatten();
    ClassifierBuilder& dense(std::size_t out);
    // He-normal weight init, zero bias, deterministic per seed.
    Classifier build(std::uint64_t seed);

private:
    Classifier net_;
};

// The two stock architectures. "ref-a" is the victim reference CNN,
// "ref-b" the second architecture for transfer studies.
Classifier make_ref_a(int class_count, std::size_t c, std::size_t h, std::size_t w,
                      std::uint64_t seed);
Classifier make_ref_b(int class_count, std::size_t c, std::size_t h, std::size_t w,
                      std::uint64_t seed);
Classifier make_arch(const std::string& name, int class_count, std::size_t c,
                     std::size_t h, std::size_t w, std::uint64_t seed);

// Batch forward: [N,C,H,W] -> pre-softmax logits [N,K]. Parallel across
// samples; bit-identical for any worker count.
Tensor forward(const Classifier& net, const Tensor& batch);
std::vector<float> forward_single(const Classifier& net, std::span<const float> image);

// Argmax with lowest-index tie-break.
int argmax_lowest(std::span<const float> values);
std::vector<int> predict(const Classifier& net, const Tensor& batch);

// d loss / d input, one gradient per sample, same shape as batch.
// The single-class form applies loss.cls to every sample; the span form
// supplies a per-sample class (ground truths for NT crafting).
Tensor input_gradient(const Classifier& net, const Tensor& batch, const LossKind& loss);
Tensor input_gradient(const Classifier& net, const Tensor& batch, LossVariant variant,
                      double kappa, std::span<const int> per_sample_cls);

// Per-layer parameter gradients, shaped like the classifier's layers.
struct ParamGrads {
    std::vector<std::vector<float>> weights;
    std::vector<std::vector<float>> bias;

    static ParamGrads zeros_like(const Classifier& net);
    void accumulate(const ParamGrads& other);
    void scale(float s);
};

// Forward/backward record for one sample. Buffers are reused across
// calls; one tape per thread.
class SampleTape {
public:
    explicit SampleTape(const Classifier& net);

    std::span<const float> run_forward(std::span<const float> image);

    // Backward from d loss/d logits. dinput receives d loss/d input;
    // parameter gradients accumulate into *pg when non-null. Throws on a
    // non-finite gradient, naming the offending layer.
    void run_backward(std::span<const float> dlogits, std::span<float> dinput,
                      ParamGrads* pg);

private:
    const Classifier* net_;
    std::vector<std::vector<float>> act_;
    std::vector<std::vector<float>> grad_;
    std::vector<std::vector<std::int32_t>> pool_src_;
};

// FNV-1a over all parameter bytes; used to assert immutability.
std::uint64_t param_checksum(const Classifier& net);

} // namespace uaplab

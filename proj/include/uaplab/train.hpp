#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uaplab/data.hpp"
#include "uaplab/net.hpp"

namespace uaplab {

enum class Optimizer { SgdMomentum, Adam };

Optimizer parse_optimizer(const std::string& name);
std::string optimizer_name(Optimizer opt);

struct TrainConfig {
    std::size_t epochs = 5;
    std::size_t batch_size = 64;
    float learning_rate = 1e-3f;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::Adam;
};

struct TrainResult {
    Classifier model;
    std::vector<float> step_loss;  // batch-mean cross-entropy per step
    std::vector<float> epoch_loss; // mean step loss per epoch
};

// Cross-entropy training on a labeled dataset. Deterministic given the
// seed: batch order, per-sample gradients and the reduction order are all
// fixed, so identical seeds give bit-identical parameters for any worker
// count. epochs == 0 returns the input parameters untouched.
TrainResult train(Classifier net, const DatasetHandle& data, const TrainConfig& cfg);

// Fraction of correct predictions on a labeled dataset.
double accuracy(const Classifier& net, const DatasetHandle& data);

} // namespace uaplab

#pragma once

#include <span>
#include <vector>

#include "uaplab/losses.hpp"
#include "uaplab/net.hpp"

namespace uaplab::refnet {

// Serial double-precision evaluation of a Classifier. This is the slow,
// obviously-correct path: plain nested loops, no parallelism, no buffer
// reuse. Verification oracles and the benchmark baseline run on it; the
// production float kernels never call into it.

std::vector<double> forward_logits(const Classifier& net, std::span<const double> image);
std::vector<double> forward_logits(const Classifier& net, std::span<const float> image);

double loss_value(const Classifier& net, std::span<const double> image, const LossKind& loss);

// Analytic d loss / d input in double precision.
std::vector<double> input_gradient(const Classifier& net, std::span<const double> image,
                                   const LossKind& loss);

// Smallest |pre-activation| over every ReLU input, smallest top-2 gap over
// every pooling window, and the runner-up/clamp gaps of the loss at the
// output. Finite-difference checks are only trustworthy away from these
// kinks; callers redraw inputs when the margin is below their h.
double kink_margin(const Classifier& net, std::span<const double> image,
                   const LossKind& loss);

} // namespace uaplab::refnet

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uaplab {

enum class LossVariant { CE, L, CL1, CL2, NT };

// Which loss drives an attack or gradient query. `cls` is the target
// class t for CE/L/CL1/CL2 and the ground-truth class for NT.
struct LossKind {
    LossVariant variant = LossVariant::CL2;
    double kappa = 0.0;
    int cls = 0;
};

template <class T>
struct LossEval {
    T value;
    std::vector<T> grad; // d value / d logits, one entry per class
};

namespace detail {

template <class T>
void check_class(std::span<const T> logits, int cls) {
    if (cls < 0 || static_cast<std::size_t>(cls) >= logits.size())
        throw std::invalid_argument("loss: class index " + std::to_string(cls) +
                                    " out of range for " + std::to_string(logits.size()) +
                                    " classes");
}

// Highest logit among i != excluded, ties to the lowest index.
template <class T>
std::size_t argmax_excluding(std::span<const T> logits, int excluded) {
    if (logits.size() < 2)
        throw std::invalid_argument("loss: need at least 2 classes, got " +
                                    std::to_string(logits.size()));
    std::size_t best = excluded == 0 ? 1 : 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (static_cast<int>(i) == excluded) continue;
        if (logits[i] > logits[best]) best = i;
    }
    return best;
}

} // namespace detail

// Cross-entropy toward class t, log-sum-exp stabilized.
template <class T>
LossEval<T> loss_ce(std::span<const T> logits, int t) {
    detail::check_class(logits, t);
    T hi = *std::max_element(logits.begin(), logits.end());
    T sum = 0;
    for (T l : logits) sum += std::exp(l - hi);
    T log_z = hi + std::log(sum);
    LossEval<T> out;
    out.value = log_z - logits[t];
    out.grad.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
        out.grad[i] = std::exp(logits[i] - log_z);
    out.grad[t] -= T(1);
    return out;
}

// Plain negative target logit.
template <class T>
LossEval<T> loss_logit(std::span<const T> logits, int t) {
    detail::check_class(logits, t);
    LossEval<T> out;
    out.value = -logits[t];
    out.grad.assign(logits.size(), T(0));
    out.grad[t] = T(-1);
    return out;
}

// Clamped margin: max(max_{i!=t} l_i - l_t, -kappa). Gradient flows
// through both the runner-up and the target logit.
template <class T>
LossEval<T> loss_cl1(std::span<const T> logits, int t, double kappa) {
    detail::check_class(logits, t);
    std::size_t r = detail::argmax_excluding(logits, t);
    T margin = logits[r] - logits[t];
    LossEval<T> out;
    out.grad.assign(logits.size(), T(0));
    if (margin <= T(-kappa)) {
        out.value = T(-kappa); // clamped branch, zero gradient
    } else {
        out.value = margin;
        out.grad[r] = T(1);
        out.grad[t] = T(-1);
    }
    return out;
}

// Same forward value as CL1, but the runner-up logit is a frozen
// reference: only the target coordinate carries gradient.
template <class T>
LossEval<T> loss_cl2(std::span<const T> logits, int t, double kappa) {
    detail::check_class(logits, t);
    std::size_t r = detail::argmax_excluding(logits, t);
    T margin = logits[r] - logits[t];
    LossEval<T> out;
    out.grad.assign(logits.size(), T(0));
    if (margin <= T(-kappa)) {
        out.value = T(-kappa);
    } else {
        out.value = margin;
        out.grad[t] = T(-1);
    }
    return out;
}

// Non-targeted margin: max(l_gt - max_{i!=gt} l_i, -kappa), gradient
// through both terms.
template <class T>
LossEval<T> loss_nt(std::span<const T> logits, int gt, double kappa) {
    detail::check_class(logits, gt);
    std::size_t r = detail::argmax_excluding(logits, gt);
    T margin = logits[gt] - logits[r];
    LossEval<T> out;
    out.grad.assign(logits.size(), T(0));
    if (margin <= T(-kappa)) {
        out.value = T(-kappa);
    } else {
        out.value = margin;
        out.grad[gt] = T(1);
        out.grad[r] = T(-1);
    }
    return out;
}

template <class T>
LossEval<T> eval_loss(const LossKind& kind, std::span<const T> logits) {
    switch (kind.variant) {
        case LossVariant::CE: return loss_ce(logits, kind.cls);
        case LossVariant::L: return loss_logit(logits, kind.cls);
        case LossVariant::CL1: return loss_cl1(logits, kind.cls, kind.kappa);
        case LossVariant::CL2: return loss_cl2(logits, kind.cls, kind.kappa);
        case LossVariant::NT: return loss_nt(logits, kind.cls, kind.kappa);
    }
    throw std::logic_error("eval_loss: bad variant");
}

inline std::string loss_name(LossVariant v) {
    switch (v) {
        case LossVariant::CE: return "ce";
        case LossVariant::L: return "logit";
        case LossVariant::CL1: return "cl1";
        case LossVariant::CL2: return "cl2";
        case LossVariant::NT: return "nt";
    }
    throw std::logic_error("loss_name: bad variant");
}

inline LossVariant parse_loss_name(const std::string& name) {
    if (name == "ce") return LossVariant::CE;
    if (name == "logit") return LossVariant::L;
    if (name == "cl1") return LossVariant::CL1;
    if (name == "cl2") return LossVariant::CL2;
    if (name == "nt") return LossVariant::NT;
    throw std::invalid_argument("unknown loss '" + name +
                                "' (expected ce|logit|cl1|cl2|nt)");
}

} // namespace uaplab

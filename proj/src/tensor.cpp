#include "uaplab/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace uaplab {

Tensor::Tensor(std::vector<std::size_t> s, std::vector<float> d)
    : shape(std::move(s)), data(std::move(d)) {
    if (shape_product(shape) != data.size()) {
        throw std::invalid_argument("tensor: shape " + shape_string(shape) +
                                    " does not match " + std::to_string(data.size()) +
                                    " values");
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
}

Tensor Tensor::full(std::vector<std::size_t> shape, float value) {
    std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<float>(n, value));
}

std::size_t shape_product(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

std::string shape_string(std::span<const std::size_t> shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

namespace {
template <class T>
void check_finite_impl(std::span<const T> values, const std::string& what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw std::runtime_error("non-finite value in " + what + " at index " +
                                     std::to_string(i));
        }
    }
}
} // namespace

void check_finite(std::span<const float> values, const std::string& what) {
    check_finite_impl(values, what);
}

void check_finite(std::span<const double> values, const std::string& what) {
    check_finite_impl(values, what);
}

} // namespace uaplab

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace uaplab {

// Row-major single-precision array with a shape tag. The invariant
// product(shape) == data.size() is established by the factories and must
// be preserved by anyone mutating the fields directly.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<float> d);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, float value);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t extent(std::size_t axis) const { return shape[axis]; }

    std::span<const float> view() const { return {data.data(), data.size()}; }
    std::span<float> view() { return {data.data(), data.size()}; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

std::size_t shape_product(std::span<const std::size_t> shape);
std::string shape_string(std::span<const std::size_t> shape);

// Throws std::runtime_error naming `what` if any value is NaN or Inf.
void check_finite(std::span<const float> values, const std::string& what);
void check_finite(std::span<const double> values, const std::string& what);

inline float clamp01(float x) { return x < 0.0f ? 0.0f : (x > 1.0f ? 1.0f : x); }

} // namespace uaplab

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uaplab/rng.hpp"
#include "uaplab/tensor.hpp"

namespace uaplab {

// A loaded or generated image set. Pixels always live in [0,1]; labels,
// when present, are class indices parallel to the image axis. Immutable
// after construction.
struct DatasetHandle {
    Tensor images; // [N,C,H,W]
    std::optional<std::vector<int>> labels;
    std::string name;

    std::size_t count() const { return images.extent(0); }
    std::size_t image_size() const {
        return images.extent(1) * images.extent(2) * images.extent(3);
    }
    std::span<const float> image(std::size_t i) const {
        return {images.data.data() + i * image_size(), image_size()};
    }
    // Copy of image i as a [C,H,W] tensor.
    Tensor image_tensor(std::size_t i) const;
};

// IDX readers/writers: big-endian u32 magic (0x00000803 images,
// 0x00000801 labels), big-endian extents, raw u8 payload. Image bytes map
// to pixels via /255.
DatasetHandle load_idx(const std::string& images_path,
                       const std::optional<std::string>& labels_path = std::nullopt);
void save_idx_images(const Tensor& images, const std::string& path);
void save_idx_labels(const std::vector<int>& labels, const std::string& path);

// Conventional dataset directory layout: train-images/train-labels and
// t10k-images/t10k-labels.
DatasetHandle load_idx_dir(const std::string& dir, bool train);

enum class ProxyKind { DatasetPath, Gaussian, White, Uniform };

struct ProxySpec {
    ProxyKind kind = ProxyKind::Gaussian;
    std::string path;    // DatasetPath only (IDX image file or dataset dir)
    double mu = 0.5;
    double sigma = 0.25; // Gaussian only
    std::size_t n = 1;
    std::uint64_t seed = 0;
};

// Accepts "gaussian:mu=0.5,sigma=0.25,n=256", "white:n=16",
// "uniform:n=256" or a plain filesystem path.
ProxySpec parse_proxy_spec(const std::string& text);

// Synthesizes a proxy set of the given [C,H,W] shape (or loads the path).
// Generated pixels are clamped to [0,1]; generated sets carry no labels.
DatasetHandle gen_proxy(const ProxySpec& spec, std::size_t c, std::size_t h, std::size_t w);

// Uniform-with-replacement batch of m images, consuming exactly m draws.
Tensor sample_batch(const DatasetHandle& data, std::size_t m, Rng& rng);
std::vector<std::size_t> sample_indices(const DatasetHandle& data, std::size_t m, Rng& rng);

} // namespace uaplab

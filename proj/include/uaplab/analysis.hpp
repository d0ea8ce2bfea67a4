#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uaplab/data.hpp"
#include "uaplab/net.hpp"
#include "uaplab/tensor.hpp"

namespace uaplab {

// Pearson correlation coefficient, computed in double precision. Inputs
// must have equal length >= 2 and nonzero variance; the result is clamped
// into [-1,1] against rounding overshoot.
double pcc(std::span<const double> x, std::span<const double> y);
double pcc(std::span<const float> x, std::span<const float> y);

// Pairwise logit correlation of two inputs a, b and their sum c = a + b.
struct PccReport {
    double pcc_a_c = 0.0, pcc_b_c = 0.0, pcc_a_b = 0.0;
    int y_a = 0, y_b = 0, y_c = 0;
    std::vector<float> logits_a, logits_b, logits_c;
};

// c = a + b (clamped to [0,1] only when `clamp` is set), then all three
// pairwise PCCs over the logit vectors. Inputs are [C,H,W] tensors of the
// classifier's input shape.
PccReport analyze_pair(const Classifier& net, const Tensor& a, const Tensor& b, bool clamp);

// Scatter export: header "logit_x,logit_y", one row per class index.
void write_scatter_csv(const std::string& path, std::span<const float> lx,
                       std::span<const float> ly);

struct PairStudyReport {
    std::size_t n_pairs = 0;
    std::size_t size_sm = 0, size_sn = 0;
    double sm_pcc_h_mean = 0.0, sm_pcc_h_std = 0.0;
    double sm_pcc_l_mean = 0.0, sm_pcc_l_std = 0.0;
    double sm_gap_mean = 0.0, sm_gap_std = 0.0;
    double sn_pcc_h_mean = 0.0, sn_pcc_h_std = 0.0;
    double sn_pcc_l_mean = 0.0, sn_pcc_l_std = 0.0;
    double sn_gap_mean = 0.0, sn_gap_std = 0.0;
    std::optional<double> p_pcc; // over S_m; absent when S_m is empty
};

// Draws n_pairs disjoint image pairs, forms c = a + b (unclamped),
// splits into S_m (y_c matches y_a or y_b) and S_n, and aggregates the
// higher/lower PCC statistics plus the P_PCC predictability score.
PairStudyReport pair_study(const Classifier& net, const DatasetHandle& data,
                           std::size_t n_pairs, std::uint64_t seed);

struct NoiseSweepEntry {
    double sigma = 0.0;
    double pcc_a_c = 0.0, pcc_b_c = 0.0;
    int y_c = 0;
};

struct NoiseSweepReport {
    std::vector<NoiseSweepEntry> entries; // sigma ascending
};

// Gaussian-noise influence: for each sigma draws b ~ N(0, sigma) of the
// image's shape (b = 0 for sigma = 0) and analyzes the pair.
NoiseSweepReport noise_sweep(const Classifier& net, const Tensor& image,
                             std::vector<double> sigmas, std::uint64_t seed);

struct DominanceRow {
    double pcc_a_c = 0.0, pcc_b_c = 0.0;
    int y_c = 0;
};

struct DominanceReport {
    std::size_t n_images = 0;
    double mean_pcc_a_c = 0.0;
    double mean_pcc_b_c = 0.0;
    double dominance_fraction = 0.0;  // fraction with pcc_b_c > pcc_a_c
    double target_hit_fraction = 0.0; // fraction with y_c == target (when targeted)
    std::optional<int> target;
    std::vector<DominanceRow> rows;
};

// Runs analyze_pair(image, v) over n random images from the dataset.
DominanceReport dominance_study(const Classifier& net, const DatasetHandle& data,
                                const Tensor& v, std::optional<int> target,
                                std::size_t n_images, std::uint64_t seed);

// Image-dependent variant: crafts a fresh PGD perturbation per image and
// analyzes it against its own image.
struct PgdParams {
    std::optional<int> target;  // fixed target class for every image
    bool least_likely = false;  // instead target each image's least-likely class
    float epsilon = 0.1f;
    float step = 0.01f;
    std::size_t steps = 40;
};

DominanceReport dominance_study_pgd(const Classifier& net, const DatasetHandle& data,
                                    const PgdParams& params, std::size_t n_images,
                                    std::uint64_t seed);

} // namespace uaplab

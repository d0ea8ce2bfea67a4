#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uaplab/attacks.hpp"
#include "uaplab/data.hpp"
#include "uaplab/net.hpp"

namespace uaplab {

// Fooling metrics over a full dataset. Ratios are exact integer
// counts over n_samples; accuracies are present only for labeled data.
struct FoolingReport {
    std::optional<double> targeted_ratio; // fraction predicted as target
    double nontargeted_ratio = 0.0;       // fraction whose prediction changed
    std::optional<double> accuracy_clean;
    std::optional<double> accuracy_adv;
    std::size_t n_samples = 0;
    std::optional<int> target;
};

// Evaluates clamp01(x + v) against the clean predictions. Models, data
// and perturbation are never mutated.
FoolingReport fooling_ratios(const Classifier& net, const DatasetHandle& data,
                             const Perturbation& v, std::optional<int> target);

struct TransferMatrix {
    std::vector<std::string> model_ids;           // row = source, column = victim
    std::vector<std::vector<FoolingReport>> cells; // fooling variant
    std::vector<std::vector<double>> pcc;          // PCC variant
};

// cell(i,j) = fooling_ratios(model_j, data, uap_i, target_i); one UAP per
// model, shapes must agree.
TransferMatrix transfer_matrix(const std::vector<Classifier>& models,
                               const std::vector<Perturbation>& uaps,
                               const DatasetHandle& data);

// PCC variant of Table-style transfer: cell(i,j) correlates model_j's
// logits on uap_i alone with model_j's logits on its own uap_j; the
// diagonal is exactly 1.
TransferMatrix uap_pcc_matrix(const std::vector<Classifier>& models,
                              const std::vector<Perturbation>& uaps);

// CSV with a `source\target` header cell and model ids as row/column names.
void write_matrix_csv(const std::string& path, const std::vector<std::string>& model_ids,
                      const std::vector<std::vector<double>>& values);

} // namespace uaplab

#include "uaplab/evaluation.hpp"

#include <fstream>
#include <stdexcept>

#include "uaplab/analysis.hpp"

namespace uaplab {

FoolingReport fooling_ratios(const Classifier& net, const DatasetHandle& data,
                             const Perturbation& v, std::optional<int> target) {
    const FeatShape& in = net.input_shape();
    if (v.v.size() != in.count())
        throw std::invalid_argument("fooling_ratios: perturbation shape " +
                                    shape_string(v.v.shape) + " does not match input");
    if (data.image_size() != in.count())
        throw std::invalid_argument("fooling_ratios: dataset shape mismatch");

    const std::size_t n = data.count();
    const std::size_t d = data.image_size();

    Tensor adv = data.images;
    for (std::size_t i = 0; i < n; ++i) {
        float* dst = adv.data.data() + i * d;
        for (std::size_t p = 0; p < d; ++p) dst[p] = clamp01(dst[p] + v.v.data[p]);
    }

    std::vector<int> clean_pred = predict(net, data.images);
    std::vector<int> adv_pred = predict(net, adv);

    std::size_t flipped = 0, hit_target = 0, clean_as_target = 0;
    std::size_t clean_correct = 0, adv_correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (adv_pred[i] != clean_pred[i]) ++flipped;
        if (target) {
            if (adv_pred[i] == *target) ++hit_target;
            if (clean_pred[i] == *target) ++clean_as_target;
        }
        if (data.labels) {
            if (clean_pred[i] == (*data.labels)[i]) ++clean_correct;
            if (adv_pred[i] == (*data.labels)[i]) ++adv_correct;
        }
    }

    FoolingReport rep;
    rep.n_samples = n;
    rep.target = target;
    rep.nontargeted_ratio = static_cast<double>(flipped) / static_cast<double>(n);
    if (target) {
        rep.targeted_ratio = static_cast<double>(hit_target) / static_cast<double>(n);
        // every target hit either flipped or was already the target
        if (hit_target > flipped + clean_as_target)
            throw std::logic_error("fooling_ratios: targeted count exceeds sanity bound");
    }
    if (data.labels) {
        rep.accuracy_clean = static_cast<double>(clean_correct) / static_cast<double>(n);
        rep.accuracy_adv = static_cast<double>(adv_correct) / static_cast<double>(n);
    }
    return rep;
}

TransferMatrix transfer_matrix(const std::vector<Classifier>& models,
                               const std::vector<Perturbation>& uaps,
                               const DatasetHandle& data) {
    if (models.empty() || models.size() != uaps.size())
        throw std::invalid_argument("transfer_matrix: need one UAP per model");
    for (const Classifier& m : models) {
        if (m.input_size() != models.front().input_size())
            throw std::invalid_argument("transfer_matrix: models disagree on input shape");
    }

    TransferMatrix tm;
    for (const Classifier& m : models) tm.model_ids.push_back(m.id);
    tm.cells.resize(models.size());
    for (std::size_t i = 0; i < uaps.size(); ++i) {
        for (std::size_t j = 0; j < models.size(); ++j)
            tm.cells[i].push_back(fooling_ratios(models[j], data, uaps[i], uaps[i].target));
    }
    return tm;
}

TransferMatrix uap_pcc_matrix(const std::vector<Classifier>& models,
                              const std::vector<Perturbation>& uaps) {
    if (models.empty() || models.size() != uaps.size())
        throw std::invalid_argument("uap_pcc_matrix: need one UAP per model");

    TransferMatrix tm;
    for (const Classifier& m : models) tm.model_ids.push_back(m.id);
    tm.pcc.assign(models.size(), std::vector<double>(models.size(), 0.0));

    // own-UAP logits per victim model, computed once
    std::vector<std::vector<float>> own(models.size());
    for (std::size_t j = 0; j < models.size(); ++j)
        own[j] = forward_single(models[j], uaps[j].v.view());

    for (std::size_t i = 0; i < uaps.size(); ++i) {
        for (std::size_t j = 0; j < models.size(); ++j) {
            std::vector<float> cross = forward_single(models[j], uaps[i].v.view());
            try {
                tm.pcc[i][j] = pcc(std::span<const float>(cross),
                                   std::span<const float>(own[j]));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(std::string(e.what()) + " in cell (" +
                                            tm.model_ids[i] + "," + tm.model_ids[j] + ")");
            }
        }
    }
    return tm;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& model_ids,
                      const std::vector<std::vector<double>>& values) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write matrix file: " + path);
    os << "source\\target";
    for (const std::string& id : model_ids) os << ',' << id;
    os << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) {
        os << model_ids[i];
        for (double v : values[i]) os << ',' << v;
        os << '\n';
    }
}

} // namespace uaplab

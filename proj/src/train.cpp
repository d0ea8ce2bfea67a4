#include "uaplab/train.hpp"

#include <cmath>
#include <stdexcept>

#include "uaplab/threads.hpp"

namespace uaplab {

Optimizer parse_optimizer(const std::string& name) {
    if (name == "sgd-momentum") return Optimizer::SgdMomentum;
    if (name == "adam") return Optimizer::Adam;
    throw std::invalid_argument("unknown optimizer '" + name +
                                "' (expected sgd-momentum|adam)");
}

std::string optimizer_name(Optimizer opt) {
    return opt == Optimizer::SgdMomentum ? "sgd-momentum" : "adam";
}

namespace {

struct OptState {
    // first slot doubles as SGD velocity
    ParamGrads m1, m2;
    std::size_t step = 0;
};

void apply_update(Classifier& net, const ParamGrads& grad, OptState& st,
                  const TrainConfig& cfg) {
    if (cfg.optimizer == Optimizer::SgdMomentum) {
        constexpr float mu = 0.9f;
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            auto upd = [&](std::vector<float>& p, std::vector<float>& vel,
                           const std::vector<float>& g) {
                for (std::size_t j = 0; j < p.size(); ++j) {
                    vel[j] = mu * vel[j] + g[j];
                    p[j] -= cfg.learning_rate * vel[j];
                }
            };
            upd(net.layers[li].weights, st.m1.weights[li], grad.weights[li]);
            upd(net.layers[li].bias, st.m1.bias[li], grad.bias[li]);
        }
    } else {
        constexpr float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
        st.step += 1;
        float c1 = 1.0f - std::pow(b1, static_cast<float>(st.step));
        float c2 = 1.0f - std::pow(b2, static_cast<float>(st.step));
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            auto upd = [&](std::vector<float>& p, std::vector<float>& m1,
                           std::vector<float>& m2, const std::vector<float>& g) {
                for (std::size_t j = 0; j < p.size(); ++j) {
                    m1[j] = b1 * m1[j] + (1.0f - b1) * g[j];
                    m2[j] = b2 * m2[j] + (1.0f - b2) * g[j] * g[j];
                    float mh = m1[j] / c1;
                    float vh = m2[j] / c2;
                    p[j] -= cfg.learning_rate * mh / (std::sqrt(vh) + eps);
                }
            };
            upd(net.layers[li].weights, st.m1.weights[li], st.m2.weights[li],
                grad.weights[li]);
            upd(net.layers[li].bias, st.m1.bias[li], st.m2.bias[li], grad.bias[li]);
        }
    }
}

} // namespace

TrainResult train(Classifier net, const DatasetHandle& data, const TrainConfig& cfg) {
    if (!data.labels)
        throw std::invalid_argument("train: dataset '" + data.name + "' has no labels");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(cfg.learning_rate > 0)) throw std::invalid_argument("train: learning_rate must be > 0");
    const std::vector<int>& labels = *data.labels;
    for (int l : labels) {
        if (l < 0 || l >= net.class_count)
            throw std::invalid_argument("train: label " + std::to_string(l) +
                                        " out of range for " +
                                        std::to_string(net.class_count) + " classes");
    }

    TrainResult result{std::move(net), {}, {}};
    Classifier& model = result.model;
    const std::size_t n = data.count();
    const std::size_t d = data.image_size();

    Rng rng(cfg.seed);
    OptState st;
    st.m1 = ParamGrads::zeros_like(model);
    st.m2 = ParamGrads::zeros_like(model);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    // per-sample gradient buffers, reduced in fixed sample order
    std::vector<ParamGrads> sample_grads(cfg.batch_size);
    std::vector<float> sample_loss(cfg.batch_size);
    for (auto& sg : sample_grads) sg = ParamGrads::zeros_like(model);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the run's rng
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(order[i - 1], order[j]);
        }

        float epoch_sum = 0.0f;
        std::size_t epoch_steps = 0;

        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t m = std::min(cfg.batch_size, n - start);

            std::vector<std::string> errors(m);
            bool failed = false;
#pragma omp parallel num_threads(worker_count())
            {
                SampleTape tape(model);
                std::vector<float> dx(d);
#pragma omp for schedule(static)
                for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(m); ++bi) {
                    try {
                        std::size_t idx = order[start + bi];
                        auto logits = tape.run_forward(data.image(idx));
                        auto le = loss_ce<float>(logits, labels[idx]);
                        sample_loss[bi] = le.value;
                        auto& sg = sample_grads[bi];
                        for (auto& w : sg.weights) std::fill(w.begin(), w.end(), 0.0f);
                        for (auto& b : sg.bias) std::fill(b.begin(), b.end(), 0.0f);
                        tape.run_backward(le.grad, dx, &sg);
                    } catch (const std::exception& e) {
                        errors[bi] = e.what();
#pragma omp atomic write
                        failed = true;
                    }
                }
            }
            if (failed) {
                for (std::size_t bi = 0; bi < m; ++bi)
                    if (!errors[bi].empty()) throw std::runtime_error(errors[bi]);
            }

            ParamGrads batch_grad = ParamGrads::zeros_like(model);
            float loss_sum = 0.0f;
            for (std::size_t bi = 0; bi < m; ++bi) {
                batch_grad.accumulate(sample_grads[bi]);
                loss_sum += sample_loss[bi];
            }
            batch_grad.scale(1.0f / static_cast<float>(m));

            apply_update(model, batch_grad, st, cfg);

            float step_loss = loss_sum / static_cast<float>(m);
            result.step_loss.push_back(step_loss);
            epoch_sum += step_loss;
            ++epoch_steps;
        }
        result.epoch_loss.push_back(epoch_sum / static_cast<float>(epoch_steps));
    }

    return result;
}

double accuracy(const Classifier& net, const DatasetHandle& data) {
    if (!data.labels)
        throw std::invalid_argument("accuracy: dataset '" + data.name + "' has no labels");
    std::vector<int> pred = predict(net, data.images);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == (*data.labels)[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

} // namespace uaplab

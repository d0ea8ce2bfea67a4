#include "uaplab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "uaplab/attacks.hpp"
#include "uaplab/threads.hpp"

namespace uaplab {

double pcc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("pcc: length mismatch (" + std::to_string(x.size()) +
                                    " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 2) throw std::invalid_argument("pcc: need at least 2 entries");
    const std::size_t n = x.size();

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if (vx == 0.0 || vy == 0.0)
        throw std::invalid_argument("pcc: undefined correlation (zero variance input)");

    // identical / negated inputs are exactly +-1 by definition; shortcut
    // past the one-ulp sqrt rounding
    bool same = true, negated = true;
    for (std::size_t i = 0; i < n && (same || negated); ++i) {
        if (x[i] != y[i]) same = false;
        if (x[i] != -y[i]) negated = false;
    }
    if (same) return 1.0;
    if (negated) return -1.0;

    double r = cov / std::sqrt(vx * vy);
    return r > 1.0 ? 1.0 : (r < -1.0 ? -1.0 : r);
}

double pcc(std::span<const float> x, std::span<const float> y) {
    std::vector<double> dx(x.begin(), x.end());
    std::vector<double> dy(y.begin(), y.end());
    return pcc(std::span<const double>(dx), std::span<const double>(dy));
}

namespace {

double pcc_with_context(std::span<const float> x, std::span<const float> y,
                        const std::string& what) {
    try {
        return pcc(x, y);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(e.what()) + " in " + what);
    }
}

} // namespace

PccReport analyze_pair(const Classifier& net, const Tensor& a, const Tensor& b, bool clamp) {
    if (!a.same_shape(b))
        throw std::invalid_argument("analyze_pair: a " + shape_string(a.shape) +
                                    " and b " + shape_string(b.shape) + " differ in shape");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) {
        float s = a.data[i] + b.data[i];
        c.data[i] = clamp ? clamp01(s) : s;
    }

    PccReport rep;
    rep.logits_a = forward_single(net, a.view());
    rep.logits_b = forward_single(net, b.view());
    rep.logits_c = forward_single(net, c.view());
    rep.y_a = argmax_lowest(rep.logits_a);
    rep.y_b = argmax_lowest(rep.logits_b);
    rep.y_c = argmax_lowest(rep.logits_c);
    rep.pcc_a_c = pcc_with_context(rep.logits_a, rep.logits_c, "pcc(L_a, L_c)");
    rep.pcc_b_c = pcc_with_context(rep.logits_b, rep.logits_c, "pcc(L_b, L_c)");
    rep.pcc_a_b = pcc_with_context(rep.logits_a, rep.logits_b, "pcc(L_a, L_b)");
    return rep;
}

void write_scatter_csv(const std::string& path, std::span<const float> lx,
                       std::span<const float> ly) {
    if (lx.size() != ly.size())
        throw std::invalid_argument("scatter export: length mismatch");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write scatter file: " + path);
    os << "logit_x,logit_y\n";
    for (std::size_t i = 0; i < lx.size(); ++i) os << lx[i] << ',' << ly[i] << '\n';
}

namespace {

struct MeanStd {
    double mean = 0.0, std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

} // namespace

PairStudyReport pair_study(const Classifier& net, const DatasetHandle& data,
                           std::size_t n_pairs, std::uint64_t seed) {
    if (data.count() < 2 * n_pairs)
        throw std::invalid_argument("pair_study: need " + std::to_string(2 * n_pairs) +
                                    " distinct images, dataset has " +
                                    std::to_string(data.count()));

    std::vector<std::size_t> order(data.count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);

    struct PairRow {
        double pcc_h, pcc_l;
        bool in_sm;
        bool h_label_matches; // the higher-PCC input predicts y_c
    };
    std::vector<PairRow> rows(n_pairs);
    std::vector<std::string> errors(n_pairs);
    bool failed = false;

#pragma omp parallel for num_threads(worker_count()) schedule(static)
    for (std::int64_t pi = 0; pi < static_cast<std::int64_t>(n_pairs); ++pi) {
        try {
            Tensor a = data.image_tensor(order[2 * pi]);
            Tensor b = data.image_tensor(order[2 * pi + 1]);
            PccReport rep = analyze_pair(net, a, b, false);
            PairRow row{};
            row.pcc_h = std::max(rep.pcc_a_c, rep.pcc_b_c);
            row.pcc_l = std::min(rep.pcc_a_c, rep.pcc_b_c);
            row.in_sm = rep.y_c == rep.y_a || rep.y_c == rep.y_b;
            int y_higher = rep.pcc_a_c >= rep.pcc_b_c ? rep.y_a : rep.y_b;
            row.h_label_matches = y_higher == rep.y_c;
            rows[pi] = row;
        } catch (const std::exception& e) {
            errors[pi] = e.what();
#pragma omp atomic write
            failed = true;
        }
    }
    if (failed) {
        for (std::size_t pi = 0; pi < n_pairs; ++pi)
            if (!errors[pi].empty())
                throw std::runtime_error(std::string(errors[pi]) + " (pair " +
                                         std::to_string(pi) + ")");
    }

    PairStudyReport rep;
    rep.n_pairs = n_pairs;
    std::vector<double> sm_h, sm_l, sm_gap, sn_h, sn_l, sn_gap;
    std::size_t p_hits = 0;
    for (const PairRow& row : rows) {
        if (row.in_sm) {
            sm_h.push_back(row.pcc_h);
            sm_l.push_back(row.pcc_l);
            sm_gap.push_back(row.pcc_h - row.pcc_l);
            if (row.h_label_matches) ++p_hits;
        } else {
            sn_h.push_back(row.pcc_h);
            sn_l.push_back(row.pcc_l);
            sn_gap.push_back(row.pcc_h - row.pcc_l);
        }
    }
    rep.size_sm = sm_h.size();
    rep.size_sn = sn_h.size();
    auto fill = [](const std::vector<double>& xs, double& mean, double& sd) {
        MeanStd ms = mean_std(xs);
        mean = ms.mean;
        sd = ms.std;
    };
    fill(sm_h, rep.sm_pcc_h_mean, rep.sm_pcc_h_std);
    fill(sm_l, rep.sm_pcc_l_mean, rep.sm_pcc_l_std);
    fill(sm_gap, rep.sm_gap_mean, rep.sm_gap_std);
    fill(sn_h, rep.sn_pcc_h_mean, rep.sn_pcc_h_std);
    fill(sn_l, rep.sn_pcc_l_mean, rep.sn_pcc_l_std);
    fill(sn_gap, rep.sn_gap_mean, rep.sn_gap_std);
    if (rep.size_sm > 0)
        rep.p_pcc = static_cast<double>(p_hits) / static_cast<double>(rep.size_sm);
    return rep;
}

NoiseSweepReport noise_sweep(const Classifier& net, const Tensor& image,
                             std::vector<double> sigmas, std::uint64_t seed) {
    for (double s : sigmas)
        if (s < 0.0) throw std::invalid_argument("noise_sweep: negative sigma");
    std::sort(sigmas.begin(), sigmas.end());

    Rng rng(seed);
    NoiseSweepReport rep;
    for (double sigma : sigmas) {
        Tensor b = Tensor::zeros(image.shape);
        if (sigma > 0.0)
            for (float& x : b.data) x = static_cast<float>(rng.normal(0.0, sigma));
        PccReport pr = analyze_pair(net, image, b, false);
        rep.entries.push_back({sigma, pr.pcc_a_c, pr.pcc_b_c, pr.y_c});
    }
    return rep;
}

namespace {

std::vector<std::size_t> draw_distinct(std::size_t total, std::size_t n, Rng& rng) {
    if (n > total)
        throw std::invalid_argument("requested " + std::to_string(n) + " distinct images, have " +
                                    std::to_string(total));
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    for (std::size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    order.resize(n);
    return order;
}

DominanceReport aggregate_dominance(std::vector<DominanceRow> rows,
                                    std::optional<int> target) {
    DominanceReport rep;
    rep.n_images = rows.size();
    rep.target = target;
    std::size_t dom = 0, hit = 0;
    for (const DominanceRow& r : rows) {
        rep.mean_pcc_a_c += r.pcc_a_c;
        rep.mean_pcc_b_c += r.pcc_b_c;
        if (r.pcc_b_c > r.pcc_a_c) ++dom;
        if (target && r.y_c == *target) ++hit;
    }
    if (!rows.empty()) {
        rep.mean_pcc_a_c /= static_cast<double>(rows.size());
        rep.mean_pcc_b_c /= static_cast<double>(rows.size());
        rep.dominance_fraction = static_cast<double>(dom) / static_cast<double>(rows.size());
        rep.target_hit_fraction = static_cast<double>(hit) / static_cast<double>(rows.size());
    }
    rep.rows = std::move(rows);
    return rep;
}

} // namespace

DominanceReport dominance_study(const Classifier& net, const DatasetHandle& data,
                                const Tensor& v, std::optional<int> target,
                                std::size_t n_images, std::uint64_t seed) {
    Rng rng(seed);
    auto picks = draw_distinct(data.count(), n_images, rng);

    std::vector<DominanceRow> rows(n_images);
    std::vector<std::string> errors(n_images);
    bool failed = false;
#pragma omp parallel for num_threads(worker_count()) schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_images); ++i) {
        try {
            PccReport pr = analyze_pair(net, data.image_tensor(picks[i]), v, false);
            rows[i] = {pr.pcc_a_c, pr.pcc_b_c, pr.y_c};
        } catch (const std::exception& e) {
            errors[i] = e.what();
#pragma omp atomic write
            failed = true;
        }
    }
    if (failed) {
        for (std::size_t i = 0; i < n_images; ++i)
            if (!errors[i].empty())
                throw std::runtime_error(std::string(errors[i]) + " (image " +
                                         std::to_string(i) + ")");
    }
    return aggregate_dominance(std::move(rows), target);
}

DominanceReport dominance_study_pgd(const Classifier& net, const DatasetHandle& data,
                                    const PgdParams& params, std::size_t n_images,
                                    std::uint64_t seed) {
    Rng rng(seed);
    auto picks = draw_distinct(data.count(), n_images, rng);

    std::vector<DominanceRow> rows(n_images);
    std::vector<char> hit(n_images, 0);
    std::vector<std::string> errors(n_images);
    bool failed = false;
#pragma omp parallel for num_threads(worker_count()) schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_images); ++i) {
        try {
            Tensor a = data.image_tensor(picks[i]);
            std::optional<int> t = params.target;
            if (params.least_likely) {
                auto logits = forward_single(net, a.view());
                std::size_t worst = 0;
                for (std::size_t k = 1; k < logits.size(); ++k)
                    if (logits[k] < logits[worst]) worst = k;
                t = static_cast<int>(worst);
            }
            Perturbation pert = craft_pgd(net, a, t, params.epsilon, params.step,
                                          params.steps, seed);
            PccReport pr = analyze_pair(net, a, pert.v, false);
            rows[i] = {pr.pcc_a_c, pr.pcc_b_c, pr.y_c};
            hit[i] = t && pr.y_c == *t ? 1 : 0;
        } catch (const std::exception& e) {
            errors[i] = e.what();
#pragma omp atomic write
            failed = true;
        }
    }
    if (failed) {
        for (std::size_t i = 0; i < n_images; ++i)
            if (!errors[i].empty())
                throw std::runtime_error(std::string(errors[i]) + " (image " +
                                         std::to_string(i) + ")");
    }

    DominanceReport rep = aggregate_dominance(std::move(rows), std::nullopt);
    std::size_t hits = 0;
    for (char h : hit) hits += static_cast<std::size_t>(h);
    rep.target_hit_fraction =
        n_images == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n_images);
    rep.target = params.target;
    return rep;
}

} // namespace uaplab

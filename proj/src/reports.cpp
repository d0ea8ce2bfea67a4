#include "uaplab/reports.hpp"

#include <fstream>
#include <stdexcept>

namespace uaplab {

ordered_json to_json(const PccReport& rep) {
    ordered_json j;
    j["pcc_a_c"] = rep.pcc_a_c;
    j["pcc_b_c"] = rep.pcc_b_c;
    j["pcc_a_b"] = rep.pcc_a_b;
    j["y_a"] = rep.y_a;
    j["y_b"] = rep.y_b;
    j["y_c"] = rep.y_c;
    j["logits_a"] = rep.logits_a;
    j["logits_b"] = rep.logits_b;
    j["logits_c"] = rep.logits_c;
    return j;
}

PccReport pcc_report_from_json(const ordered_json& j) {
    PccReport rep;
    rep.pcc_a_c = j.at("pcc_a_c").get<double>();
    rep.pcc_b_c = j.at("pcc_b_c").get<double>();
    rep.pcc_a_b = j.at("pcc_a_b").get<double>();
    rep.y_a = j.at("y_a").get<int>();
    rep.y_b = j.at("y_b").get<int>();
    rep.y_c = j.at("y_c").get<int>();
    rep.logits_a = j.at("logits_a").get<std::vector<float>>();
    rep.logits_b = j.at("logits_b").get<std::vector<float>>();
    rep.logits_c = j.at("logits_c").get<std::vector<float>>();
    return rep;
}

ordered_json to_json(const PairStudyReport& rep) {
    ordered_json j;
    j["n_pairs"] = rep.n_pairs;
    j["size_sm"] = rep.size_sm;
    j["size_sn"] = rep.size_sn;
    j["sm"] = {{"pcc_h_mean", rep.sm_pcc_h_mean}, {"pcc_h_std", rep.sm_pcc_h_std},
               {"pcc_l_mean", rep.sm_pcc_l_mean}, {"pcc_l_std", rep.sm_pcc_l_std},
               {"gap_mean", rep.sm_gap_mean},     {"gap_std", rep.sm_gap_std}};
    j["sn"] = {{"pcc_h_mean", rep.sn_pcc_h_mean}, {"pcc_h_std", rep.sn_pcc_h_std},
               {"pcc_l_mean", rep.sn_pcc_l_mean}, {"pcc_l_std", rep.sn_pcc_l_std},
               {"gap_mean", rep.sn_gap_mean},     {"gap_std", rep.sn_gap_std}};
    if (rep.p_pcc) j["p_pcc"] = *rep.p_pcc;
    else j["p_pcc"] = nullptr;
    return j;
}

PairStudyReport pair_study_from_json(const ordered_json& j) {
    PairStudyReport rep;
    rep.n_pairs = j.at("n_pairs").get<std::size_t>();
    rep.size_sm = j.at("size_sm").get<std::size_t>();
    rep.size_sn = j.at("size_sn").get<std::size_t>();
    const auto& sm = j.at("sm");
    rep.sm_pcc_h_mean = sm.at("pcc_h_mean").get<double>();
    rep.sm_pcc_h_std = sm.at("pcc_h_std").get<double>();
    rep.sm_pcc_l_mean = sm.at("pcc_l_mean").get<double>();
    rep.sm_pcc_l_std = sm.at("pcc_l_std").get<double>();
    rep.sm_gap_mean = sm.at("gap_mean").get<double>();
    rep.sm_gap_std = sm.at("gap_std").get<double>();
    const auto& sn = j.at("sn");
    rep.sn_pcc_h_mean = sn.at("pcc_h_mean").get<double>();
    rep.sn_pcc_h_std = sn.at("pcc_h_std").get<double>();
    rep.sn_pcc_l_mean = sn.at("pcc_l_mean").get<double>();
    rep.sn_pcc_l_std = sn.at("pcc_l_std").get<double>();
    rep.sn_gap_mean = sn.at("gap_mean").get<double>();
    rep.sn_gap_std = sn.at("gap_std").get<double>();
    if (!j.at("p_pcc").is_null()) rep.p_pcc = j.at("p_pcc").get<double>();
    return rep;
}

ordered_json to_json(const NoiseSweepReport& rep) {
    ordered_json j;
    j["entries"] = ordered_json::array();
    for (const NoiseSweepEntry& e : rep.entries) {
        ordered_json je;
        je["sigma"] = e.sigma;
        je["pcc_a_c"] = e.pcc_a_c;
        je["pcc_b_c"] = e.pcc_b_c;
        je["y_c"] = e.y_c;
        j["entries"].push_back(je);
    }
    return j;
}

ordered_json to_json(const DominanceReport& rep, bool include_rows) {
    ordered_json j;
    j["n_images"] = rep.n_images;
    j["mean_pcc_a_c"] = rep.mean_pcc_a_c;
    j["mean_pcc_b_c"] = rep.mean_pcc_b_c;
    j["dominance_fraction"] = rep.dominance_fraction;
    j["target_hit_fraction"] = rep.target_hit_fraction;
    if (rep.target) j["target"] = *rep.target;
    else j["target"] = nullptr;
    if (include_rows) {
        j["rows"] = ordered_json::array();
        for (const DominanceRow& r : rep.rows) {
            ordered_json jr;
            jr["pcc_a_c"] = r.pcc_a_c;
            jr["pcc_b_c"] = r.pcc_b_c;
            jr["y_c"] = r.y_c;
            j["rows"].push_back(jr);
        }
    }
    return j;
}

ordered_json to_json(const FoolingReport& rep) {
    ordered_json j;
    if (rep.targeted_ratio) j["targeted_ratio"] = *rep.targeted_ratio;
    else j["targeted_ratio"] = nullptr;
    j["nontargeted_ratio"] = rep.nontargeted_ratio;
    if (rep.accuracy_clean) j["accuracy_clean"] = *rep.accuracy_clean;
    else j["accuracy_clean"] = nullptr;
    if (rep.accuracy_adv) j["accuracy_adv"] = *rep.accuracy_adv;
    else j["accuracy_adv"] = nullptr;
    j["n_samples"] = rep.n_samples;
    if (rep.target) j["target"] = *rep.target;
    else j["target"] = nullptr;
    return j;
}

FoolingReport fooling_report_from_json(const ordered_json& j) {
    FoolingReport rep;
    if (!j.at("targeted_ratio").is_null())
        rep.targeted_ratio = j.at("targeted_ratio").get<double>();
    rep.nontargeted_ratio = j.at("nontargeted_ratio").get<double>();
    if (!j.at("accuracy_clean").is_null())
        rep.accuracy_clean = j.at("accuracy_clean").get<double>();
    if (!j.at("accuracy_adv").is_null())
        rep.accuracy_adv = j.at("accuracy_adv").get<double>();
    rep.n_samples = j.at("n_samples").get<std::size_t>();
    if (!j.at("target").is_null()) rep.target = j.at("target").get<int>();
    return rep;
}

void write_json(const ordered_json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write report file: " + path);
    os << j.dump(2) << "\n";
}

ordered_json read_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open report file: " + path);
    return ordered_json::parse(is);
}

} // namespace uaplab

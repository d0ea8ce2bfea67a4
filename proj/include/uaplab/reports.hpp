#pragma once

#include <nlohmann/json.hpp>

#include "uaplab/analysis.hpp"
#include "uaplab/evaluation.hpp"

namespace uaplab {

// JSON views of the report structs, insertion-ordered so reruns are
// byte-identical. The from_* readers invert them losslessly.
using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const PccReport& rep);
PccReport pcc_report_from_json(const ordered_json& j);

ordered_json to_json(const PairStudyReport& rep);
PairStudyReport pair_study_from_json(const ordered_json& j);

ordered_json to_json(const NoiseSweepReport& rep);

ordered_json to_json(const DominanceReport& rep, bool include_rows = true);

ordered_json to_json(const FoolingReport& rep);
FoolingReport fooling_report_from_json(const ordered_json& j);

void write_json(const ordered_json& j, const std::string& path);
ordered_json read_json(const std::string& path);

} // namespace uaplab

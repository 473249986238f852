// JSON views of protocol results. Non-finite numbers become the strings
// "inf", "-inf" and "nan", which plain JSON cannot carry.
#pragma once

#include "erasure/protocols.hpp"

#include <json.hpp>

namespace erasure {

nlohmann::json json_number(double x);
nlohmann::json to_json(const DensityMatrix& state);
nlohmann::json to_json(const ProtocolTranscript& t);
nlohmann::json to_json(const BlockProtocolPlan& plan);
nlohmann::json to_json(const ConvexSplitCheck& check);
nlohmann::json to_json(const RateReport& report);

}  // namespace erasure

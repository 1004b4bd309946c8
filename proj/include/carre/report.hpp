#pragma once

#include <json.hpp>

#include <ostream>
#include <string>

#include "carre/triple.hpp"
#include "carre/verify.hpp"

namespace carre {

// JSON report objects, schema "carre-report/1".  ordered_json with a fixed
// insertion order keeps byte-identical output across runs and thread counts.
using Json = nlohmann::ordered_json;

Json json_vector(const Vector& v);
Json geometry_json(const MarkovTriple& T);

Json to_json(const IdentityReport& report);
Json to_json(const ResidualReport& report);
Json to_json(const SpectrumReport& report);
Json to_json(const InequalityReport& report);
Json to_json(const RigidityReport& report);

/// CSV rows "x1,..,xn,<columns...>,check".
void write_csv(std::ostream& os, const PointTable& table,
               const std::string& check_name);

}  // namespace carre

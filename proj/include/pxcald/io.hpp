#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "pxcald/profiles.hpp"
#include "pxcald/recon.hpp"

namespace pxcald {

struct ProfilePair {
    Interval interval;
    ExponentProfile p;
    std::optional<ConductivityProfile> gamma;  // absent for measured-data runs
};

/// {"interval":[a,b], "p":{"breaks":[...],"values":[...]}, "gamma":{...}}.
/// Errors are ValidationError with a JSON-pointer path, e.g. "/p/values/2".
/// base_path prefixes every reported path.
ProfilePair profiles_from_json(const nlohmann::json& doc, bool require_gamma = true,
                               const std::string& base_path = "");

nlohmann::json to_json(const MomentVector& mu);
nlohmann::json to_json(const ProjectedFunction& fn);
nlohmann::json to_json(const ExtremalEstimate& est);
nlohmann::json to_json(const ReconstructionReport& report);

const char* to_string(DerivativeSource mode) noexcept;
const char* to_string(ExtremalSide side) noexcept;

}  // namespace pxcald

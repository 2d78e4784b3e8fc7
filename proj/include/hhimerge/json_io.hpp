#pragma once

// JSON forms of the library's value types. Objects keep insertion order and
// doubles are written in shortest round-trip form.

#include "hhimerge/calibration.hpp"
#include "hhimerge/equilibrium.hpp"
#include "hhimerge/first_order.hpp"
#include "hhimerge/montecarlo.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace hhimerge::io {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
// Writes to `path`, or stdout when it is empty.
void emit(const std::optional<std::filesystem::path>& path, const Json& doc);

// {"demand","price_response","scale","h0","products":[{"id","firm","v","c"}]}
Json to_json(const Market& market);
Market market_from_json(const Json& doc);

// {"demand","price_response","scale","h0","v0","firm_types":{firm: T}}
Json to_json(const FirmModel& model);
FirmModel firm_model_from_json(const Json& doc);

// {"demand","price_response","scale","h0","v0","h","outside_share",
//  "margin_firm","margin","firms":[{"id","share","mu","type","implied_cost"}]}
Json to_json(const CalibratedModel& cal);
CalibratedModel calibrated_model_from_json(const Json& doc);

// {"demand","shares":{firm: share},"outside","margin_firm","margin"[,"scale"]}
struct ParsedCalibrationInput {
    DemandKind kind = DemandKind::MNL;
    CalibrationInput input;
};
ParsedCalibrationInput calibration_input_from_json(const Json& doc, std::optional<DemandKind> kind_override = {});

Json to_json(const Equilibrium& eq);
Json to_json(const ApproxReport& report);
Json to_json(const mc::McSummary& summary);

// Optional product-level shares: [{"id","firm","share"}].
ProductShareVector product_shares_from_json(const Json& doc);

// Which of the three model documents `doc` is.
enum class ModelDocument { Market, FirmModel, Calibrated };
ModelDocument classify_model(const Json& doc);

}  // namespace hhimerge::io

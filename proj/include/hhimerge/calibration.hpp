#pragma once

// Recovers the price-responsiveness parameter, firm types and markups from
// pre-merger firm shares plus one firm's relative margin, with all pre-merger
// prices normalized to one.

#include "hhimerge/demand.hpp"
#include "hhimerge/equilibrium.hpp"

#include <optional>
#include <vector>

namespace hhimerge {

struct CalibrationInput {
    // Quantity shares for MNL, revenue shares for CES.
    ShareVector firm_shares;
    FirmId margin_firm;
    // Relative margin (p - c)/p of `margin_firm`; equals the absolute margin at p = 1.
    double margin = 0.5;
    // Only unit pre-merger prices are supported.
    bool prices_normalized = true;
    // N (MNL) or Y (CES). Unset means choose it so that V0 = 1.
    std::optional<double> scale;

    void validate() const;
};

struct FirmCalibration {
    FirmId firm;
    double share = 0.0;
    double mu = 1.0;
    double type = 0.0;
    // Marginal cost implied at unit price. May be negative under MNL when a
    // firm's markup exceeds one price unit.
    double implied_cost = 0.0;
};

struct CalibratedModel {
    FirmModel model;
    std::vector<FirmCalibration> firms;
    double h = 1.0;
    double outside_share = 1.0;
    FirmId margin_firm;
    double margin = 0.5;

    const FirmCalibration& firm(const FirmId& id) const;
    ShareVector shares() const;
};

CalibratedModel calibrate_mnl(const CalibrationInput& input);
CalibratedModel calibrate_ces(const CalibrationInput& input);
CalibratedModel calibrate(DemandKind kind, const CalibrationInput& input);

struct FirmMargin {
    FirmId firm;
    double margin = 0.0;
};

// Pre-merger margins and shares in the form the first-order formulas use.
struct UppInputs {
    ShareVector shares;
    std::vector<FirmMargin> margins;
    DemandParams params;
};

UppInputs implied_upp_inputs(const CalibratedModel& cal);

}  // namespace hhimerge

#include "hhimerge/calibration.hpp"

#include "hhimerge/errors.hpp"

#include <cmath>

namespace hhimerge {

void CalibrationInput::validate() const {
    if (!(margin > 0.0 && margin < 1.0)) throw ValidationError("margin must lie in (0, 1)");
    if (!prices_normalized) throw ValidationError("calibration requires unit pre-merger prices");
    if (!firm_shares.contains(margin_firm))
        throw ValidationError("margin firm '" + margin_firm + "' has no share");
    if (!(firm_shares.outside() > 0.0)) throw ValidationError("outside share must be positive");
    if (scale && !(*scale > 0.0)) throw ValidationError("scale must be positive");
}

const FirmCalibration& CalibratedModel::firm(const FirmId& id) const {
    for (const auto& f : firms)
        if (f.firm == id) return f;
    throw ValidationError("unknown firm '" + id + "'");
}

ShareVector CalibratedModel::shares() const {
    std::vector<FirmShare> out;
    out.reserve(firms.size());
    for (const auto& f : firms) out.push_back({f.firm, f.share});
    return ShareVector(std::move(out), outside_share, basis_for(model.params.kind));
}

namespace {

CalibratedModel start(const CalibrationInput& input, ShareBasis expected) {
    input.validate();
    if (input.firm_shares.basis() != expected)
        throw ValidationError(expected == ShareBasis::Quantity
                                  ? "MNL calibration needs quantity shares"
                                  : "CES calibration needs revenue shares");
    const double inside = input.firm_shares.inside_total();
    if (!(inside < 1.0)) throw ValidationError("firm shares must sum to less than one");

    CalibratedModel cal;
    cal.h = 1.0 / (1.0 - inside);
    cal.outside_share = input.firm_shares.outside();
    cal.margin_firm = input.margin_firm;
    cal.margin = input.margin;
    cal.model.h0 = 1.0;
    return cal;
}

}  // namespace

CalibratedModel calibrate_mnl(const CalibrationInput& input) {
    CalibratedModel cal = start(input, ShareBasis::Quantity);
    for (const auto& f : input.firm_shares.firms()) {
        FirmCalibration fc;
        fc.firm = f.firm;
        fc.share = f.share;
        fc.mu = 1.0 / (1.0 - f.share);
        fc.type = cal.h * f.share * std::exp(fc.mu);
        cal.firms.push_back(fc);
    }
    // alpha = mu_1 / (p_1 - c_1), and p_1 - c_1 = m_1 at unit price.
    const double alpha = cal.firm(input.margin_firm).mu / input.margin;
    for (auto& fc : cal.firms) fc.implied_cost = 1.0 - fc.mu / alpha;

    cal.model.params = {DemandKind::MNL, alpha, input.scale.value_or(alpha)};
    for (const auto& fc : cal.firms) cal.model.firm_types.push_back({fc.firm, fc.type});
    return cal;
}

CalibratedModel calibrate_ces(const CalibrationInput& input) {
    CalibratedModel cal = start(input, ShareBasis::Revenue);
    const double s1 = input.firm_shares.share(input.margin_firm);
    const double sigma = (1.0 / input.margin - 1.0) / (1.0 - s1) + 1.0;
    if (!(sigma > 1.0) || !std::isfinite(sigma))
        throw DomainError("calibrated sigma is not above one");
    const double slope = (sigma - 1.0) / sigma;
    for (const auto& f : input.firm_shares.firms()) {
        FirmCalibration fc;
        fc.firm = f.firm;
        fc.share = f.share;
        fc.mu = 1.0 / (1.0 - slope * f.share);
        // T = s * H * (1 - mu/sigma)^(1 - sigma)
        fc.type = f.share * cal.h * std::exp((1.0 - sigma) * std::log1p(-fc.mu / sigma));
        fc.implied_cost = 1.0 - fc.mu / sigma;
        cal.firms.push_back(fc);
    }
    cal.model.params = {DemandKind::CES, sigma, input.scale.value_or(sigma - 1.0)};
    for (const auto& fc : cal.firms) cal.model.firm_types.push_back({fc.firm, fc.type});
    return cal;
}

CalibratedModel calibrate(DemandKind kind, const CalibrationInput& input) {
    return kind == DemandKind::MNL ? calibrate_mnl(input) : calibrate_ces(input);
}

UppInputs implied_upp_inputs(const CalibratedModel& cal) {
    UppInputs out;
    out.shares = cal.shares();
    out.params = cal.model.params;
    for (const auto& fc : cal.firms)
        out.margins.push_back({fc.firm, equilibrium_margin(fc.share, cal.model.params)});
    return out;
}

}  // namespace hhimerge

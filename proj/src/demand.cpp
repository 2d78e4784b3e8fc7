#include "hhimerge/demand.hpp"

#include "hhimerge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hhimerge {

std::string_view to_string(DemandKind kind) {
    return kind == DemandKind::MNL ? "mnl" : "ces";
}

DemandKind parse_demand_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "mnl" || lower == "logit") return DemandKind::MNL;
    if (lower == "ces") return DemandKind::CES;
    throw ValidationError("unknown demand kind '" + std::string(text) + "' (expected mnl or ces)");
}

void DemandParams::validate() const {
    if (!(price_response > 0.0) || !std::isfinite(price_response))
        throw ValidationError("price_response must be positive and finite");
    if (kind == DemandKind::CES && !(price_response > 1.0))
        throw ValidationError("CES requires sigma > 1");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ValidationError("scale must be positive and finite");
}

double DemandParams::share_pole() const {
    if (kind == DemandKind::MNL) return 1.0;
    return price_response / (price_response - 1.0);
}

double DemandParams::markup_slope() const {
    if (kind == DemandKind::MNL) return 1.0;
    return (price_response - 1.0) / price_response;
}

ShareBasis basis_for(DemandKind kind) {
    return kind == DemandKind::MNL ? ShareBasis::Quantity : ShareBasis::Revenue;
}

namespace {

void check_unit_interval(double s, const std::string& what) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError(what + " must lie in [0, 1]");
}

}  // namespace

ShareVector::ShareVector(std::vector<FirmShare> firms, double outside, ShareBasis basis)
    : firms_(std::move(firms)), outside_(outside), basis_(basis) {
    check_unit_interval(outside_, "outside share");
    for (std::size_t i = 0; i < firms_.size(); ++i) {
        check_unit_interval(firms_[i].share, "share of firm '" + firms_[i].firm + "'");
        for (std::size_t j = 0; j < i; ++j)
            if (firms_[j].firm == firms_[i].firm)
                throw ValidationError("duplicate firm '" + firms_[i].firm + "'");
    }
    const double total = outside_ + inside_total();
    if (std::abs(total - 1.0) > kAddingUpTolerance)
        throw ValidationError("shares must add up to one including the outside option");
}

ShareVector ShareVector::with_residual_outside(std::vector<FirmShare> firms, ShareBasis basis) {
    double inside = 0.0;
    for (const auto& f : firms) inside += f.share;
    if (inside > 1.0) throw ValidationError("firm shares sum to more than one");
    return ShareVector(std::move(firms), 1.0 - inside, basis);
}

bool ShareVector::contains(const FirmId& firm) const {
    return std::any_of(firms_.begin(), firms_.end(),
                       [&](const FirmShare& f) { return f.firm == firm; });
}

double ShareVector::share(const FirmId& firm) const {
    for (const auto& f : firms_)
        if (f.firm == firm) return f.share;
    throw ValidationError("unknown firm '" + firm + "'");
}

double ShareVector::inside_total() const {
    double total = 0.0;
    for (const auto& f : firms_) total += f.share;
    return total;
}

std::vector<FirmShare> ShareVector::inside_renormalized() const {
    const double inside = 1.0 - outside_;
    if (!(inside > 0.0)) throw DomainError("no inside shares to renormalize");
    std::vector<FirmShare> out = firms_;
    for (auto& f : out) f.share /= inside;
    return out;
}

ProductShareVector::ProductShareVector(std::vector<ProductShare> products)
    : products_(std::move(products)) {
    for (std::size_t i = 0; i < products_.size(); ++i) {
        check_unit_interval(products_[i].share, "share of product '" + products_[i].product + "'");
        for (std::size_t j = 0; j < i; ++j)
            if (products_[j].product == products_[i].product)
                throw ValidationError("duplicate product '" + products_[i].product + "'");
    }
}

ProductShareVector ProductShareVector::single_product(const ShareVector& firms) {
    std::vector<ProductShare> products;
    products.reserve(firms.firms().size());
    for (const auto& f : firms.firms()) products.push_back({f.firm, f.firm, f.share});
    return ProductShareVector(std::move(products));
}

std::vector<double> ProductShareVector::shares_of(const FirmId& firm) const {
    std::vector<double> out;
    for (const auto& p : products_)
        if (p.firm == firm) out.push_back(p.share);
    return out;
}

std::vector<ProductShare> ProductShareVector::products_of(const FirmId& firm) const {
    std::vector<ProductShare> out;
    for (const auto& p : products_)
        if (p.firm == firm) out.push_back(p);
    return out;
}

double ProductShareVector::firm_total(const FirmId& firm) const {
    double total = 0.0;
    for (const auto& p : products_)
        if (p.firm == firm) total += p.share;
    return total;
}

bool ProductShareVector::owns_any(const FirmId& firm) const {
    return std::any_of(products_.begin(), products_.end(),
                       [&](const ProductShare& p) { return p.firm == firm; });
}

void ProductShareVector::check_consistent(const ShareVector& firms) const {
    for (const auto& p : products_)
        if (!firms.contains(p.firm))
            throw ValidationError("product '" + p.product + "' belongs to unknown firm '" + p.firm + "'");
    for (const auto& f : firms.firms()) {
        if (std::abs(firm_total(f.firm) - f.share) > ShareVector::kAddingUpTolerance)
            throw ValidationError("product shares of firm '" + f.firm + "' do not sum to its firm share");
    }
}

std::vector<double> demand(std::span<const double> prices, std::span<const double> qualities,
                           const DemandParams& params, double h0) {
    params.validate();
    if (prices.size() != qualities.size())
        throw ValidationError("prices and qualities differ in length");
    if (h0 < 0.0) throw ValidationError("h0 must be non-negative");
    for (double p : prices)
        if (!(p > 0.0)) throw DomainError("prices must be positive");

    const std::size_t n = prices.size();
    std::vector<double> contrib(n);
    std::vector<double> q(n);
    if (params.kind == DemandKind::MNL) {
        const double alpha = params.price_response;
        for (std::size_t j = 0; j < n; ++j) contrib[j] = std::exp(qualities[j] - alpha * prices[j]);
        const double h = h0 + std::accumulate(contrib.begin(), contrib.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) q[j] = params.scale * contrib[j] / h;
    } else {
        const double sigma = params.price_response;
        for (std::size_t j = 0; j < n; ++j)
            contrib[j] = qualities[j] * std::pow(prices[j], 1.0 - sigma);
        const double h = h0 + std::accumulate(contrib.begin(), contrib.end(), 0.0);
        // v p^{-sigma} = (v p^{1-sigma}) / p
        for (std::size_t j = 0; j < n; ++j) q[j] = params.scale * contrib[j] / prices[j] / h;
    }
    return q;
}

double hhi(const ShareVector& shares) {
    double total = 0.0;
    for (const auto& f : shares.firms()) total += f.share * f.share;
    return std::min(total, 1.0);
}

double delta_hhi(double share_a, double share_b) {
    return 2.0 * share_a * share_b;
}

double diversion_quantity(double share_j, double share_k) {
    if (!(share_j < 1.0)) throw DomainError("diversion ratio undefined for a share of one");
    return share_k / (1.0 - share_j);
}

double diversion_revenue(double share_j, double share_l, bool adjusted, double sigma) {
    double denom = 1.0 - share_j;
    if (adjusted) {
        if (!(sigma > 1.0)) throw DomainError("adjusted revenue diversion requires sigma > 1");
        denom = sigma / (sigma - 1.0) - share_j;
    }
    if (!(denom > 0.0)) throw DomainError("revenue diversion denominator is not positive");
    return share_l / denom;
}

double equilibrium_margin(double firm_share, const DemandParams& params) {
    params.validate();
    if (!(firm_share < 1.0)) throw DomainError("equilibrium margin undefined for a share of one");
    if (params.kind == DemandKind::MNL) return 1.0 / (params.price_response * (1.0 - firm_share));
    return 1.0 / (1.0 + (1.0 - firm_share) * (params.price_response - 1.0));
}

double ces_revenue_elasticity(double share_j, double sigma) {
    return -(1.0 - share_j) * (sigma - 1.0);
}

double ces_elasticity_factor(double share_j, double sigma) {
    if (!(sigma > 1.0)) throw DomainError("CES requires sigma > 1");
    if (!(share_j <= 1.0)) throw DomainError("CES elasticity factor undefined for a share above one");
    const double k = (1.0 - share_j) * (sigma - 1.0);
    return k / (1.0 + k);
}

}  // namespace hhimerge

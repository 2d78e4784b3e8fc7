#pragma once

// Logit (MNL) and CES demand primitives: shares, concentration, margins,
// elasticities and diversion ratios.
//
// Every share in this library is measured against the full market including
// the outside option. Quantity shares are used under MNL and revenue shares
// under CES; the share helpers take plain doubles so both bases go through
// the same code.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hhimerge {

using FirmId = std::string;
using ProductId = std::string;

enum class DemandKind { MNL, CES };

std::string_view to_string(DemandKind kind);
DemandKind parse_demand_kind(std::string_view text);

struct DemandParams {
    DemandKind kind = DemandKind::MNL;
    // alpha under MNL, sigma under CES.
    double price_response = 1.0;
    // Market size N under MNL, budget Y under CES.
    double scale = 1.0;

    void validate() const;

    // Share level at which margins and scaling factors blow up:
    // 1 under MNL, sigma/(sigma-1) under CES.
    double share_pole() const;

    // Slope linking iota-markups to firm shares, mu = 1/(1 - a*s):
    // 1 under MNL, (sigma-1)/sigma under CES.
    double markup_slope() const;
};

enum class ShareBasis { Quantity, Revenue };

ShareBasis basis_for(DemandKind kind);

struct FirmShare {
    FirmId firm;
    double share = 0.0;
};

// Firm-level shares together with the outside option. Adds up to one.
class ShareVector {
public:
    static constexpr double kAddingUpTolerance = 1e-12;

    ShareVector() = default;
    ShareVector(std::vector<FirmShare> firms, double outside, ShareBasis basis);

    // Outside share is whatever the firms leave over.
    static ShareVector with_residual_outside(std::vector<FirmShare> firms, ShareBasis basis);

    const std::vector<FirmShare>& firms() const { return firms_; }
    double outside() const { return outside_; }
    ShareBasis basis() const { return basis_; }

    bool contains(const FirmId& firm) const;
    double share(const FirmId& firm) const;
    double inside_total() const;

    // Shares renormalized to exclude the outside option.
    std::vector<FirmShare> inside_renormalized() const;

private:
    std::vector<FirmShare> firms_;
    double outside_ = 1.0;
    ShareBasis basis_ = ShareBasis::Quantity;
};

struct ProductShare {
    ProductId product;
    FirmId firm;
    double share = 0.0;
};

// Product-level shares with the ownership map.
class ProductShareVector {
public:
    ProductShareVector() = default;
    explicit ProductShareVector(std::vector<ProductShare> products);

    // One product per firm, named after the firm.
    static ProductShareVector single_product(const ShareVector& firms);

    const std::vector<ProductShare>& products() const { return products_; }

    std::vector<double> shares_of(const FirmId& firm) const;
    std::vector<ProductShare> products_of(const FirmId& firm) const;
    double firm_total(const FirmId& firm) const;
    bool owns_any(const FirmId& firm) const;

    // Throws ValidationError unless each firm's products sum to its share in
    // `firms` within the adding-up tolerance.
    void check_consistent(const ShareVector& firms) const;

private:
    std::vector<ProductShare> products_;
};

// Quantities demanded at `prices`, with baseline aggregator `h0` (the outside
// option contributes h0 to the denominator).
std::vector<double> demand(std::span<const double> prices, std::span<const double> qualities,
                           const DemandParams& params, double h0 = 1.0);

// Sum of squared firm shares; the outside option is excluded. Kept in [0, 1].
double hhi(const ShareVector& shares);

// Naive merger-induced HHI change at pre-merger shares.
double delta_hhi(double share_a, double share_b);

// D_{j->k} = s_k / (1 - s_j).
double diversion_quantity(double share_j, double share_k);

// Unadjusted: s_l / (1 - s_j). Adjusted: s_l / (sigma/(sigma-1) - s_j).
double diversion_revenue(double share_j, double share_l, bool adjusted, double sigma);

// Equilibrium margin implied by a firm's share: absolute margin p - c under
// MNL, relative margin (p - c)/p under CES.
double equilibrium_margin(double firm_share, const DemandParams& params);

// 1 + 1/eps_jj for CES, where eps_jj is the own-price elasticity of demand.
double ces_elasticity_factor(double share_j, double sigma);

// Own-price elasticity of CES revenue: -(1 - s_j)(sigma - 1).
double ces_revenue_elasticity(double share_j, double sigma);

}  // namespace hhimerge

#include "hhimerge/first_order.hpp"

#include "hhimerge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hhimerge {

PassThroughMatrix PassThroughMatrix::identity(std::size_t n, double diagonal) {
    PassThroughMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = diagonal;
    return m;
}

namespace {

// f(x) = x / (q - x)
double odds(double x, double pole) {
    if (!(x < pole)) throw DomainError("share at or beyond the pole of the scaling factor");
    return x / (pole - x);
}

void check_merger(const ProductShareVector& products, const ShareVector& firms, const MergerSpec& merger) {
    merger.validate();
    products.check_consistent(firms);
    for (const auto& id : {merger.firm_a, merger.firm_b}) {
        if (!firms.contains(id)) throw ValidationError("unknown firm '" + id + "'");
        if (!products.owns_any(id)) throw ValidationError("firm '" + id + "' owns no products");
    }
}

double within_firm_sum(const std::vector<double>& product_shares, double firm_share, double pole) {
    if (firm_share == 0.0) return 1.0;
    const double denom = odds(firm_share, pole);
    double total = 0.0;
    for (double s : product_shares) total += odds(s, pole) / denom;
    return total;
}

std::vector<ProductValue> price_pressure(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                                         const MergerSpec& merger, const DemandParams& params) {
    params.validate();
    check_merger(product_shares, firm_shares, merger);
    const double s_a = firm_shares.share(merger.firm_a);
    const double s_b = firm_shares.share(merger.firm_b);
    std::vector<ProductValue> out;
    for (const auto& p : merging_products(product_shares, merger)) {
        const double partner = p.firm == merger.firm_a ? s_b : s_a;
        double value;
        if (params.kind == DemandKind::MNL) {
            if (!(partner < 1.0) || !(p.share < 1.0)) throw DomainError("UPP undefined for a share of one");
            value = partner / (params.price_response * (1.0 - partner) * (1.0 - p.share));
        } else {
            value = guppi_ces(p.share, partner, params.price_response);
        }
        out.push_back({p.product, p.firm, value});
    }
    return out;
}

}  // namespace

std::vector<ProductShare> merging_products(const ProductShareVector& products, const MergerSpec& merger) {
    std::vector<ProductShare> out = products.products_of(merger.firm_a);
    for (auto& p : products.products_of(merger.firm_b)) out.push_back(std::move(p));
    return out;
}

std::vector<ProductValue> upp(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                              const MergerSpec& merger, const DemandParams& params) {
    // Under CES this is GUPPI * p with p = 1.
    return price_pressure(product_shares, firm_shares, merger, params);
}

std::vector<ProductValue> guppi(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                                const MergerSpec& merger, const DemandParams& params) {
    // Under MNL this is UPP / p with p = 1.
    return price_pressure(product_shares, firm_shares, merger, params);
}

double guppi_ces(double share_j, double partner_share, double sigma) {
    if (!(sigma > 1.0)) throw DomainError("CES requires sigma > 1");
    if (!(share_j < 1.0) || !(partner_share < 1.0)) throw DomainError("GUPPI undefined for a share of one");
    const double own = 1.0 + (1.0 - share_j) * (sigma - 1.0);
    const double partner = 1.0 + (1.0 - partner_share) * (sigma - 1.0);
    return (sigma - 1.0) * partner_share / (own * partner);
}

double v0(const DemandParams& params) {
    params.validate();
    if (params.kind == DemandKind::MNL) return params.scale / params.price_response;
    return params.scale / (params.price_response - 1.0);
}

double rho1(double share_a, double share_b, const DemandParams& params) {
    params.validate();
    const double q = params.share_pole();
    if (!(share_a < q) || !(share_b < q)) throw DomainError("rho1 undefined at the share pole");
    return 1.0 / ((q - share_a) * (q - share_b));
}

double rho2(const ProductShareVector& product_shares, const MergerSpec& merger, const DemandParams& params) {
    params.validate();
    merger.validate();
    const double q = params.share_pole();
    double total = 0.0;
    for (const auto& id : {merger.firm_a, merger.firm_b}) {
        if (!product_shares.owns_any(id)) throw ValidationError("firm '" + id + "' owns no products");
        total += 0.5 * within_firm_sum(product_shares.shares_of(id), product_shares.firm_total(id), q);
    }
    return total;
}

double delta_cs_ns(const ShareVector& firm_shares, const MergerSpec& merger, const DemandParams& params,
                   double v0) {
    params.validate();
    merger.validate();
    const double dh = delta_hhi(firm_shares.share(merger.firm_a), firm_shares.share(merger.firm_b));
    return -v0 * params.markup_slope() * dh;
}

double delta_cs_diversion(const ShareVector& firm_shares, const ProductShareVector& product_shares,
                          const MergerSpec& merger, const DemandParams& params, double v0) {
    params.validate();
    check_merger(product_shares, firm_shares, merger);
    const double s_a = firm_shares.share(merger.firm_a);
    const double s_b = firm_shares.share(merger.firm_b);
    double d_ab, d_ba;
    if (params.kind == DemandKind::MNL) {
        d_ab = diversion_quantity(s_a, s_b);
        d_ba = diversion_quantity(s_b, s_a);
    } else {
        d_ab = diversion_revenue(s_a, s_b, true, params.price_response);
        d_ba = diversion_revenue(s_b, s_a, true, params.price_response);
    }
    return -2.0 * v0 * rho2(product_shares, merger, params) * d_ab * d_ba;
}

ApproxReport delta_cs_prop1(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                            const MergerSpec& merger, const DemandParams& params, double v0) {
    params.validate();
    check_merger(product_shares, firm_shares, merger);
    const double s_a = firm_shares.share(merger.firm_a);
    const double s_b = firm_shares.share(merger.firm_b);

    ApproxReport report;
    report.kind = params.kind;
    report.v0 = v0;
    report.delta_hhi = delta_hhi(s_a, s_b);
    report.rho1 = rho1(s_a, s_b, params);
    report.rho2 = rho2(product_shares, merger, params);
    report.dcs_prop1 = -report.v0 * report.rho1 * report.rho2 * report.delta_hhi;
    report.dcs_ns = delta_cs_ns(firm_shares, merger, params, v0);
    report.dcs_corollary = delta_cs_diversion(firm_shares, product_shares, merger, params, v0);
    report.upp = upp(product_shares, firm_shares, merger, params);
    report.guppi = guppi(product_shares, firm_shares, merger, params);
    return report;
}

double delta_cs_passthrough(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                            const MergerSpec& merger, const DemandParams& params,
                            const PassThroughMatrix& kappa, double market_size) {
    params.validate();
    if (params.kind != DemandKind::MNL)
        throw DomainError("the pass-through approximation is only available for MNL demand");
    check_merger(product_shares, firm_shares, merger);
    const auto merging = merging_products(product_shares, merger);
    if (kappa.size() != merging.size())
        throw ValidationError("pass-through matrix must match the number of merging products");

    const double alpha = params.price_response;
    const double s_a = firm_shares.share(merger.firm_a);
    const double s_b = firm_shares.share(merger.firm_b);
    const double prefactor = s_a * s_b / ((1.0 - s_a) * (1.0 - s_b));

    // prefactor / f(s_f) equals the partner's odds; use that when f(s_f) = 0.
    auto firm_weight = [&](double own, double partner) {
        return own > 0.0 ? prefactor / odds(own, 1.0) : odds(partner, 1.0);
    };
    const double weight_a = firm_weight(s_a, s_b);
    const double weight_b = firm_weight(s_b, s_a);

    double total = 0.0;
    for (std::size_t i = 0; i < merging.size(); ++i) {
        const double s_i = merging[i].share;
        if (!(s_i < 1.0)) throw DomainError("product share of one");
        double column = 0.0;
        for (std::size_t j = 0; j < merging.size(); ++j) column += kappa(j, i) * merging[j].share;
        // f(s_i)/s_i, with its limit at s_i = 0.
        const double odds_per_share = s_i > 0.0 ? odds(s_i, 1.0) / s_i : 1.0;
        const double weight = merging[i].firm == merger.firm_a ? weight_a : weight_b;
        total += weight * odds_per_share * column;
    }
    return -(market_size / alpha) * total;
}

Rho1Bounds rho1_bounds(double c0, double delta0) {
    if (!(c0 > 0.0 && c0 <= 1.0)) throw DomainError("c0 must lie in (0, 1]");
    if (!(delta0 > 0.0)) throw DomainError("delta0 must be positive");
    // A few ulps of slack so a grid ending exactly at c0^2/2 stays feasible.
    const double delta_max = c0 * c0 / 2.0;
    if (delta0 > delta_max * (1.0 + 8.0 * std::numeric_limits<double>::epsilon()))
        throw DomainError("share set is empty: need c0^2/2 >= delta0");

    const double symmetric = std::sqrt(delta0 / 2.0);
    const double spread = std::sqrt(std::max(0.0, c0 * c0 - 2.0 * delta0));
    Rho1Bounds b;
    b.lower = 1.0 / ((1.0 - symmetric) * (1.0 - symmetric));
    b.upper = 2.0 / (delta0 - 2.0 * c0 + 2.0);
    b.argmin = {symmetric, symmetric};
    b.argmax = {0.5 * (c0 - spread), 0.5 * (c0 + spread)};
    return b;
}

}  // namespace hhimerge

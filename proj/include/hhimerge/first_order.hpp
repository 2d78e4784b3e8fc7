#pragma once

// First-order predictions of merger effects from pre-merger shares:
// upward pricing pressure, the cross-firm and within-firm scaling factors,
// and the consumer-surplus approximations that scale the change in HHI.
//
// Shares are quantity shares under MNL and revenue shares under CES. Harm is
// reported as a negative change in consumer surplus. Where a price level is
// needed (UPP under CES, GUPPI under MNL) pre-merger prices are taken to be
// one, matching the calibration convention, so UPP and GUPPI coincide.

#include "hhimerge/demand.hpp"
#include "hhimerge/merger.hpp"

#include <cstddef>
#include <vector>

namespace hhimerge {

struct ProductValue {
    ProductId product;
    FirmId firm;
    double value = 0.0;
};

struct ApproxReport {
    DemandKind kind = DemandKind::MNL;
    double delta_hhi = 0.0;
    double v0 = 1.0;
    double rho1 = 1.0;
    double rho2 = 1.0;
    double dcs_prop1 = 0.0;
    double dcs_ns = 0.0;
    double dcs_corollary = 0.0;
    std::vector<ProductValue> upp;
    std::vector<ProductValue> guppi;
};

// Square matrix over the merging products, ordered as firm A's products
// followed by firm B's (each in ProductShareVector order). Row j, column i
// holds the response of p_j to UPP_i.
class PassThroughMatrix {
public:
    PassThroughMatrix() = default;
    explicit PassThroughMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    static PassThroughMatrix identity(std::size_t n, double diagonal = 1.0);

    std::size_t size() const { return n_; }
    double& operator()(std::size_t row, std::size_t col) { return data_[row * n_ + col]; }
    double operator()(std::size_t row, std::size_t col) const { return data_[row * n_ + col]; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// Merging products in pass-through order: A's then B's.
std::vector<ProductShare> merging_products(const ProductShareVector& products, const MergerSpec& merger);

std::vector<ProductValue> upp(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                              const MergerSpec& merger, const DemandParams& params);

std::vector<ProductValue> guppi(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                                const MergerSpec& merger, const DemandParams& params);

// GUPPI of a CES product whose owner merges with a firm holding `partner_share`.
double guppi_ces(double share_j, double partner_share, double sigma);

double v0(const DemandParams& params);

// 1/((q - s_A)(q - s_B)) with q the demand system's share pole.
double rho1(double share_a, double share_b, const DemandParams& params);

// Half-sum over the merging firms of sum_j f(s_j)/f(s_f), f(x) = x/(q - x).
// A firm with zero share contributes its small-share limit of one.
double rho2(const ProductShareVector& product_shares, const MergerSpec& merger, const DemandParams& params);

ApproxReport delta_cs_prop1(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                            const MergerSpec& merger, const DemandParams& params, double v0);

// Small-share benchmark whose coefficient ignores how shares are distributed.
double delta_cs_ns(const ShareVector& firm_shares, const MergerSpec& merger, const DemandParams& params,
                   double v0);

// -2 V0 rho2 D_{A->B} D_{B->A}, with adjusted revenue diversion under CES.
double delta_cs_diversion(const ShareVector& firm_shares, const ProductShareVector& product_shares,
                          const MergerSpec& merger, const DemandParams& params, double v0);

// Consumer-surplus change when merger price effects are kappa * UPP (MNL only).
double delta_cs_passthrough(const ProductShareVector& product_shares, const ShareVector& firm_shares,
                            const MergerSpec& merger, const DemandParams& params,
                            const PassThroughMatrix& kappa, double market_size);

struct SharePair {
    double share_a = 0.0;
    double share_b = 0.0;
};

struct Rho1Bounds {
    double lower = 1.0;
    double upper = 1.0;
    SharePair argmin;
    SharePair argmax;
};

// Range of the MNL rho1 over {(s_A, s_B): s_A + s_B <= c0, 2 s_A s_B = delta0}.
Rho1Bounds rho1_bounds(double c0, double delta0);

}  // namespace hhimerge

#pragma once

// Bertrand-Nash equilibrium of a multiproduct oligopoly with MNL or CES
// demand, solved through firm types and the market aggregator.
//
// Each firm f is summarized by its type T_f. In equilibrium every firm applies
// one iota-markup mu_f to all of its products (alpha*(p - c) under MNL,
// sigma*(p - c)/p under CES), and (mu, s, H) solve
//
//   1   = mu_f * (1 - a * (T_f/H) * g(mu_f))   for every firm (fitting-in)
//   s_f = (T_f/H) * g(mu_f)                    for every firm
//   1   = H0/H + sum_f s_f                     (adding up)
//
// with g(mu) = exp(-mu), a = 1 under MNL and g(mu) = (1 - mu/sigma)^(sigma-1),
// a = (sigma-1)/sigma under CES. The solver nests a safeguarded Newton solve
// for each mu_f inside a Brent solve on log H.

#include "hhimerge/demand.hpp"
#include "hhimerge/merger.hpp"

#include <vector>

namespace hhimerge {

struct Product {
    ProductId id;
    FirmId firm;
    double quality = 0.0;  // v_j
    double cost = 1.0;     // c_j
};

struct Market {
    std::vector<Product> products;
    DemandParams params;
    double h0 = 1.0;

    void validate() const;

    // Firm ids in order of first appearance.
    std::vector<FirmId> firms() const;
};

struct FirmType {
    FirmId firm;
    double type = 0.0;
};

struct FirmModel {
    std::vector<FirmType> firm_types;
    DemandParams params;
    double h0 = 1.0;

    void validate() const;
    bool contains(const FirmId& firm) const;
    double type(const FirmId& firm) const;

    // Monetary scaling factor: N/alpha under MNL, Y/(sigma-1) under CES.
    double v0() const;
};

struct SolverOptions {
    double outer_tolerance = 1e-12;
    double inner_tolerance = 1e-12;
    int max_outer_iterations = 200;
    int max_inner_iterations = 100;
};

struct SolverDiagnostics {
    int iterations = 0;
    // Largest absolute residual over the three equation blocks.
    double residual = 0.0;
    // What double precision can certify at this solution; converged means
    // residual <= max(tolerance, residual_floor).
    double residual_floor = 0.0;
    bool converged = false;
};

struct FirmOutcome {
    FirmId firm;
    double type = 0.0;
    double mu = 1.0;
    double share = 0.0;
    double profit = 0.0;
};

struct Equilibrium {
    double h = 1.0;
    double h0 = 1.0;
    double v0 = 1.0;
    DemandKind kind = DemandKind::MNL;
    std::vector<FirmOutcome> firms;
    double outside_share = 1.0;
    double cs = 0.0;
    SolverDiagnostics diagnostics;

    const FirmOutcome& firm(const FirmId& id) const;
    ShareVector shares() const;
};

double firm_type(const Market& market, const FirmId& firm);

// Collapses a product-level market into firm types.
FirmModel firm_model(const Market& market);

// Unique iota-markup solving the fitting-in condition for type T at
// aggregator H. Throws SolverError if the inner solve fails.
double solve_mu(double type, double h, const DemandParams& params, const SolverOptions& options = {});

// 1 - mu * (1 - a * (T/H) * g(mu)); zero at the equilibrium markup.
double fitting_in_residual(double type, double h, double mu, const DemandParams& params);

// s_f = (T/H) * g(mu).
double firm_share_at(double type, double h, double mu, const DemandParams& params);

// Aggregate excess H0/H + sum_f s_f(H) - 1, with each mu_f solved at H.
// Strictly decreasing in H.
double aggregate_excess(const FirmModel& model, double h, const SolverOptions& options = {});

// Never throws on non-convergence; check diagnostics.converged.
Equilibrium solve_equilibrium(const FirmModel& model, const SolverOptions& options = {});

// Max absolute residual of the three equation blocks at `eq`.
double system_residual(const FirmModel& model, const Equilibrium& eq);

// Rounding floor for system_residual at `eq`. Below the solver tolerances
// except for extreme markups.
double attainable_residual(const FirmModel& model, const Equilibrium& eq);

// Replaces firms A and B with one firm of type T_A + T_B, placed where A was.
FirmModel post_merger_model(const FirmModel& model, const MergerSpec& merger);

// Product prices implied by the equilibrium markups:
// p = c + mu/alpha (MNL) or p = c / (1 - mu/sigma) (CES).
std::vector<double> prices_from_equilibrium(const Market& market, const Equilibrium& eq);

// V0 * (log H_post - log H_pre).
double delta_cs_actual(const Equilibrium& pre, const Equilibrium& post);

}  // namespace hhimerge

#include "hhimerge/equilibrium.hpp"

#include "hhimerge/errors.hpp"
#include "hhimerge/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace hhimerge {

void MergerSpec::validate() const {
    if (firm_a.empty() || firm_b.empty()) throw ValidationError("merger needs two firm ids");
    if (firm_a == firm_b) throw ValidationError("a firm cannot merge with itself");
}

void Market::validate() const {
    params.validate();
    if (!(h0 >= 0.0) || !std::isfinite(h0)) throw ValidationError("h0 must be non-negative");
    for (std::size_t i = 0; i < products.size(); ++i) {
        const auto& p = products[i];
        if (p.id.empty() || p.firm.empty()) throw ValidationError("product and firm ids must be non-empty");
        if (!(p.cost > 0.0) || !std::isfinite(p.cost))
            throw ValidationError("cost of product '" + p.id + "' must be positive");
        if (!std::isfinite(p.quality)) throw ValidationError("quality of product '" + p.id + "' is not finite");
        if (params.kind == DemandKind::CES && p.quality < 0.0)
            throw ValidationError("CES quality of product '" + p.id + "' must be non-negative");
        for (std::size_t j = 0; j < i; ++j)
            if (products[j].id == p.id) throw ValidationError("duplicate product '" + p.id + "'");
    }
}

std::vector<FirmId> Market::firms() const {
    std::vector<FirmId> out;
    for (const auto& p : products)
        if (std::find(out.begin(), out.end(), p.firm) == out.end()) out.push_back(p.firm);
    return out;
}

void FirmModel::validate() const {
    params.validate();
    if (!(h0 >= 0.0) || !std::isfinite(h0)) throw ValidationError("h0 must be non-negative");
    for (std::size_t i = 0; i < firm_types.size(); ++i) {
        const auto& f = firm_types[i];
        if (f.firm.empty()) throw ValidationError("firm ids must be non-empty");
        if (!(f.type >= 0.0) || !std::isfinite(f.type))
            throw ValidationError("type of firm '" + f.firm + "' must be non-negative and finite");
        for (std::size_t j = 0; j < i; ++j)
            if (firm_types[j].firm == f.firm) throw ValidationError("duplicate firm '" + f.firm + "'");
    }
}

bool FirmModel::contains(const FirmId& firm) const {
    return std::any_of(firm_types.begin(), firm_types.end(),
                       [&](const FirmType& f) { return f.firm == firm; });
}

double FirmModel::type(const FirmId& firm) const {
    for (const auto& f : firm_types)
        if (f.firm == firm) return f.type;
    throw ValidationError("unknown firm '" + firm + "'");
}

double FirmModel::v0() const {
    if (params.kind == DemandKind::MNL) return params.scale / params.price_response;
    return params.scale / (params.price_response - 1.0);
}

const FirmOutcome& Equilibrium::firm(const FirmId& id) const {
    for (const auto& f : firms)
        if (f.firm == id) return f;
    throw ValidationError("unknown firm '" + id + "'");
}

ShareVector Equilibrium::shares() const {
    std::vector<FirmShare> out;
    out.reserve(firms.size());
    for (const auto& f : firms) out.push_back({f.firm, f.share});
    // The solver meets adding-up to its own tolerance; clamp the outside share
    // so the vector satisfies the exact-normalization contract.
    double inside = 0.0;
    for (const auto& f : out) inside += f.share;
    return ShareVector(std::move(out), std::clamp(1.0 - inside, 0.0, 1.0), basis_for(kind));
}

double firm_type(const Market& market, const FirmId& firm) {
    market.params.validate();
    double total = 0.0;
    bool found = false;
    for (const auto& p : market.products) {
        if (p.firm != firm) continue;
        found = true;
        if (market.params.kind == DemandKind::MNL)
            total += std::exp(p.quality - market.params.price_response * p.cost);
        else
            total += p.quality * std::pow(p.cost, 1.0 - market.params.price_response);
    }
    if (!found) throw ValidationError("unknown firm '" + firm + "'");
    return total;
}

FirmModel firm_model(const Market& market) {
    market.validate();
    FirmModel model;
    model.params = market.params;
    model.h0 = market.h0;
    for (const auto& f : market.firms()) model.firm_types.push_back({f, firm_type(market, f)});
    return model;
}

namespace {

// g(mu) and g'(mu) from the fitting-in condition.
std::pair<double, double> markup_kernel(double mu, const DemandParams& params) {
    if (params.kind == DemandKind::MNL) {
        const double g = std::exp(-mu);
        return {g, -g};
    }
    const double sigma = params.price_response;
    const double base = 1.0 - mu / sigma;
    if (base <= 0.0) return {0.0, 0.0};
    const double g = std::exp((sigma - 1.0) * std::log(base));
    const double dg = -((sigma - 1.0) / sigma) * g / base;
    return {g, dg};
}

// phi(mu) = 1 - 1/mu - a*x*g(mu) and its slope.
std::pair<double, double> monotone_form(double x, double mu, const DemandParams& params) {
    const auto [g, dg] = markup_kernel(mu, params);
    const double a = params.markup_slope();
    return {1.0 - 1.0 / mu - a * x * g, 1.0 / (mu * mu) - a * x * dg};
}

// Smallest fitting-in residual double arithmetic can certify at mu. The
// residual is -mu*phi(mu), so one ulp in mu moves it by about mu^2 phi'(mu).
// Only matters for extreme markups; near mu = 1 it is ~1e-15.
double fitting_in_floor(double x, double mu, const DemandParams& params) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    return 8.0 * eps * (1.0 + mu * mu * monotone_form(x, mu, params).second);
}

double markup_upper_bound(double x, const DemandParams& params) {
    // MNL: x*exp(-(2 + log1p(x))) < e^-2 < 1/2 <= 1 - 1/mu, so the
    // monotone form below is positive there.
    if (params.kind == DemandKind::MNL) return 2.0 + std::log1p(x);
    return params.price_response;
}

}  // namespace

double fitting_in_residual(double type, double h, double mu, const DemandParams& params) {
    const double x = type / h;
    const double g = markup_kernel(mu, params).first;
    return 1.0 - mu * (1.0 - params.markup_slope() * x * g);
}

double firm_share_at(double type, double h, double mu, const DemandParams& params) {
    return type / h * markup_kernel(mu, params).first;
}

double solve_mu(double type, double h, const DemandParams& params, const SolverOptions& options) {
    if (!(type >= 0.0)) throw DomainError("firm type must be non-negative");
    if (!(h > 0.0)) throw DomainError("aggregator must be positive");
    const double x = type / h;
    const double a = params.markup_slope();
    if (x == 0.0 || a * x * markup_kernel(1.0, params).first <= options.inner_tolerance) return 1.0;

    const double hi = markup_upper_bound(x, params);
    // Log form of the fitting-in condition,
    //   psi(mu) = log(1 - 1/mu) - log(a x) - log g(mu),
    // increasing from -inf at mu = 1 to +inf (CES) or > 0 (MNL) at hi. Nearly
    // linear in mu, so Newton is fast even when a*x*g spans hundreds of decades.
    const double log_ax = std::log(a) + std::log(x);
    auto psi = [&](double mu) -> std::pair<double, double> {
        const double lead = std::log1p(-1.0 / mu);
        const double dlead = 1.0 / (mu * (mu - 1.0));
        if (params.kind == DemandKind::MNL) return {lead - log_ax + mu, dlead + 1.0};
        const double sigma = params.price_response;
        return {lead - log_ax - (sigma - 1.0) * std::log1p(-mu / sigma), dlead + (sigma - 1.0) / (sigma - mu)};
    };
    // Small x: mu - 1 is about a*x*g(1). Otherwise start mid-bracket.
    const double guess = std::min(1.0 + a * x * markup_kernel(1.0, params).first, 0.5 * (1.0 + hi));
    // |fitting-in residual| is about (mu - 1)|psi| < hi |psi|.
    const auto r = roots::safeguarded_newton(psi, 1.0, hi, guess, options.inner_tolerance / hi,
                                             options.max_inner_iterations);
    const double residual = fitting_in_residual(type, h, r.x, params);
    const double accept = std::max(options.inner_tolerance, fitting_in_floor(x, r.x, params));
    if (!(std::abs(residual) <= accept))
        throw SolverError("markup solve did not converge", residual, r.iterations);
    return r.x;
}

double aggregate_excess(const FirmModel& model, double h, const SolverOptions& options) {
    double total = model.h0 / h - 1.0;
    for (const auto& f : model.firm_types) {
        const double mu = solve_mu(f.type, h, model.params, options);
        total += firm_share_at(f.type, h, mu, model.params);
    }
    return total;
}

namespace {

Equilibrium assemble(const FirmModel& model, double h, const SolverOptions& options) {
    Equilibrium eq;
    eq.h = h;
    eq.h0 = model.h0;
    eq.v0 = model.v0();
    eq.kind = model.params.kind;
    eq.outside_share = model.h0 / h;
    eq.cs = eq.v0 * std::log(h);
    for (const auto& f : model.firm_types) {
        FirmOutcome out;
        out.firm = f.firm;
        out.type = f.type;
        out.mu = solve_mu(f.type, h, model.params, options);
        out.share = firm_share_at(f.type, h, out.mu, model.params);
        out.profit = eq.v0 * (out.mu - 1.0);
        eq.firms.push_back(std::move(out));
    }
    return eq;
}

}  // namespace

double system_residual(const FirmModel& model, const Equilibrium& eq) {
    double worst = 0.0;
    double adding_up = model.h0 / eq.h - 1.0;
    for (const auto& f : eq.firms) {
        const double type = model.type(f.firm);
        worst = std::max(worst, std::abs(fitting_in_residual(type, eq.h, f.mu, model.params)));
        worst = std::max(worst, std::abs(f.share - firm_share_at(type, eq.h, f.mu, model.params)));
        adding_up += f.share;
    }
    return std::max(worst, std::abs(adding_up));
}

double attainable_residual(const FirmModel& model, const Equilibrium& eq) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double fit = 0.0;
    double adding_up = 4.0 * eps * (1.0 + static_cast<double>(eq.firms.size()));
    for (const auto& f : eq.firms) {
        if (f.share == 0.0) continue;
        const double x = model.type(f.firm) / eq.h;
        fit = std::max(fit, fitting_in_floor(x, f.mu, model.params));
        // A share moves with mu through g'/g; mu is pinned to a few ulps.
        const auto [g, dg] = markup_kernel(f.mu, model.params);
        adding_up += 8.0 * eps * f.share * f.mu * std::abs(dg / g);
    }
    return std::max(fit, adding_up);
}

Equilibrium solve_equilibrium(const FirmModel& model, const SolverOptions& options) {
    model.validate();
    const double total_type = std::accumulate(
        model.firm_types.begin(), model.firm_types.end(), 0.0,
        [](double acc, const FirmType& f) { return acc + f.type; });

    Equilibrium failed;
    failed.h0 = model.h0;
    failed.v0 = model.v0();
    failed.kind = model.params.kind;
    failed.h = std::numeric_limits<double>::quiet_NaN();
    failed.diagnostics.residual = std::numeric_limits<double>::infinity();

    if (total_type == 0.0) {
        if (model.h0 == 0.0) return failed;
        Equilibrium eq = assemble(model, model.h0, options);
        eq.diagnostics.residual = system_residual(model, eq);
        eq.diagnostics.converged = true;
        return eq;
    }

    int evaluations = 0;
    bool inner_failed = false;
    auto excess = [&](double log_h) {
        ++evaluations;
        try {
            return aggregate_excess(model, std::exp(log_h), options);
        } catch (const SolverError&) {
            inner_failed = true;
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    // Aggregator contributions are below T_f, so the root sits in
    // [H0, H0 + sum T]. Bracket in log H to cope with very large types.
    const double log_hi = std::log(model.h0 + total_type);
    const double f_hi = excess(log_hi);
    double log_lo;
    double f_lo;
    if (model.h0 > 0.0) {
        log_lo = std::log(model.h0);
        f_lo = excess(log_lo);
    } else {
        log_lo = log_hi;
        f_lo = f_hi;
        for (double step = 1.0; !(f_lo > 0.0) && step < 2048.0; step *= 2.0) {
            log_lo = log_hi - step;
            f_lo = excess(log_lo);
        }
    }
    if (inner_failed || !(f_lo >= 0.0) || !(f_hi <= 0.0)) {
        failed.diagnostics.iterations = evaluations;
        return failed;
    }

    const auto r = roots::brent(excess, log_lo, log_hi, f_lo, f_hi, options.outer_tolerance,
                                options.max_outer_iterations);
    if (inner_failed) {
        failed.diagnostics.iterations = r.iterations;
        return failed;
    }
    Equilibrium eq = assemble(model, std::exp(r.x), options);
    eq.diagnostics.iterations = r.iterations;
    eq.diagnostics.residual = system_residual(model, eq);
    eq.diagnostics.residual_floor = attainable_residual(model, eq);
    // A collapsed bracket is fine once the residual is down to what doubles allow.
    eq.diagnostics.converged =
        eq.diagnostics.residual <= std::max(options.outer_tolerance, eq.diagnostics.residual_floor);
    return eq;
}

FirmModel post_merger_model(const FirmModel& model, const MergerSpec& merger) {
    merger.validate();
    if (!model.contains(merger.firm_a)) throw ValidationError("unknown firm '" + merger.firm_a + "'");
    if (!model.contains(merger.firm_b)) throw ValidationError("unknown firm '" + merger.firm_b + "'");
    FirmModel out;
    out.params = model.params;
    out.h0 = model.h0;
    const double merged_type = model.type(merger.firm_a) + model.type(merger.firm_b);
    for (const auto& f : model.firm_types) {
        if (f.firm == merger.firm_a)
            out.firm_types.push_back({merger.merged_id(), merged_type});
        else if (f.firm != merger.firm_b)
            out.firm_types.push_back(f);
    }
    return out;
}

std::vector<double> prices_from_equilibrium(const Market& market, const Equilibrium& eq) {
    std::vector<double> prices;
    prices.reserve(market.products.size());
    for (const auto& p : market.products) {
        const double mu = eq.firm(p.firm).mu;
        if (market.params.kind == DemandKind::MNL) {
            prices.push_back(p.cost + mu / market.params.price_response);
        } else {
            const double sigma = market.params.price_response;
            if (!(mu < sigma)) throw DomainError("CES markup must stay below sigma");
            prices.push_back(p.cost / (1.0 - mu / sigma));
        }
    }
    return prices;
}

double delta_cs_actual(const Equilibrium& pre, const Equilibrium& post) {
    if (std::abs(pre.v0 - post.v0) > 1e-12 * std::max(1.0, std::abs(pre.v0)))
        throw ValidationError("pre- and post-merger equilibria use different V0");
    return pre.v0 * (std::log(post.h) - std::log(pre.h));
}

}  // namespace hhimerge

#include "hhimerge/equilibrium.hpp"
#include "hhimerge/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace hhimerge;
using doctest::Approx;

namespace {

FirmModel random_model(std::mt19937_64& rng, DemandKind kind, int n) {
    std::uniform_real_distribution<double> logt(-3.0, 1.5);
    std::uniform_real_distribution<double> sig(1.3, 8.0);
    FirmModel m;
    m.params = {kind, kind == DemandKind::MNL ? 1.0 : sig(rng), 1.0};
    for (int i = 0; i < n; ++i) m.firm_types.push_back({"f" + std::to_string(i), std::exp(logt(rng))});
    return m;
}

double a_star(const DemandParams& p) { return p.markup_slope(); }

}  // namespace

TEST_CASE("solve_mu: frozen values") {
    const DemandParams mnl{DemandKind::MNL, 1.0, 1.0};
    CHECK(solve_mu(0.5 * std::exp(2.0), 1.0, mnl) == Approx(2.0).epsilon(1e-12));
    const DemandParams ces{DemandKind::CES, 2.0, 1.0};
    CHECK(solve_mu(1.5, 1.0, ces) == Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(solve_mu(0.0, 1.0, mnl) == 1.0);
    // Very large types push mu far out; the adaptive bracket must still hold it.
    const double big = solve_mu(1e12, 1.0, mnl);
    CHECK(std::abs(fitting_in_residual(1e12, 1.0, big, mnl)) < 1e-10);
}

TEST_CASE("solve_equilibrium: frozen values") {
    SUBCASE("MNL single firm") {
        FirmModel m;
        m.params = {DemandKind::MNL, 4.0, 4.0};
        m.firm_types = {{"A", std::exp(2.0)}};
        const Equilibrium eq = solve_equilibrium(m);
        REQUIRE(eq.diagnostics.converged);
        CHECK(eq.h == Approx(2.0).epsilon(1e-12));
        CHECK(eq.firm("A").mu == Approx(2.0).epsilon(1e-12));
        CHECK(eq.firm("A").share == Approx(0.5).epsilon(1e-12));
        CHECK(eq.outside_share == Approx(0.5).epsilon(1e-12));
        CHECK(eq.v0 == Approx(1.0));
        CHECK(eq.cs == Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(eq.firm("A").profit == Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("CES single firm") {
        FirmModel m;
        m.params = {DemandKind::CES, 3.0, 2.0};
        m.firm_types = {{"A", 4.0}};
        const Equilibrium eq = solve_equilibrium(m);
        REQUIRE(eq.diagnostics.converged);
        CHECK(eq.h == Approx(2.0).epsilon(1e-12));
        CHECK(eq.firm("A").mu == Approx(1.5).epsilon(1e-12));
    }
    SUBCASE("no products at all") {
        FirmModel m;
        m.params = {DemandKind::MNL, 1.0, 1.0};
        m.firm_types = {{"A", 0.0}};
        const Equilibrium eq = solve_equilibrium(m);
        CHECK(eq.diagnostics.converged);
        CHECK(eq.h == 1.0);
        CHECK(eq.outside_share == 1.0);
    }
}

TEST_CASE("solve_equilibrium: system invariants on random models") {
    std::mt19937_64 rng(2024);
    for (auto kind : {DemandKind::MNL, DemandKind::CES}) {
        for (int trial = 0; trial < 150; ++trial) {
            const FirmModel m = random_model(rng, kind, 1 + trial % 7);
            const Equilibrium eq = solve_equilibrium(m);
            REQUIRE(eq.diagnostics.converged);
            CHECK(system_residual(m, eq) < 1e-10);
            double total = eq.h0 / eq.h;
            for (const auto& f : eq.firms) {
                total += f.share;
                CHECK(std::abs(fitting_in_residual(f.type, eq.h, f.mu, m.params)) < 1e-10);
                CHECK(f.mu == Approx(1.0 / (1.0 - a_star(m.params) * f.share)).epsilon(1e-8));
            }
            CHECK(std::abs(total - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("aggregate excess is strictly decreasing on the bracket") {
    std::mt19937_64 rng(5);
    for (auto kind : {DemandKind::MNL, DemandKind::CES}) {
        for (int trial = 0; trial < 20; ++trial) {
            const FirmModel m = random_model(rng, kind, 4);
            double total = 0.0;
            for (const auto& f : m.firm_types) total += f.type;
            double prev = aggregate_excess(m, m.h0);
            for (int i = 1; i <= 100; ++i) {
                const double h = m.h0 + total * i / 100.0;
                const double phi = aggregate_excess(m, h);
                CHECK(phi < prev);
                prev = phi;
            }
        }
    }
}

TEST_CASE("permutation invariance") {
    std::mt19937_64 rng(11);
    for (auto kind : {DemandKind::MNL, DemandKind::CES}) {
        FirmModel m = random_model(rng, kind, 5);
        const Equilibrium a = solve_equilibrium(m);
        std::reverse(m.firm_types.begin(), m.firm_types.end());
        const Equilibrium b = solve_equilibrium(m);
        CHECK(a.h == Approx(b.h).epsilon(1e-12));
        for (const auto& f : a.firms) CHECK(f.mu == Approx(b.firm(f.firm).mu).epsilon(1e-12));
    }
}

TEST_CASE("profit identity against direct revenue minus cost") {
    for (auto kind : {DemandKind::MNL, DemandKind::CES}) {
        Market market;
        market.params = {kind, kind == DemandKind::MNL ? 1.8 : 2.6, 7.0};
        market.products = {{"a1", "A", 1.2, 0.8}, {"a2", "A", 0.4, 1.1}, {"b1", "B", 0.9, 0.6},
                           {"c1", "C", 1.6, 1.4}, {"c2", "C", 0.2, 0.5}};
        const FirmModel model = firm_model(market);
        const Equilibrium eq = solve_equilibrium(model);
        REQUIRE(eq.diagnostics.converged);
        const auto prices = prices_from_equilibrium(market, eq);
        std::vector<double> v;
        for (const auto& p : market.products) v.push_back(p.quality);
        const auto q = demand(prices, v, market.params, market.h0);
        for (const auto& firm : market.firms()) {
            double direct = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j)
                if (market.products[j].firm == firm) direct += (prices[j] - market.products[j].cost) * q[j];
            CHECK(eq.firm(firm).profit == Approx(direct).epsilon(1e-8));
        }
    }
}

TEST_CASE("merger raises markups and lowers the aggregator") {
    std::mt19937_64 rng(99);
    for (auto kind : {DemandKind::MNL, DemandKind::CES}) {
        for (int trial = 0; trial < 50; ++trial) {
            const FirmModel m = random_model(rng, kind, 2 + trial % 5);
            const MergerSpec merger{"f0", "f1"};
            const FirmModel post = post_merger_model(m, merger);
            const Equilibrium a = solve_equilibrium(m);
            const Equilibrium b = solve_equilibrium(post);
            REQUIRE(a.diagnostics.converged);
            REQUIRE(b.diagnostics.converged);
            CHECK(b.h <= a.h * (1 + 1e-14));
            CHECK(delta_cs_actual(a, b) <= 1e-14);
            CHECK(b.firm(merger.merged_id()).mu >= a.firm("f0").mu);
            CHECK(b.firm(merger.merged_id()).mu >= a.firm("f1").mu);
            for (const auto& f : b.firms)
                if (f.firm != merger.merged_id()) CHECK(f.mu >= a.firm(f.firm).mu - 1e-14);
        }
    }
}

TEST_CASE("post_merger_model") {
    FirmModel m;
    m.params = {DemandKind::MNL, 1.0, 1.0};
    m.firm_types = {{"A", 1.0}, {"B", 2.0}, {"C", 3.0}};
    const FirmModel post = post_merger_model(m, {"A", "B"});
    REQUIRE(post.firm_types.size() == 2);
    CHECK(post.firm_types[0].firm == "A+B");
    CHECK(post.firm_types[0].type == 3.0);
    CHECK(post.firm_types[1].firm == "C");
    CHECK_THROWS_AS(post_merger_model(m, {"A", "A"}), ValidationError);
    CHECK_THROWS_AS(post_merger_model(m, {"A", "Z"}), ValidationError);

    // Merging with a zero-type firm changes nothing.
    m.firm_types = {{"A", 1.0}, {"Z", 0.0}, {"C", 3.0}};
    const Equilibrium pre = solve_equilibrium(m);
    const Equilibrium after = solve_equilibrium(post_merger_model(m, {"A", "Z"}));
    CHECK(delta_cs_actual(pre, after) == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("delta_cs_actual") {
    Equilibrium pre, post;
    pre.h = 2.0;
    post.h = 1.8;
    CHECK(delta_cs_actual(pre, post) == Approx(std::log(0.9)).epsilon(1e-12));
    CHECK(delta_cs_actual(pre, pre) == 0.0);
    post.v0 = 2.0;
    CHECK_THROWS(delta_cs_actual(pre, post));
}

TEST_CASE("firm types from products") {
    Market market;
    market.params = {DemandKind::MNL, 2.0, 1.0};
    market.products = {{"a1", "A", 1.0, 0.5}, {"a2", "A", 0.0, 0.0}, {"b1", "B", 2.0, 1.0}};
    CHECK(firm_type(market, "A") == Approx(std::exp(0.0) + std::exp(0.0)));
    CHECK(firm_type(market, "B") == Approx(1.0));
    market.params = {DemandKind::CES, 3.0, 1.0};
    market.products = {{"a1", "A", 2.0, 0.5}};
    CHECK(firm_type(market, "A") == Approx(2.0 * std::pow(0.5, -2.0)));

    const FirmModel fm = firm_model(market);
    REQUIRE(fm.firm_types.size() == 1);
    CHECK(fm.v0() == Approx(0.5));
}

TEST_CASE("validation") {
    FirmModel m;
    m.params = {DemandKind::MNL, 1.0, 1.0};
    m.firm_types = {{"A", -1.0}};
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.firm_types = {{"A", 1.0}, {"A", 2.0}};
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.firm_types = {{"A", 1.0}};
    m.params.price_response = 0.0;
    CHECK_THROWS(m.validate());
    m.params = {DemandKind::CES, 1.0, 1.0};
    CHECK_THROWS(m.validate());
}

TEST_CASE("extreme CES markups converge within the rounding floor") {
    // One dominant firm with sigma in the hundreds: the fitting-in residual
    // cannot reach 1e-12 in doubles, but the solve is exact to rounding.
    FirmModel m;
    m.params = {DemandKind::CES, 739.4, 1.0};
    m.firm_types = {{"A", 4.11759e198}};
    const Equilibrium eq = solve_equilibrium(m);
    REQUIRE(eq.diagnostics.converged);
    CHECK(eq.diagnostics.residual_floor > 1e-12);
    CHECK(eq.diagnostics.residual <= eq.diagnostics.residual_floor);
    CHECK(eq.outside_share == Approx(1.609e-3).epsilon(1e-3));

    // Ordinary instances keep the floor far below the tolerance.
    m.params = {DemandKind::MNL, 1.0, 1.0};
    m.firm_types = {{"A", 1.0}, {"B", 2.0}};
    CHECK(solve_equilibrium(m).diagnostics.residual_floor < 1e-14);
}

TEST_CASE("H0 = 0 still solves") {
    FirmModel m;
    m.params = {DemandKind::MNL, 1.0, 1.0};
    m.h0 = 0.0;
    m.firm_types = {{"A", 1.0}, {"B", 2.0}};
    const Equilibrium eq = solve_equilibrium(m);
    REQUIRE(eq.diagnostics.converged);
    CHECK(eq.firm("A").share + eq.firm("B").share == Approx(1.0).epsilon(1e-12));
}

#include "hhimerge/calibration.hpp"
#include "hhimerge/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hhimerge;
using doctest::Approx;

namespace {

CalibrationInput input_of(std::vector<FirmShare> firms, DemandKind kind, double margin) {
    CalibrationInput in;
    in.firm_shares = ShareVector::with_residual_outside(std::move(firms), basis_for(kind));
    in.margin_firm = in.firm_shares.firms().front().firm;
    in.margin = margin;
    return in;
}

std::vector<FirmShare> dirichlet(std::mt19937_64& rng, int k) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> x(static_cast<std::size_t>(k) + 1);
    double total = 0.0;
    for (auto& v : x) total += (v = e(rng));
    std::vector<FirmShare> out;
    for (int i = 0; i < k; ++i) out.push_back({"f" + std::to_string(i + 1), x[static_cast<std::size_t>(i)] / total});
    return out;
}

}  // namespace

TEST_CASE("calibrate_mnl: frozen values") {
    SUBCASE("single firm") {
        const auto cal = calibrate_mnl(input_of({{"A", 0.5}}, DemandKind::MNL, 0.5));
        CHECK(cal.h == Approx(2.0).epsilon(1e-14));
        CHECK(cal.firm("A").mu == Approx(2.0).epsilon(1e-14));
        CHECK(cal.firm("A").type == Approx(2.0 * 0.5 * std::exp(2.0)).epsilon(1e-14));
        CHECK(cal.firm("A").type == Approx(7.389056).epsilon(1e-7));
        CHECK(cal.model.params.price_response == Approx(4.0).epsilon(1e-14));
        CHECK(cal.model.v0() == Approx(1.0));
        CHECK(cal.firm("A").implied_cost == Approx(0.5));
    }
    SUBCASE("two symmetric firms") {
        const auto cal = calibrate_mnl(input_of({{"A", 0.25}, {"B", 0.25}}, DemandKind::MNL, 0.4));
        CHECK(cal.h == Approx(2.0));
        CHECK(cal.firm("A").mu == Approx(4.0 / 3.0));
        CHECK(cal.firm("B").mu == Approx(4.0 / 3.0));
        CHECK(cal.firm("A").type == Approx(cal.firm("B").type));
    }
    SUBCASE("vanishing shares") {
        const auto cal = calibrate_mnl(input_of({{"A", 1e-9}, {"B", 1e-9}}, DemandKind::MNL, 0.4));
        CHECK(cal.h == Approx(1.0).epsilon(1e-8));
        CHECK(cal.firm("B").mu == Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("calibrate_ces: frozen values") {
    const auto cal = calibrate_ces(input_of({{"A", 0.5}}, DemandKind::CES, 0.5));
    CHECK(cal.model.params.price_response == Approx(3.0).epsilon(1e-14));
    CHECK(cal.firm("A").mu == Approx(1.5).epsilon(1e-14));
    CHECK(cal.h == Approx(2.0));
    CHECK(cal.firm("A").type == Approx(4.0).epsilon(1e-13));
    CHECK(cal.model.v0() == Approx(1.0));

    // Margin near one pushes sigma to its boundary.
    const auto edge = calibrate_ces(input_of({{"A", 0.2}}, DemandKind::CES, 1.0 - 1e-9));
    CHECK(edge.model.params.price_response == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("calibration errors") {
    CHECK_THROWS_AS(calibrate_mnl(input_of({{"A", 0.5}}, DemandKind::MNL, 0.0)), ValidationError);
    CHECK_THROWS_AS(calibrate_mnl(input_of({{"A", 0.5}}, DemandKind::MNL, 1.0)), ValidationError);
    CHECK_THROWS_AS(calibrate_mnl(input_of({{"A", 0.5}, {"B", 0.5}}, DemandKind::MNL, 0.5)), ValidationError);
    CHECK_THROWS_AS(calibrate_ces(input_of({{"A", 0.5}}, DemandKind::MNL, 0.5)), ValidationError);
    auto in = input_of({{"A", 0.5}}, DemandKind::MNL, 0.5);
    in.margin_firm = "Z";
    CHECK_THROWS_AS(calibrate_mnl(in), ValidationError);
    in = input_of({{"A", 0.5}}, DemandKind::MNL, 0.5);
    in.prices_normalized = false;
    CHECK_THROWS_AS(calibrate_mnl(in), ValidationError);
}

TEST_CASE("calibration round-trip through the forward solver") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> m(0.3, 0.6);
    for (auto kind : {DemandKind::MNL, DemandKind::CES}) {
        for (int trial = 0; trial < 200; ++trial) {
            const auto in = input_of(dirichlet(rng, 2 + trial % 6), kind, m(rng));
            const auto cal = calibrate(kind, in);
            const Equilibrium eq = solve_equilibrium(cal.model);
            REQUIRE(eq.diagnostics.converged);
            CHECK(eq.h == Approx(cal.h).epsilon(1e-8));
            CHECK(eq.outside_share == Approx(in.firm_shares.outside()).epsilon(1e-8));
            for (const auto& f : in.firm_shares.firms()) {
                CHECK(std::abs(eq.firm(f.firm).share - f.share) < 1e-8);
                CHECK(eq.firm(f.firm).mu == Approx(cal.firm(f.firm).mu).epsilon(1e-8));
            }
            // The margin firm's relative margin comes back at unit prices.
            const auto upp_in = implied_upp_inputs(cal);
            for (const auto& fm : upp_in.margins)
                if (fm.firm == in.margin_firm) CHECK(fm.margin == Approx(in.margin).epsilon(1e-8));
        }
    }
}

TEST_CASE("calibration is scale-free") {
    for (auto kind : {DemandKind::MNL, DemandKind::CES}) {
        auto in = input_of({{"A", 0.3}, {"B", 0.2}, {"C", 0.1}}, kind, 0.45);
        const auto a = calibrate(kind, in);
        in.scale = 250.0;
        const auto b = calibrate(kind, in);
        const Equilibrium ea = solve_equilibrium(a.model);
        const Equilibrium eb = solve_equilibrium(b.model);
        CHECK(ea.h == Approx(eb.h).epsilon(1e-12));
        for (const auto& f : ea.firms) {
            CHECK(f.mu == Approx(eb.firm(f.firm).mu).epsilon(1e-12));
            CHECK(f.share == Approx(eb.firm(f.firm).share).epsilon(1e-12));
            CHECK(eb.firm(f.firm).profit / f.profit == Approx(eb.v0 / ea.v0).epsilon(1e-12));
        }
        CHECK(eb.cs / ea.cs == Approx(eb.v0 / ea.v0).epsilon(1e-12));
    }
}

TEST_CASE("MNL alpha increases in the margin firm's share") {
    double prev = 0.0;
    for (int i = 1; i <= 80; ++i) {
        const double s1 = i / 100.0;
        const auto cal = calibrate_mnl(input_of({{"A", s1}, {"B", 0.1}}, DemandKind::MNL, 0.5));
        CHECK(cal.model.params.price_response > prev);
        prev = cal.model.params.price_response;
    }
}

TEST_CASE("implied_upp_inputs") {
    const auto mnl = calibrate_mnl(input_of({{"A", 0.5}, {"Z", 0.0}}, DemandKind::MNL, 0.5));
    const auto in = implied_upp_inputs(mnl);
    CHECK(in.margins[0].margin == Approx(0.5));
    CHECK(in.margins[1].margin == Approx(0.25));  // 1/alpha

    const auto ces = calibrate_ces(input_of({{"A", 0.5}}, DemandKind::CES, 0.5));
    CHECK(implied_upp_inputs(ces).margins[0].margin == Approx(0.5));
}

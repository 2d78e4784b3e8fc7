#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hhimerge/calibration.hpp"
#include "hhimerge/equilibrium.hpp"
#include "hhimerge/errors.hpp"
#include "hhimerge/first_order.hpp"
#include "hhimerge/json_io.hpp"
#include "hhimerge/montecarlo.hpp"

#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace py = pybind11;
using namespace hhimerge;

namespace {

// Documents go through JSON so Python sees the same fields as the CLI.
py::object to_py(const io::Json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

// Keeps the caller's dict order.
std::vector<FirmShare> firm_shares(const py::dict& d) {
    std::vector<FirmShare> out;
    for (auto item : d) out.push_back({py::cast<std::string>(item.first), py::cast<double>(item.second)});
    return out;
}

ShareVector share_vector(const py::dict& d, std::optional<double> outside, DemandKind kind) {
    if (outside) return ShareVector(firm_shares(d), *outside, basis_for(kind));
    return ShareVector::with_residual_outside(firm_shares(d), basis_for(kind));
}

FirmModel firm_model_of(const py::dict& types, const std::string& demand, double price_response, double scale,
                        double h0) {
    FirmModel m;
    m.params = {parse_demand_kind(demand), price_response, scale};
    m.h0 = h0;
    for (const auto& f : firm_shares(types)) m.firm_types.push_back({f.firm, f.share});
    m.validate();
    return m;
}

Equilibrium solved(const FirmModel& m) {
    Equilibrium eq = solve_equilibrium(m);
    if (!eq.diagnostics.converged)
        throw SolverError("equilibrium did not converge", eq.diagnostics.residual, eq.diagnostics.iterations);
    return eq;
}

ProductShareVector product_vector(const std::optional<std::vector<std::tuple<std::string, std::string, double>>>& p,
                                  const ShareVector& shares) {
    if (!p) return ProductShareVector::single_product(shares);
    std::vector<ProductShare> out;
    for (const auto& [id, firm, s] : *p) out.push_back({id, firm, s});
    return ProductShareVector(std::move(out));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Merger simulation and HHI-based first-order approximations";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def(
        "hhi",
        [](const py::dict& shares, std::optional<double> outside) {
            return hhi(share_vector(shares, outside, DemandKind::MNL));
        },
        py::arg("shares"), py::arg("outside") = py::none());
    m.def("delta_hhi", &delta_hhi, py::arg("share_a"), py::arg("share_b"));
    m.def(
        "equilibrium_margin",
        [](double s, const std::string& demand, double price_response) {
            return equilibrium_margin(s, {parse_demand_kind(demand), price_response, 1.0});
        },
        py::arg("share"), py::arg("demand"), py::arg("price_response"));
    m.def(
        "rho1",
        [](double sa, double sb, const std::string& demand, double price_response) {
            return rho1(sa, sb, {parse_demand_kind(demand), price_response, 1.0});
        },
        py::arg("share_a"), py::arg("share_b"), py::arg("demand") = "mnl", py::arg("price_response") = 1.0);
    m.def(
        "rho1_bounds",
        [](double c0, double delta0) {
            const Rho1Bounds b = rho1_bounds(c0, delta0);
            py::dict d;
            d["lower"] = b.lower;
            d["upper"] = b.upper;
            d["argmin"] = py::make_tuple(b.argmin.share_a, b.argmin.share_b);
            d["argmax"] = py::make_tuple(b.argmax.share_a, b.argmax.share_b);
            return d;
        },
        py::arg("c0"), py::arg("delta0"));

    m.def(
        "calibrate",
        [](const py::dict& shares, const std::string& margin_firm, double margin, const std::string& demand,
           std::optional<double> outside, std::optional<double> scale) {
            const DemandKind kind = parse_demand_kind(demand);
            CalibrationInput in;
            in.firm_shares = share_vector(shares, outside, kind);
            in.margin_firm = margin_firm;
            in.margin = margin;
            in.scale = scale;
            return to_py(io::to_json(calibrate(kind, in)));
        },
        py::arg("shares"), py::arg("margin_firm"), py::arg("margin"), py::arg("demand") = "mnl",
        py::arg("outside") = py::none(), py::arg("scale") = py::none());

    m.def(
        "solve",
        [](const py::dict& types, const std::string& demand, double price_response, double scale, double h0) {
            return to_py(io::to_json(solved(firm_model_of(types, demand, price_response, scale, h0))));
        },
        py::arg("firm_types"), py::arg("demand"), py::arg("price_response"), py::arg("scale") = 1.0,
        py::arg("h0") = 1.0);

    m.def(
        "merge",
        [](const py::dict& types, const std::string& firm_a, const std::string& firm_b, const std::string& demand,
           double price_response, double scale, double h0) {
            const FirmModel model = firm_model_of(types, demand, price_response, scale, h0);
            const FirmModel post_model = post_merger_model(model, {firm_a, firm_b});
            const Equilibrium pre = solved(model);
            const Equilibrium post = solved(post_model);
            io::Json doc;
            doc["pre"] = io::to_json(pre);
            doc["post"] = io::to_json(post);
            doc["delta_cs"] = delta_cs_actual(pre, post);
            return to_py(doc);
        },
        py::arg("firm_types"), py::arg("firm_a"), py::arg("firm_b"), py::arg("demand"), py::arg("price_response"),
        py::arg("scale") = 1.0, py::arg("h0") = 1.0);

    m.def(
        "approx",
        [](const py::dict& shares, const std::string& firm_a, const std::string& firm_b, const std::string& demand,
           double price_response, double v0_value, std::optional<double> outside,
           std::optional<std::vector<std::tuple<std::string, std::string, double>>> products) {
            const DemandKind kind = parse_demand_kind(demand);
            const ShareVector s = share_vector(shares, outside, kind);
            const ApproxReport r =
                delta_cs_prop1(product_vector(products, s), s, {firm_a, firm_b}, {kind, price_response, 1.0}, v0_value);
            return to_py(io::to_json(r));
        },
        py::arg("shares"), py::arg("firm_a"), py::arg("firm_b"), py::arg("demand") = "mnl",
        py::arg("price_response") = 1.0, py::arg("v0") = 1.0, py::arg("outside") = py::none(),
        py::arg("products") = py::none());

    m.def(
        "upp",
        [](const py::dict& shares, const std::string& firm_a, const std::string& firm_b, const std::string& demand,
           double price_response, std::optional<double> outside) {
            const DemandKind kind = parse_demand_kind(demand);
            const ShareVector s = share_vector(shares, outside, kind);
            py::dict d;
            for (const auto& v : upp(ProductShareVector::single_product(s), s, {firm_a, firm_b},
                                     {kind, price_response, 1.0}))
                d[py::str(v.product)] = v.value;
            return d;
        },
        py::arg("shares"), py::arg("firm_a"), py::arg("firm_b"), py::arg("demand") = "mnl",
        py::arg("price_response") = 1.0, py::arg("outside") = py::none());

    m.def(
        "monte_carlo",
        [](const std::string& demand, int reps, std::uint64_t seed, int firms, double margin_lo, double margin_hi,
           double upp_scale, unsigned threads) {
            mc::McConfig c;
            c.demand = parse_demand_kind(demand);
            c.reps = reps;
            c.seed = seed;
            c.n_firms = firms;
            c.margin_lo = margin_lo;
            c.margin_hi = margin_hi;
            c.upp_scale = upp_scale;
            c.threads = threads;
            std::vector<mc::McRecord> records;
            {
                py::gil_scoped_release release;
                records = mc::run(c);
            }
            py::dict d;
            d["summary"] = to_py(io::to_json(mc::summarize(records, upp_scale)));
            d["records_csv"] = mc::records_csv(records, firms);
            return d;
        },
        py::arg("demand") = "mnl", py::arg("reps") = 2000, py::arg("seed") = 1, py::arg("firms") = 6,
        py::arg("margin_lo") = 0.3, py::arg("margin_hi") = 0.6, py::arg("upp_scale") = 1.0, py::arg("threads") = 0);
}

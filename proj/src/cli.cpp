#include "hhimerge/cli.hpp"

#include "hhimerge/calibration.hpp"
#include "hhimerge/equilibrium.hpp"
#include "hhimerge/errors.hpp"
#include "hhimerge/first_order.hpp"
#include "hhimerge/json_io.hpp"
#include "hhimerge/montecarlo.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace hhimerge::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

std::optional<fs::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

struct LoadedModel {
    FirmModel model;
    std::optional<CalibratedModel> calibrated;
    std::optional<Market> market;
};

LoadedModel load_model(const fs::path& path) {
    const Json doc = io::read_json_file(path);
    LoadedModel out;
    switch (io::classify_model(doc)) {
        case io::ModelDocument::Calibrated:
            out.calibrated = io::calibrated_model_from_json(doc);
            out.model = out.calibrated->model;
            break;
        case io::ModelDocument::FirmModel: out.model = io::firm_model_from_json(doc); break;
        case io::ModelDocument::Market:
            out.market = io::market_from_json(doc);
            out.model = firm_model(*out.market);
            break;
    }
    return out;
}

Equilibrium solve_or_throw(const FirmModel& model, const char* what) {
    Equilibrium eq = solve_equilibrium(model);
    if (!eq.diagnostics.converged)
        throw SolverError(std::string(what) + " equilibrium did not converge", eq.diagnostics.residual,
                          eq.diagnostics.iterations);
    return eq;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct CalibrateArgs {
    std::string input;
    std::string demand;
    std::string out;
};

void calibrate_cmd(const CalibrateArgs& a) {
    std::optional<DemandKind> kind;
    if (!a.demand.empty()) kind = parse_demand_kind(a.demand);
    const auto parsed = io::calibration_input_from_json(io::read_json_file(a.input), kind);
    io::emit(optional_path(a.out), io::to_json(calibrate(parsed.kind, parsed.input)));
}

struct ModelArgs {
    std::string model;
    std::string out;
};

void equilibrium_cmd(const ModelArgs& a) {
    const LoadedModel loaded = load_model(a.model);
    const Equilibrium eq = solve_or_throw(loaded.model, "the");
    Json doc = io::to_json(eq);
    if (loaded.market) {
        const auto prices = prices_from_equilibrium(*loaded.market, eq);
        Json p = Json::object();
        for (std::size_t i = 0; i < prices.size(); ++i) p[loaded.market->products[i].id] = prices[i];
        doc["prices"] = std::move(p);
    }
    io::emit(optional_path(a.out), doc);
}

struct MergerArgs {
    std::string model;
    std::string firm_a;
    std::string firm_b;
    std::string products;
    std::string out;
};

void merge_cmd(const MergerArgs& a) {
    const LoadedModel loaded = load_model(a.model);
    const MergerSpec merger{a.firm_a, a.firm_b};
    const FirmModel post_model = post_merger_model(loaded.model, merger);
    const Equilibrium pre = solve_or_throw(loaded.model, "pre-merger");
    const Equilibrium post = solve_or_throw(post_model, "post-merger");
    Json doc;
    doc["merger"] = {{"firm_a", merger.firm_a}, {"firm_b", merger.firm_b}, {"merged_id", merger.merged_id()}};
    doc["pre"] = io::to_json(pre);
    doc["post"] = io::to_json(post);
    doc["delta_cs"] = delta_cs_actual(pre, post);
    io::emit(optional_path(a.out), doc);
}

void approx_cmd(const MergerArgs& a) {
    const LoadedModel loaded = load_model(a.model);
    const MergerSpec merger{a.firm_a, a.firm_b};
    merger.validate();
    ShareVector shares;
    if (loaded.calibrated)
        shares = loaded.calibrated->shares();
    else
        shares = solve_or_throw(loaded.model, "pre-merger").shares();
    const ProductShareVector products = a.products.empty()
                                            ? ProductShareVector::single_product(shares)
                                            : io::product_shares_from_json(io::read_json_file(a.products));
    const ApproxReport report = delta_cs_prop1(products, shares, merger, loaded.model.params, loaded.model.v0());
    io::emit(optional_path(a.out), io::to_json(report));
}

struct McArgs {
    std::string demand = "mnl";
    int reps = 2000;
    std::uint64_t seed = 1;
    int firms = 6;
    double margin_lo = 0.3;
    double margin_hi = 0.6;
    double upp_scale = 1.0;
    unsigned threads = 0;
    std::string out = "mc_out";
    bool svg = true;
};

void mc_cmd(const McArgs& a) {
    mc::McConfig config;
    config.demand = parse_demand_kind(a.demand);
    config.reps = a.reps;
    config.seed = a.seed;
    config.n_firms = a.firms;
    config.margin_lo = a.margin_lo;
    config.margin_hi = a.margin_hi;
    config.upp_scale = a.upp_scale;
    config.threads = a.threads;
    config.validate();

    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const auto records = mc::run(config);
    mc::write_records_csv(records, config.n_firms, dir / "records.csv");
    const mc::McSummary summary = mc::summarize(records, config.upp_scale);
    Json doc;
    doc["config"] = {{"demand", std::string(to_string(config.demand))},
                     {"reps", config.reps},
                     {"seed", config.seed},
                     {"firms", config.n_firms},
                     {"margin_lo", config.margin_lo},
                     {"margin_hi", config.margin_hi},
                     {"upp_scale", config.upp_scale}};
    doc["summary"] = io::to_json(summary);
    io::write_text(dir / "summary.json", doc.dump(2) + "\n");
    for (auto which : {mc::Figure::UppScatter, mc::Figure::CsScatterProp1, mc::Figure::CsScatterNs}) {
        const std::string stem(mc::to_string(which));
        std::optional<fs::path> svg;
        if (a.svg) svg = dir / (stem + ".svg");
        mc::emit_figure_data(records, which, dir / (stem + ".csv"), config.upp_scale, svg);
    }
    if (summary.discard_warning)
        std::cerr << "warning: " << summary.n_total - summary.n_converged << " of " << summary.n_total
                  << " replicates failed to converge\n";
}

struct RhoArgs {
    double c0 = 0.9;
    int points = 100;
    std::string out;
};

void rho_bounds_cmd(const RhoArgs& a) {
    if (a.points < 1) throw ValidationError("--points must be positive");
    const double delta_max = a.c0 * a.c0 / 2.0;
    std::ostringstream csv;
    csv << "delta0,lower,upper\n";
    for (int i = 1; i <= a.points; ++i) {
        const double delta0 = delta_max * i / a.points;
        const Rho1Bounds b = rho1_bounds(a.c0, delta0);
        csv << fmt17(delta0) << ',' << fmt17(b.lower) << ',' << fmt17(b.upper) << '\n';
    }
    if (a.out.empty())
        std::cout << csv.str();
    else
        io::write_text(a.out, csv.str());
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Merger harm from HHI changes: equilibrium, calibration and first-order approximations"};
    app.require_subcommand(1);

    CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate", "Calibrate demand and firm types from shares and one margin");
    c->add_option("--input", cal.input, "Calibration input JSON")->required();
    c->add_option("--demand", cal.demand, "Override the demand kind in the input (mnl|ces)");
    c->add_option("--out", cal.out, "Output path for the calibrated model JSON (default: stdout)");

    ModelArgs eqa;
    auto* e = app.add_subcommand("equilibrium", "Solve the Bertrand equilibrium of a model");
    e->add_option("--model", eqa.model, "Market, firm model or calibrated model JSON")->required();
    e->add_option("--out", eqa.out, "Output path (default: stdout)");

    MergerArgs mg;
    auto* m = app.add_subcommand("merge", "Simulate a merger and report the change in consumer surplus");
    m->add_option("--model", mg.model, "Market, firm model or calibrated model JSON")->required();
    m->add_option("--firm-a", mg.firm_a, "First merging firm")->required();
    m->add_option("--firm-b", mg.firm_b, "Second merging firm")->required();
    m->add_option("--out", mg.out, "Output path (default: stdout)");

    MergerArgs ap;
    auto* x = app.add_subcommand("approx", "First-order approximations of merger harm");
    x->add_option("--model", ap.model, "Market, firm model or calibrated model JSON")->required();
    x->add_option("--firm-a", ap.firm_a, "First merging firm")->required();
    x->add_option("--firm-b", ap.firm_b, "Second merging firm")->required();
    x->add_option("--products", ap.products, "Product shares JSON [{id, firm, share}] for multiproduct firms");
    x->add_option("--out", ap.out, "Output path (default: stdout)");

    McArgs mca;
    auto* s = app.add_subcommand("mc", "Monte Carlo accuracy experiment");
    s->add_option("--demand", mca.demand, "mnl or ces")->capture_default_str();
    s->add_option("--reps", mca.reps, "Number of replicates")->capture_default_str();
    s->add_option("--seed", mca.seed, "Base random seed")->capture_default_str();
    s->add_option("--firms", mca.firms, "Number of single-product firms")->capture_default_str();
    s->add_option("--margin-lo", mca.margin_lo, "Lower bound of firm 1's margin draw")->capture_default_str();
    s->add_option("--margin-hi", mca.margin_hi, "Upper bound of firm 1's margin draw")->capture_default_str();
    s->add_option("--upp-scale", mca.upp_scale, "Multiplier on UPP in scaled statistics and figures")
        ->capture_default_str();
    s->add_option("--threads", mca.threads, "Worker threads (0 = all cores)")->capture_default_str();
    s->add_option("--out", mca.out, "Output directory")->capture_default_str();
    s->add_flag("!--no-svg", mca.svg, "Skip SVG scatter plots");

    RhoArgs rb;
    auto* r = app.add_subcommand("rho-bounds", "CSV of rho1 bounds over delta0 for fixed c0 (MNL)");
    r->add_option("--c0", rb.c0, "Cap on the merging firms' combined share")->capture_default_str();
    r->add_option("--points", rb.points, "Number of delta0 grid points")->capture_default_str();
    r->add_option("--out", rb.out, "Output CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kExitValidation;
    }

    try {
        if (c->parsed()) calibrate_cmd(cal);
        if (e->parsed()) equilibrium_cmd(eqa);
        if (m->parsed()) merge_cmd(mg);
        if (x->parsed()) approx_cmd(ap);
        if (s->parsed()) mc_cmd(mca);
        if (r->parsed()) rho_bounds_cmd(rb);
    } catch (const IoError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitIo;
    } catch (const SolverError& ex) {
        std::cerr << "error: " << ex.what() << " (residual " << ex.residual() << ")\n";
        return kExitSolver;
    } catch (const ValidationError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return kExitOk;
}

}  // namespace hhimerge::cli

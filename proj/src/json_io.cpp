#include "hhimerge/json_io.hpp"

#include "hhimerge/errors.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace hhimerge::io {

namespace {

template <class T>
T require(const Json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
T optional_field(const Json& doc, const char* key, T fallback) {
    if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
    return require<T>(doc, key);
}

DemandParams params_from_json(const Json& doc) {
    DemandParams p;
    p.kind = parse_demand_kind(require<std::string>(doc, "demand"));
    p.price_response = require<double>(doc, "price_response");
    p.scale = require<double>(doc, "scale");
    p.validate();
    return p;
}

void put_params(Json& doc, const DemandParams& p, double h0) {
    doc["demand"] = std::string(to_string(p.kind));
    doc["price_response"] = p.price_response;
    doc["scale"] = p.scale;
    doc["h0"] = h0;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void emit(const std::optional<std::filesystem::path>& path, const Json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (path && !path->empty())
        write_text(*path, text);
    else
        std::cout << text;
}

Json to_json(const Market& market) {
    Json doc;
    put_params(doc, market.params, market.h0);
    Json products = Json::array();
    for (const auto& p : market.products)
        products.push_back({{"id", p.id}, {"firm", p.firm}, {"v", p.quality}, {"c", p.cost}});
    doc["products"] = std::move(products);
    return doc;
}

Market market_from_json(const Json& doc) {
    Market m;
    m.params = params_from_json(doc);
    m.h0 = optional_field<double>(doc, "h0", 1.0);
    const Json products = require<Json>(doc, "products");
    if (!products.is_array()) throw ValidationError("'products' must be an array");
    for (const auto& p : products)
        m.products.push_back({require<std::string>(p, "id"), require<std::string>(p, "firm"),
                              require<double>(p, "v"), require<double>(p, "c")});
    m.validate();
    return m;
}

Json to_json(const FirmModel& model) {
    Json doc;
    put_params(doc, model.params, model.h0);
    doc["v0"] = model.v0();
    Json types = Json::object();
    for (const auto& f : model.firm_types) types[f.firm] = f.type;
    doc["firm_types"] = std::move(types);
    return doc;
}

FirmModel firm_model_from_json(const Json& doc) {
    FirmModel m;
    m.params = params_from_json(doc);
    m.h0 = optional_field<double>(doc, "h0", 1.0);
    const Json types = require<Json>(doc, "firm_types");
    if (!types.is_object()) throw ValidationError("'firm_types' must be an object");
    for (const auto& [firm, t] : types.items()) {
        if (!t.is_number()) throw ValidationError("type of firm '" + firm + "' must be a number");
        m.firm_types.push_back({firm, t.get<double>()});
    }
    m.validate();
    return m;
}

Json to_json(const CalibratedModel& cal) {
    Json doc;
    put_params(doc, cal.model.params, cal.model.h0);
    doc["v0"] = cal.model.v0();
    doc["h"] = cal.h;
    doc["outside_share"] = cal.outside_share;
    doc["margin_firm"] = cal.margin_firm;
    doc["margin"] = cal.margin;
    Json firms = Json::array();
    for (const auto& f : cal.firms)
        firms.push_back({{"id", f.firm},
                         {"share", f.share},
                         {"mu", f.mu},
                         {"type", f.type},
                         {"implied_cost", f.implied_cost}});
    doc["firms"] = std::move(firms);
    return doc;
}

CalibratedModel calibrated_model_from_json(const Json& doc) {
    CalibratedModel cal;
    cal.model.params = params_from_json(doc);
    cal.model.h0 = optional_field<double>(doc, "h0", 1.0);
    cal.h = require<double>(doc, "h");
    cal.outside_share = require<double>(doc, "outside_share");
    cal.margin_firm = require<std::string>(doc, "margin_firm");
    cal.margin = require<double>(doc, "margin");
    const Json firms = require<Json>(doc, "firms");
    if (!firms.is_array()) throw ValidationError("'firms' must be an array");
    for (const auto& f : firms) {
        FirmCalibration fc;
        fc.firm = require<std::string>(f, "id");
        fc.share = require<double>(f, "share");
        fc.mu = require<double>(f, "mu");
        fc.type = require<double>(f, "type");
        fc.implied_cost = require<double>(f, "implied_cost");
        cal.firms.push_back(fc);
        cal.model.firm_types.push_back({fc.firm, fc.type});
    }
    cal.model.validate();
    (void)cal.shares();  // adding-up check
    return cal;
}

ParsedCalibrationInput calibration_input_from_json(const Json& doc, std::optional<DemandKind> kind_override) {
    ParsedCalibrationInput out;
    if (kind_override)
        out.kind = *kind_override;
    else
        out.kind = parse_demand_kind(require<std::string>(doc, "demand"));

    const Json shares = require<Json>(doc, "shares");
    if (!shares.is_object()) throw ValidationError("'shares' must be an object of firm -> share");
    std::vector<FirmShare> firms;
    for (const auto& [firm, s] : shares.items()) {
        if (!s.is_number()) throw ValidationError("share of firm '" + firm + "' must be a number");
        firms.push_back({firm, s.get<double>()});
    }
    const ShareBasis basis = basis_for(out.kind);
    if (doc.contains("outside"))
        out.input.firm_shares = ShareVector(std::move(firms), require<double>(doc, "outside"), basis);
    else
        out.input.firm_shares = ShareVector::with_residual_outside(std::move(firms), basis);
    out.input.margin_firm = require<std::string>(doc, "margin_firm");
    out.input.margin = require<double>(doc, "margin");
    if (doc.contains("scale")) out.input.scale = require<double>(doc, "scale");
    out.input.validate();
    return out;
}

Json to_json(const Equilibrium& eq) {
    Json doc;
    doc["demand"] = std::string(to_string(eq.kind));
    doc["h"] = eq.h;
    doc["h0"] = eq.h0;
    doc["v0"] = eq.v0;
    doc["outside_share"] = eq.outside_share;
    doc["cs"] = eq.cs;
    Json firms = Json::array();
    for (const auto& f : eq.firms)
        firms.push_back({{"id", f.firm}, {"type", f.type}, {"mu", f.mu}, {"share", f.share}, {"profit", f.profit}});
    doc["firms"] = std::move(firms);
    doc["diagnostics"] = {{"iterations", eq.diagnostics.iterations},
                          {"residual", eq.diagnostics.residual},
                          {"residual_floor", eq.diagnostics.residual_floor},
                          {"converged", eq.diagnostics.converged}};
    return doc;
}

Json to_json(const ApproxReport& report) {
    Json doc;
    doc["demand"] = std::string(to_string(report.kind));
    doc["share_basis"] = report.kind == DemandKind::MNL ? "quantity" : "revenue";
    doc["delta_hhi"] = report.delta_hhi;
    doc["v0"] = report.v0;
    doc["rho1"] = report.rho1;
    doc["rho2"] = report.rho2;
    doc["dcs_prop1"] = report.dcs_prop1;
    doc["dcs_ns"] = report.dcs_ns;
    doc["dcs_corollary"] = report.dcs_corollary;
    doc["price_basis"] = "unit pre-merger prices";
    Json upp = Json::object();
    for (const auto& v : report.upp) upp[v.product] = v.value;
    Json guppi = Json::object();
    for (const auto& v : report.guppi) guppi[v.product] = v.value;
    doc["upp"] = std::move(upp);
    doc["guppi"] = std::move(guppi);
    return doc;
}

Json to_json(const mc::McSummary& s) {
    Json doc;
    doc["n_total"] = s.n_total;
    doc["n_converged"] = s.n_converged;
    doc["discard_rate"] = s.discard_rate;
    doc["discard_warning"] = s.discard_warning;
    doc["mae_prop1"] = s.mae_prop1;
    doc["mae_prop1_scaled"] = s.mae_prop1_scaled;
    doc["mae_ns"] = s.mae_ns;
    doc["bias_prop1"] = s.bias_prop1;
    doc["bias_ns"] = s.bias_ns;
    doc["mean_abs_actual"] = s.mean_abs_actual;
    doc["mean_abs_prop1"] = s.mean_abs_prop1;
    doc["mean_abs_ns"] = s.mean_abs_ns;
    doc["upp_scale"] = s.upp_scale;
    doc["mae_upp"] = s.mae_upp;
    doc["mae_upp_unscaled"] = s.mae_upp_unscaled;
    doc["median_ratio_dp_over_upp"] = s.median_ratio_dp_over_upp;
    return doc;
}

ProductShareVector product_shares_from_json(const Json& doc) {
    if (!doc.is_array()) throw ValidationError("product shares must be an array");
    std::vector<ProductShare> products;
    for (const auto& p : doc)
        products.push_back({require<std::string>(p, "id"), require<std::string>(p, "firm"),
                            require<double>(p, "share")});
    return ProductShareVector(std::move(products));
}

ModelDocument classify_model(const Json& doc) {
    if (!doc.is_object()) throw ValidationError("model document must be a JSON object");
    if (doc.contains("firms") && doc.contains("margin_firm")) return ModelDocument::Calibrated;
    if (doc.contains("firm_types")) return ModelDocument::FirmModel;
    if (doc.contains("products")) return ModelDocument::Market;
    throw ValidationError("unrecognized model document (expected a market, firm model or calibrated model)");
}

}  // namespace hhimerge::io

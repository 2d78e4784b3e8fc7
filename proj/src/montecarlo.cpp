#include "hhimerge/montecarlo.hpp"

#include "hhimerge/calibration.hpp"
#include "hhimerge/equilibrium.hpp"
#include "hhimerge/errors.hpp"
#include "hhimerge/first_order.hpp"
#include "hhimerge/svg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace hhimerge::mc {

void McConfig::validate() const {
    if (n_firms < 2) throw ValidationError("need at least two firms to merge");
    if (reps < 1) throw ValidationError("reps must be at least one");
    if (!(margin_lo > 0.0 && margin_lo < margin_hi && margin_hi < 1.0))
        throw ValidationError("margin range must satisfy 0 < lo < hi < 1");
    if (!(upp_scale >= 0.0) || !std::isfinite(upp_scale)) throw ValidationError("upp_scale must be non-negative");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// mt19937_64 output is fixed by the standard; the distributions below are
// written out so draws are identical across standard libraries.
class ReplicateRng {
public:
    ReplicateRng(std::uint64_t seed, std::uint64_t stream)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

    // Uniform on (0, 1).
    double uniform_open() {
        for (;;) {
            const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double unit_exponential() { return -std::log(uniform_open()); }

private:
    std::mt19937_64 engine_;
};

std::vector<double> dirichlet_from(ReplicateRng& rng, int n) {
    std::vector<double> draws(static_cast<std::size_t>(n));
    double total = 0.0;
    for (auto& d : draws) {
        d = rng.unit_exponential();
        total += d;
    }
    for (auto& d : draws) d /= total;
    return draws;
}

FirmId firm_name(int index) { return std::to_string(index + 1); }

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::vector<double> draw_flat_dirichlet(std::uint64_t seed, std::uint64_t stream, int n) {
    if (n < 1) throw ValidationError("Dirichlet dimension must be positive");
    ReplicateRng rng(seed, stream);
    return dirichlet_from(rng, n);
}

McRecord simulate_replicate(int replicate, std::vector<double> shares, double margin, DemandKind demand) {
    McRecord rec;
    rec.replicate = replicate;
    rec.margin = margin;
    if (shares.size() < 3) throw ValidationError("need at least two firms and an outside share");

    const std::size_t k = shares.size() - 1;
    std::vector<FirmShare> firms;
    double inside = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        firms.push_back({firm_name(static_cast<int>(i)), shares[i]});
        inside += shares[i];
    }
    // Re-derive the outside share so adding-up holds exactly.
    shares.back() = std::max(0.0, 1.0 - inside);
    rec.shares = shares;

    try {
        CalibrationInput input;
        input.firm_shares = ShareVector(std::move(firms), shares.back(), basis_for(demand));
        input.margin_firm = firm_name(0);
        input.margin = margin;
        const CalibratedModel cal = calibrate(demand, input);
        rec.price_response = cal.model.params.price_response;

        const Equilibrium pre = solve_equilibrium(cal.model);
        if (!pre.diagnostics.converged) return rec;
        double gap = std::abs(pre.outside_share - cal.outside_share);
        for (const auto& f : pre.firms) gap = std::max(gap, std::abs(f.share - cal.firm(f.firm).share));
        rec.roundtrip_error = gap;

        const MergerSpec merger{firm_name(0), firm_name(1)};
        const ShareVector calibrated_shares = cal.shares();
        const auto products = ProductShareVector::single_product(calibrated_shares);
        const ApproxReport report =
            delta_cs_prop1(products, calibrated_shares, merger, cal.model.params, cal.model.v0());

        const Equilibrium post = solve_equilibrium(post_merger_model(cal.model, merger));
        if (!post.diagnostics.converged) return rec;

        const double merged_mu = post.firm(merger.merged_id()).mu;
        const double sigma = cal.model.params.price_response;
        for (int i = 0; i < 2; ++i) {
            const double pre_mu = pre.firm(firm_name(i)).mu;
            if (demand == DemandKind::MNL) {
                rec.dp[i] = (merged_mu - pre_mu) / cal.model.params.price_response;
            } else {
                // Unit pre-merger price pins the cost at 1 - mu/sigma.
                const double cost = 1.0 - pre_mu / sigma;
                rec.dp[i] = cost / (1.0 - merged_mu / sigma) - 1.0;
            }
            rec.upp[i] = report.upp[static_cast<std::size_t>(i)].value;
        }
        rec.dcs_actual = delta_cs_actual(pre, post);
        rec.dcs_prop1 = report.dcs_prop1;
        rec.dcs_ns = report.dcs_ns;
        rec.converged = true;
    } catch (const std::exception&) {
        rec.converged = false;
    }
    return rec;
}

std::vector<McRecord> run(const McConfig& config) {
    config.validate();
    const int reps = config.reps;
    std::vector<McRecord> out(static_cast<std::size_t>(reps));

    auto work = [&](int r) {
        ReplicateRng rng(config.seed, static_cast<std::uint64_t>(r));
        std::vector<double> shares = dirichlet_from(rng, config.n_firms + 1);
        const double margin = config.margin_lo + (config.margin_hi - config.margin_lo) * rng.uniform_open();
        out[static_cast<std::size_t>(r)] = simulate_replicate(r, std::move(shares), margin, config.demand);
    };

    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));
    if (threads <= 1) {
        for (int r = 0; r < reps; ++r) work(r);
        return out;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int r = next++; r < reps; r = next++) work(r);
        });
    for (auto& th : pool) th.join();
    return out;
}

McSummary summarize(const std::vector<McRecord>& records, double upp_scale) {
    McSummary s;
    s.upp_scale = upp_scale;
    s.n_total = static_cast<int>(records.size());
    std::vector<double> ratios;
    int n_products = 0;
    for (const auto& r : records) {
        if (!r.converged) continue;
        ++s.n_converged;
        s.mae_prop1 += std::abs(r.dcs_prop1 - r.dcs_actual);
        s.mae_prop1_scaled += std::abs(upp_scale * r.dcs_prop1 - r.dcs_actual);
        s.mae_ns += std::abs(r.dcs_ns - r.dcs_actual);
        s.bias_prop1 += r.dcs_prop1 - r.dcs_actual;
        s.bias_ns += r.dcs_ns - r.dcs_actual;
        s.mean_abs_actual += std::abs(r.dcs_actual);
        s.mean_abs_prop1 += std::abs(r.dcs_prop1);
        s.mean_abs_ns += std::abs(r.dcs_ns);
        for (int i = 0; i < 2; ++i) {
            ++n_products;
            s.mae_upp += std::abs(r.dp[i] - upp_scale * r.upp[i]);
            s.mae_upp_unscaled += std::abs(r.dp[i] - r.upp[i]);
            if (r.upp[i] > 0.0) ratios.push_back(r.dp[i] / r.upp[i]);
        }
    }
    if (s.n_converged == 0) throw ValidationError("no converged replicates to summarize");

    const double n = s.n_converged;
    s.mae_prop1 /= n;
    s.mae_prop1_scaled /= n;
    s.mae_ns /= n;
    s.bias_prop1 /= n;
    s.bias_ns /= n;
    s.mean_abs_actual /= n;
    s.mean_abs_prop1 /= n;
    s.mean_abs_ns /= n;
    s.mae_upp /= n_products;
    s.mae_upp_unscaled /= n_products;
    s.discard_rate = 1.0 - n / s.n_total;
    s.discard_warning = s.discard_rate > kDiscardWarningRate;

    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        const std::size_t m = ratios.size();
        s.median_ratio_dp_over_upp = m % 2 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
    }
    return s;
}

std::string_view to_string(Figure which) {
    switch (which) {
        case Figure::UppScatter: return "upp_scatter";
        case Figure::CsScatterProp1: return "cs_scatter_prop1";
        case Figure::CsScatterNs: return "cs_scatter_ns";
    }
    return "unknown";
}

std::vector<ScatterPoint> figure_points(const std::vector<McRecord>& records, Figure which, double upp_scale) {
    std::vector<ScatterPoint> pts;
    for (const auto& r : records) {
        if (!r.converged) continue;
        switch (which) {
            case Figure::UppScatter:
                for (int i = 0; i < 2; ++i) pts.push_back({upp_scale * r.upp[i], r.dp[i]});
                break;
            case Figure::CsScatterProp1: pts.push_back({upp_scale * r.dcs_prop1, r.dcs_actual}); break;
            case Figure::CsScatterNs: pts.push_back({r.dcs_ns, r.dcs_actual}); break;
        }
    }
    return pts;
}

void emit_figure_data(const std::vector<McRecord>& records, Figure which, const std::filesystem::path& csv_path,
                      double upp_scale, std::optional<std::filesystem::path> svg_path) {
    const auto pts = figure_points(records, which, upp_scale);
    std::ostringstream csv;
    csv << "predicted,actual\n";
    for (const auto& p : pts) csv << fmt17(p.predicted) << ',' << fmt17(p.actual) << '\n';
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw IoError("cannot open " + csv_path.string() + " for writing");
    f << csv.str();
    if (!f) throw IoError("failed writing " + csv_path.string());

    if (svg_path) {
        std::vector<svg::Point> xy;
        xy.reserve(pts.size());
        for (const auto& p : pts) xy.push_back({p.predicted, p.actual});
        const bool price = which == Figure::UppScatter;
        const std::string svg_text = svg::scatter_with_diagonal(
            xy, std::string(to_string(which)), price ? "predicted price change" : "predicted change in CS",
            price ? "actual price change" : "actual change in CS");
        std::ofstream g(*svg_path, std::ios::binary);
        if (!g) throw IoError("cannot open " + svg_path->string() + " for writing");
        g << svg_text;
        if (!g) throw IoError("failed writing " + svg_path->string());
    }
}

std::string records_csv(const std::vector<McRecord>& records, int n_firms) {
    std::ostringstream out;
    out << "replicate,converged";
    for (int i = 1; i <= n_firms; ++i) out << ",s_" << i;
    out << ",s_0,margin,price_response,dp_1,dp_2,upp_1,upp_2,dcs_actual,dcs_prop1,dcs_ns,roundtrip_error\n";
    for (const auto& r : records) {
        out << r.replicate << ',' << (r.converged ? 1 : 0);
        for (double s : r.shares) out << ',' << fmt17(s);
        out << ',' << fmt17(r.margin) << ',' << fmt17(r.price_response);
        if (r.converged) {
            for (double v : {r.dp[0], r.dp[1], r.upp[0], r.upp[1], r.dcs_actual, r.dcs_prop1, r.dcs_ns,
                             r.roundtrip_error})
                out << ',' << fmt17(v);
        } else {
            out << ",,,,,,,,";
        }
        out << '\n';
    }
    return out.str();
}

void write_records_csv(const std::vector<McRecord>& records, int n_firms, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << records_csv(records, n_firms);
    if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace hhimerge::mc

#pragma once

// Monte Carlo comparison of actual merger effects with their first-order
// predictions.
//
// Each replicate draws firm shares (plus the outside option) from a flat
// Dirichlet and a relative margin for firm 1, calibrates the demand system
// at unit prices, merges firms 1 and 2 without synergies and re-solves the
// equilibrium. Consumer surplus is measured with V0 = 1. Replicates use
// their own generator seeded from (seed, replicate index), so output does not
// depend on the number of worker threads.

#include "hhimerge/demand.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hhimerge::mc {

struct McConfig {
    int n_firms = 6;
    int reps = 2000;
    double margin_lo = 0.3;
    double margin_hi = 0.6;
    DemandKind demand = DemandKind::MNL;
    std::uint64_t seed = 1;
    // Multiplier applied to UPP (and the first-order CS prediction) in the
    // scaled accuracy statistics. 2 corrects the CES downward bias.
    double upp_scale = 1.0;
    // 0 means hardware concurrency.
    unsigned threads = 0;

    void validate() const;
};

struct McRecord {
    int replicate = 0;
    // Firm shares s_1..s_k followed by the outside share.
    std::vector<double> shares;
    double margin = 0.0;
    // Calibrated alpha (MNL) or sigma (CES).
    double price_response = 0.0;
    bool converged = false;

    // Present only when converged. Index 0 is firm 1, index 1 is firm 2.
    double dp[2] = {0.0, 0.0};
    double upp[2] = {0.0, 0.0};
    double dcs_actual = 0.0;
    double dcs_prop1 = 0.0;
    double dcs_ns = 0.0;
    // Largest gap between the pre-merger solve and the drawn shares.
    double roundtrip_error = 0.0;
};

// Flat Dirichlet draw of length `n` from normalized unit exponentials.
// Exposed for testing; uses the same generator as `run`.
std::vector<double> draw_flat_dirichlet(std::uint64_t seed, std::uint64_t stream, int n);

// Solves one replicate from given shares (k firms then outside) and margin.
McRecord simulate_replicate(int replicate, std::vector<double> shares, double margin, DemandKind demand);

std::vector<McRecord> run(const McConfig& config);

struct McSummary {
    int n_total = 0;
    int n_converged = 0;
    double discard_rate = 0.0;
    bool discard_warning = false;

    double mae_prop1 = 0.0;
    double mae_prop1_scaled = 0.0;
    double mae_ns = 0.0;
    // Mean of (approximation - actual). Positive means predicted harm is too small.
    double bias_prop1 = 0.0;
    double bias_ns = 0.0;
    double mean_abs_actual = 0.0;
    double mean_abs_prop1 = 0.0;
    double mean_abs_ns = 0.0;

    // Over both merging products: |dp - upp_scale * UPP|.
    double mae_upp = 0.0;
    double mae_upp_unscaled = 0.0;
    // Median of dp / UPP (unscaled), over products with positive UPP.
    double median_ratio_dp_over_upp = 0.0;
    double upp_scale = 1.0;
};

inline constexpr double kDiscardWarningRate = 0.05;

// Throws ValidationError when no record converged.
McSummary summarize(const std::vector<McRecord>& records, double upp_scale = 1.0);

enum class Figure { UppScatter, CsScatterProp1, CsScatterNs };

std::string_view to_string(Figure which);

struct ScatterPoint {
    double predicted = 0.0;
    double actual = 0.0;
};

std::vector<ScatterPoint> figure_points(const std::vector<McRecord>& records, Figure which,
                                        double upp_scale = 1.0);

// CSV with columns predicted,actual, and optionally an SVG scatter with a
// 45-degree reference line next to it.
void emit_figure_data(const std::vector<McRecord>& records, Figure which, const std::filesystem::path& csv_path,
                      double upp_scale = 1.0, std::optional<std::filesystem::path> svg_path = std::nullopt);

void write_records_csv(const std::vector<McRecord>& records, int n_firms, const std::filesystem::path& path);
std::string records_csv(const std::vector<McRecord>& records, int n_firms);

}  // namespace hhimerge::mc

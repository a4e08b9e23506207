#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iclslope/analysis.hpp"
#include "iclslope/cli/config.hpp"
#include "iclslope/core.hpp"

namespace iclslope::cli {

/// Rounds to 12 significant digits so reports do not depend on last-ulp
/// differences between math libraries.
double round_for_report(double value);
std::string format_number(double value);

/// {slope, intercept, pearson, n_points, classification, threshold,
///  mean_p_d_q, mean_p_x_q, subset, orientation, origin}
nlohmann::ordered_json report_json(const analysis::FitResult& fit, const analysis::Diagnostics& diag,
                                   Subset subset, Origin origin = Origin::labeled);

/// Scatter data, one row per point in canonical order, with header
/// instance_id,demo_id,s,t,p_x_q,p_x_qd,p_d_q,p_d_qx,correct_1shot
std::string points_csv(std::vector<ScoredPoint> points);

void write_file(const std::string& path, const std::string& content);

}  // namespace iclslope::cli

#include "iclslope/cli/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace iclslope::cli {

std::string format_number(double value) {
    if (value == 0.0) return "0";  // folds -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

double round_for_report(double value) {
    return std::strtod(format_number(value).c_str(), nullptr);
}

nlohmann::ordered_json report_json(const analysis::FitResult& fit, const analysis::Diagnostics& diag,
                                   Subset subset, Origin origin) {
    nlohmann::ordered_json j;
    j["slope"] = round_for_report(fit.slope);
    j["intercept"] = round_for_report(fit.intercept);
    j["pearson"] = round_for_report(fit.pearson);
    j["n_points"] = fit.n_points;
    j["classification"] = std::string(analysis::to_string(fit.classification));
    j["threshold"] = round_for_report(fit.threshold);
    j["mean_p_d_q"] = round_for_report(diag.mean_p_d_q);
    j["mean_p_x_q"] = round_for_report(diag.mean_p_x_q);
    j["subset"] = std::string(to_string(subset));
    j["orientation"] = std::string(analysis::to_string(fit.orientation));
    j["origin"] = std::string(to_string(origin));
    return j;
}

namespace {

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string points_csv(std::vector<ScoredPoint> points) {
    analysis::sort_points(points);
    std::string out = "instance_id,demo_id,s,t,p_x_q,p_x_qd,p_d_q,p_d_qx,correct_1shot\n";
    for (const auto& p : points) {
        out += csv_field(p.instance_id) + ',' + csv_field(p.demo_id) + ',' + format_number(p.s) + ',' +
               format_number(p.t) + ',' + format_number(p.profile.p_x_q.value()) + ',' +
               format_number(p.profile.p_x_qd.value()) + ',' + format_number(p.profile.p_d_q.value()) + ',' +
               format_number(p.profile.p_d_qx.value()) + ',' +
               (p.correctness_1shot ? (*p.correctness_1shot ? "true" : "false") : "") + '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("failed while writing '" + path + "'");
}

}  // namespace iclslope::cli

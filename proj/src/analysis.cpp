#include "iclslope/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <tuple>

#include "iclslope/parallel.hpp"

namespace iclslope::analysis {

std::string_view to_string(Classification c) {
    return c == Classification::effective ? "effective" : "ineffective";
}

std::string_view to_string(Orientation o) {
    return o == Orientation::eq3_as_printed ? "eq3_as_printed" : "theorem_consistent";
}

Orientation orientation_from_string(std::string_view name) {
    if (name == "theorem_consistent") return Orientation::theorem_consistent;
    if (name == "eq3_as_printed") return Orientation::eq3_as_printed;
    throw InvalidInput("unknown orientation '" + std::string(name) + "'");
}

ScoringFailure::ScoringFailure(std::string instance_id, std::string demo_id, const std::string& what,
                               bool retryable)
    : Error("scoring failed for instance '" + instance_id + "'" +
            (demo_id.empty() ? std::string{} : ", demonstration '" + demo_id + "'") + ": " + what),
      instance_id_(std::move(instance_id)),
      demo_id_(std::move(demo_id)),
      retryable_(retryable) {}

// ---------------------------------------------------------------------------
// Prompt layout
// ---------------------------------------------------------------------------

std::string output_text(const TaskInstance& instance, const TemplateSpec& spec) {
    if (instance.reasoning && !instance.reasoning->empty()) {
        return join_condition(spec, *instance.reasoning, instance.reference_output);
    }
    return instance.reference_output;
}

std::string demo_text(const Demonstration& demo, const TemplateSpec& spec) {
    return join_condition(spec, demo.question, demo.output);
}

ScoringRequest output_given_question(std::string_view question, std::string_view output,
                                     const TemplateSpec& spec) {
    return ScoringRequest{std::string(question), std::string(output), spec, {}};
}

ScoringRequest output_given_question_demo(std::string_view question, std::string_view output,
                                          const Demonstration& demo, const TemplateSpec& spec) {
    return ScoringRequest{join_condition(spec, question, demo_text(demo, spec)), std::string(output), spec, {}};
}

ScoringRequest demo_given_question(std::string_view question, const Demonstration& demo,
                                   const TemplateSpec& spec) {
    return ScoringRequest{std::string(question), demo_text(demo, spec), spec, {}};
}

ScoringRequest demo_given_question_output(std::string_view question, std::string_view output,
                                          const Demonstration& demo, const TemplateSpec& spec) {
    return ScoringRequest{join_condition(spec, question, output), demo_text(demo, spec), spec, {}};
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

namespace {

NormalizedLikelihood score_tagged(ScoringRequest request, const Backend& backend, const std::string& instance_id,
                                  const std::string& demo_id, const char* quantity) {
    request.tag = instance_id + "/" + (demo_id.empty() ? std::string("-") : demo_id) + "/" + quantity;
    try {
        return score(request, backend);
    } catch (const BackendError& e) {
        throw ScoringFailure(instance_id, demo_id, e.what(), e.retryable());
    } catch (const Error& e) {
        throw ScoringFailure(instance_id, demo_id, std::string(e.what()) + " [request " + request.tag + "]",
                             false);
    }
}

}  // namespace

std::vector<ScoredPoint> score_instance(const TaskInstance& instance, const std::vector<Demonstration>& demos,
                                        const Backend& backend, const TemplateSpec& spec) {
    if (demos.empty()) throw InvalidInput("instance '" + instance.id + "' has no demonstrations to score");
    validate(instance);
    const std::string output = output_text(instance, spec);
    const auto p_x_q =
        score_tagged(output_given_question(instance.question, output, spec), backend, instance.id, "", "p_x_q");

    std::vector<ScoredPoint> points;
    points.reserve(demos.size());
    for (const auto& demo : demos) {
        validate(demo);
        LikelihoodProfile profile{
            p_x_q,
            score_tagged(output_given_question_demo(instance.question, output, demo, spec), backend, instance.id,
                         demo.id, "p_x_qd"),
            score_tagged(demo_given_question(instance.question, demo, spec), backend, instance.id, demo.id,
                         "p_d_q"),
            score_tagged(demo_given_question_output(instance.question, output, demo, spec), backend, instance.id,
                         demo.id, "p_d_qx"),
        };
        points.push_back(make_point(instance.id, demo.id, profile, instance.correctness_1shot));
    }
    return points;
}

std::vector<ScoredPoint> score_all(const std::vector<InstanceWithDemos>& batch, const Backend& backend,
                                   const TemplateSpec& spec, std::size_t jobs) {
    std::vector<std::vector<ScoredPoint>> per_instance(batch.size());
    parallel_for(batch.size(), jobs, [&](std::size_t i) {
        per_instance[i] = score_instance(batch[i].instance, batch[i].demos, backend, spec);
    });
    std::vector<ScoredPoint> points;
    for (auto& chunk : per_instance) {
        for (auto& p : chunk) points.push_back(std::move(p));
    }
    return points;
}

void sort_points(std::vector<ScoredPoint>& points) {
    std::sort(points.begin(), points.end(), [](const ScoredPoint& a, const ScoredPoint& b) {
        return std::tie(a.instance_id, a.demo_id, a.s, a.t) < std::tie(b.instance_id, b.demo_id, b.s, b.t);
    });
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

Classification classify(double slope, double threshold) {
    return slope > threshold ? Classification::effective : Classification::ineffective;
}

FitResult fit_lcs(std::vector<ScoredPoint> points, double threshold, Orientation orientation) {
    if (points.size() < 2) {
        throw DegenerateFit("need at least 2 points to fit a line, got " + std::to_string(points.size()));
    }
    sort_points(points);
    const double n = static_cast<double>(points.size());

    const bool gain_on_relevance = orientation == Orientation::theorem_consistent;
    auto regressor = [&](const ScoredPoint& p) { return gain_on_relevance ? p.s : p.t; };
    auto response = [&](const ScoredPoint& p) { return gain_on_relevance ? p.t : p.s; };

    double sum_x = 0.0, sum_y = 0.0;
    for (const auto& p : points) {
        sum_x += regressor(p);
        sum_y += response(p);
    }
    const double mean_x = sum_x / n;
    const double mean_y = sum_y / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        const double dx = regressor(p) - mean_x;
        const double dy = response(p) - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0)) {
        throw DegenerateFit(gain_on_relevance ? "contextual relevance has zero variance across points"
                                              : "learning gain has zero variance across points");
    }

    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.pearson = syy > 0.0 ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;
    fit.n_points = points.size();
    fit.threshold = threshold;
    fit.orientation = orientation;
    fit.classification = classify(fit.slope, threshold);
    return fit;
}

std::vector<ScoredPoint> filter_bad_cases(const std::vector<ScoredPoint>& points) {
    std::vector<ScoredPoint> bad;
    for (const auto& p : points) {
        if (!p.correctness_1shot) {
            throw MissingCorrectness("point (" + p.instance_id + ", " + p.demo_id +
                                     ") has no 1-shot correctness flag; bad-case analysis needs every flag");
        }
        if (!*p.correctness_1shot) bad.push_back(p);
    }
    return bad;
}

Diagnostics diagnostics(std::vector<ScoredPoint> points) {
    if (points.empty()) throw InvalidInput("diagnostics need at least one point");
    sort_points(points);
    double sum_d = 0.0, sum_x = 0.0;
    for (const auto& p : points) {
        sum_d += p.profile.p_d_q.value();
        sum_x += p.profile.p_x_q.value();
    }
    const double n = static_cast<double>(points.size());
    return Diagnostics{sum_d / n, sum_x / n, points.size()};
}

// ---------------------------------------------------------------------------
// Exact match
// ---------------------------------------------------------------------------

namespace {

std::string normalize_text(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::optional<double> parse_number(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

bool exact_match(std::string_view prediction, std::string_view reference) {
    const std::string a = normalize_text(prediction);
    const std::string b = normalize_text(reference);
    if (a == b) return true;
    const auto na = parse_number(a);
    const auto nb = parse_number(b);
    return na && nb && *na == *nb;
}

}  // namespace iclslope::analysis

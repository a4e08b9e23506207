#include "iclslope/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace iclslope::oracle {

namespace {

std::vector<std::string> labels(char prefix, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(1, prefix) + std::to_string(i));
    return out;
}

bool within(double a, double b, double tolerance) {
    return a <= b + tolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteWorld
// ---------------------------------------------------------------------------

DiscreteWorld::DiscreteWorld(std::vector<std::string> q_symbols, std::vector<std::string> x_symbols,
                             std::vector<std::string> d_symbols, std::vector<double> joint)
    : q_symbols_(std::move(q_symbols)),
      x_symbols_(std::move(x_symbols)),
      d_symbols_(std::move(d_symbols)),
      joint_(std::move(joint)) {
    if (q_symbols_.empty() || x_symbols_.empty() || d_symbols_.empty()) {
        throw InvalidInput("discrete world needs at least one symbol per variable");
    }
    if (joint_.size() != q_count() * x_count() * d_count()) {
        throw InvalidInput("joint table has " + std::to_string(joint_.size()) + " entries, expected " +
                           std::to_string(q_count() * x_count() * d_count()));
    }
    double total = 0.0;
    for (double p : joint_) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InvalidInput("joint table entries must be finite and non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidInput("joint table sums to " + std::to_string(total) + ", not 1");
    }
}

std::size_t DiscreteWorld::d_index(const std::string& label) const {
    auto it = std::find(d_symbols_.begin(), d_symbols_.end(), label);
    if (it == d_symbols_.end()) throw InvalidInput("unknown demonstration symbol '" + label + "'");
    return static_cast<std::size_t>(it - d_symbols_.begin());
}

double probability(const DiscreteWorld& world, const Event& event) {
    double mass = 0.0;
    for (std::size_t q = 0; q < world.q_count(); ++q) {
        if (event.q && *event.q != q) continue;
        for (std::size_t x = 0; x < world.x_count(); ++x) {
            if (event.x && *event.x != x) continue;
            for (std::size_t d = 0; d < world.d_count(); ++d) {
                if (event.d && *event.d != d) continue;
                mass += world.at(q, x, d);
            }
        }
    }
    return mass;
}

double conditional(const DiscreteWorld& world, const Event& target, const Event& given) {
    const double given_mass = probability(world, given);
    if (!(given_mass > 0.0)) {
        throw DegenerateConditioning("conditioning event has zero probability");
    }
    auto merge = [](std::optional<std::size_t> a, std::optional<std::size_t> b,
                    bool& conflict) -> std::optional<std::size_t> {
        if (a && b && *a != *b) conflict = true;
        return a ? a : b;
    };
    bool conflict = false;
    Event both{merge(target.q, given.q, conflict), merge(target.x, given.x, conflict),
               merge(target.d, given.d, conflict)};
    if (conflict) return 0.0;
    return probability(world, both) / given_mass;
}

TripleConditionals triple_conditionals(const DiscreteWorld& world, std::size_t q, std::size_t x,
                                       std::size_t d) {
    TripleConditionals c{};
    c.p_x_q = conditional(world, Event{.x = x}, Event{.q = q});
    c.p_x_qd = conditional(world, Event{.x = x}, Event{.q = q, .d = d});
    c.p_d_q = conditional(world, Event{.d = d}, Event{.q = q});
    c.p_d_qx = conditional(world, Event{.d = d}, Event{.q = q, .x = x});
    return c;
}

// ---------------------------------------------------------------------------
// Identity verifiers
// ---------------------------------------------------------------------------

IdentityReport verify_bayes_decomposition(const DiscreteWorld& world, double tolerance) {
    IdentityReport report;
    report.tolerance = tolerance;
    for (std::size_t q = 0; q < world.q_count(); ++q) {
        for (std::size_t x = 0; x < world.x_count(); ++x) {
            for (std::size_t d = 0; d < world.d_count(); ++d) {
                if (!(world.at(q, x, d) > 0.0)) {
                    ++report.skipped;
                    continue;
                }
                const auto c = triple_conditionals(world, q, x, d);
                const double gain_term = std::log(c.p_d_qx) - std::log(c.p_d_q);
                const double lhs = -std::log(c.p_x_qd);
                const double rhs = -std::log(c.p_x_q) - gain_term;
                report.max_residual = std::max(report.max_residual, std::abs(lhs - rhs));
                report.max_abs_gain_term = std::max(report.max_abs_gain_term, std::abs(gain_term));
                ++report.checked;
            }
        }
    }
    report.pass = report.max_residual <= tolerance;
    return report;
}

IdentityReport verify_theorem1(const DiscreteWorld& world, double tolerance) {
    IdentityReport report;
    report.tolerance = tolerance;
    for (std::size_t q = 0; q < world.q_count(); ++q) {
        for (std::size_t x = 0; x < world.x_count(); ++x) {
            for (std::size_t d = 0; d < world.d_count(); ++d) {
                if (!(probability(world, {.q = q, .x = x}) > 0.0) ||
                    !(probability(world, {.q = q, .d = d}) > 0.0)) {
                    ++report.skipped;
                    continue;
                }
                const auto c = triple_conditionals(world, q, x, d);
                const double s = c.relevance();
                const double t = c.gain();
                report.max_residual = std::max(report.max_residual, std::abs(t - c.ratio() * s));
                report.max_abs_gain_term = std::max(report.max_abs_gain_term, std::abs(t));
                ++report.checked;
            }
        }
    }
    report.pass = report.max_residual <= tolerance;
    return report;
}

std::string_view to_string(VerdictStatus status) {
    switch (status) {
        case VerdictStatus::holds: return "holds";
        case VerdictStatus::violated: return "violated";
        case VerdictStatus::premise_failed: return "premise_failed";
    }
    return "holds";
}

// ---------------------------------------------------------------------------
// Synthetic vs real demonstrations
// ---------------------------------------------------------------------------

SyntheticRatioReport verify_theorem2(const DiscreteWorld& oracle, const DiscreteWorld& empirical,
                                     const std::string& d_hat, const std::string& d_star,
                                     double tolerance) {
    if (oracle.q_symbols() != empirical.q_symbols() || oracle.x_symbols() != empirical.x_symbols() ||
        oracle.d_symbols() != empirical.d_symbols()) {
        throw InvalidInput("oracle and empirical worlds must share their symbol sets");
    }
    const std::size_t dh = empirical.d_index(d_hat);
    const std::size_t ds = empirical.d_index(d_star);

    SyntheticRatioReport report;
    auto fail_premise = [&](SyntheticRatioCheck& check, const char* premise) {
        check.status = VerdictStatus::premise_failed;
        check.failed_premise = premise;
        if (report.status != VerdictStatus::premise_failed) {
            report.status = VerdictStatus::premise_failed;
            report.failed_premise = premise;
        }
    };

    for (std::size_t q = 0; q < empirical.q_count(); ++q) {
        if (!(probability(empirical, {.q = q}) > 0.0) || !(probability(oracle, {.q = q}) > 0.0)) {
            continue;
        }
        SyntheticRatioCheck check;
        check.q = empirical.q_symbols()[q];

        auto argmax_x = [q](const DiscreteWorld& w) {
            std::size_t best = 0;
            double best_p = -1.0;
            for (std::size_t x = 0; x < w.x_count(); ++x) {
                const double p = conditional(w, {.x = x}, {.q = q});
                if (p > best_p) {
                    best_p = p;
                    best = x;
                }
            }
            return best;
        };
        const std::size_t x_hat = argmax_x(empirical);
        const std::size_t x_star = argmax_x(oracle);
        check.x_hat = empirical.x_symbols()[x_hat];
        check.x_star = empirical.x_symbols()[x_star];

        const double p_dhat = conditional(empirical, {.d = dh}, {.q = q});
        const double p_dstar = conditional(empirical, {.d = ds}, {.q = q});
        check.hat_ratio = p_dhat / conditional(empirical, {.x = x_hat}, {.q = q});
        check.star_ratio = p_dstar / conditional(empirical, {.x = x_star}, {.q = q});

        if (!(p_dhat > 0.0) || !(p_dstar > 0.0)) {
            fail_premise(check, "conditional_dominance");
        } else {
            bool dominated = true;
            for (std::size_t x = 0; x < empirical.x_count() && dominated; ++x) {
                const double lhs = conditional(empirical, {.x = x}, {.q = q, .d = dh});
                const double rhs = conditional(empirical, {.x = x}, {.q = q, .d = ds});
                dominated = within(lhs, rhs, tolerance);
            }
            if (!dominated) {
                fail_premise(check, "conditional_dominance");
            } else if (!within(p_dhat, p_dstar, tolerance)) {
                fail_premise(check, "marginal_dominance");
            }
        }

        if (check.status != VerdictStatus::premise_failed) {
            check.status = within(check.hat_ratio, check.star_ratio, tolerance) ? VerdictStatus::holds
                                                                                : VerdictStatus::violated;
            if (check.status == VerdictStatus::violated && report.status == VerdictStatus::holds) {
                report.status = VerdictStatus::violated;
            }
        }
        report.per_question.push_back(std::move(check));
    }
    return report;
}

SyntheticRatioReport verify_theorem2(const DiscreteWorld& world, const std::string& d_hat,
                                     const std::string& d_star, double tolerance) {
    return verify_theorem2(world, world, d_hat, d_star, tolerance);
}

// ---------------------------------------------------------------------------
// Error bound
// ---------------------------------------------------------------------------

std::string first_failed_error_premise(const DiscreteWorld& world, const Perturbation& p) {
    if (!(probability(world, {.q = p.q, .x = p.x}) > 0.0) ||
        !(probability(world, {.q = p.q, .d = p.d}) > 0.0)) {
        return "valid_conditionals";
    }
    const auto c = triple_conditionals(world, p.q, p.x, p.d);
    const auto& e = p.epsilon;
    for (double v : {c.p_d_q + e.d_q, c.p_x_q + e.x_q, c.p_d_qx + e.d_qx, c.p_x_qd + e.x_qd}) {
        if (!(v > 0.0 && v <= 1.0)) return "valid_conditionals";
    }
    const double relevance = c.relevance();
    if (!(relevance > 0.0) || relevance > c.p_x_qd || !(relevance + e.x_qd > 0.0)) {
        return "positive_relevance";
    }
    if (e.all_zero()) return {};
    if (!(e.x_q > 0.0) || !(e.x_qd > 0.0)) return "positive_error_rate";
    const double outer = e.d_q / e.x_q;
    const double inner = e.d_qx / e.x_qd;
    if (!(c.ratio() >= outer) || !(outer >= inner)) return "error_rate_chain";
    return {};
}

ErrorBoundReport verify_error_bound(const PerturbedWorld& pw, double tolerance) {
    ErrorBoundReport report;
    for (const auto& p : pw.perturbations) {
        ErrorBoundCheck check;
        check.q = p.q;
        check.x = p.x;
        check.d = p.d;
        check.failed_premise = first_failed_error_premise(pw.base, p);
        if (!check.failed_premise.empty()) {
            check.status = VerdictStatus::premise_failed;
            ++report.premise_failures;
            if (report.status == VerdictStatus::holds) report.status = VerdictStatus::premise_failed;
            report.checks.push_back(std::move(check));
            continue;
        }
        const auto c = triple_conditionals(pw.base, p.q, p.x, p.d);
        const auto& e = p.epsilon;
        const double r_p = c.ratio();
        const double relevance = c.relevance();
        const double numerator = e.d_qx - e.x_qd * r_p;
        check.true_ratio = r_p;
        check.delta_slope = numerator / (relevance * (relevance + e.x_qd));
        check.delta_ratio = numerator / (c.p_x_qd * (c.p_x_qd + e.x_qd));
        check.direct_delta_slope =
            (c.gain() + e.d_qx - e.d_q) / (relevance + e.x_qd - e.x_q) - c.gain() / relevance;
        check.direct_delta_ratio = (c.p_d_q + e.d_q) / (c.p_x_q + e.x_q) - r_p;
        ++report.accepted;
        if (within(check.delta_slope, check.delta_ratio, tolerance)) {
            check.status = VerdictStatus::holds;
        } else {
            check.status = VerdictStatus::violated;
            report.status = VerdictStatus::violated;
        }
        report.checks.push_back(std::move(check));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

std::size_t Rng::categorical(const std::vector<double>& weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    const double target = uniform() * total;
    double running = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        last_positive = i;
        running += weights[i];
        if (target < running) return i;
    }
    return last_positive;
}

std::vector<double> Rng::dirichlet_ones(std::size_t n) {
    std::vector<double> out(n);
    double total = 0.0;
    for (auto& v : out) {
        v = -std::log1p(-uniform());
        total += v;
    }
    for (auto& v : out) v /= total;
    return out;
}

DiscreteWorld random_world(Rng& rng, std::size_t nq, std::size_t nx, std::size_t nd) {
    auto joint = rng.dirichlet_ones(nq * nx * nd);
    // Renormalize so the table sums to 1 to the last ulp the validator sees.
    const double total = std::accumulate(joint.begin(), joint.end(), 0.0);
    for (auto& v : joint) v /= total;
    return DiscreteWorld(labels('q', nq), labels('x', nx), labels('d', nd), std::move(joint));
}

DiscreteWorld random_world(Rng& rng, std::size_t max_side) {
    const std::size_t nq = 1 + rng.index(max_side);
    const std::size_t nx = 2 + rng.index(max_side - 1);
    const std::size_t nd = 2 + rng.index(max_side - 1);
    return random_world(rng, nq, nx, nd);
}

std::vector<ScoredPoint> sample_points(const DiscreteWorld& world, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw InvalidInput("sample_points needs n >= 2 to support a line fit");
    Rng rng(seed);
    std::vector<ScoredPoint> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cell = rng.categorical(world.joint());
        const std::size_t d = cell % world.d_count();
        const std::size_t x = (cell / world.d_count()) % world.x_count();
        const std::size_t q = cell / (world.d_count() * world.x_count());
        const auto c = triple_conditionals(world, q, x, d);
        LikelihoodProfile profile{NormalizedLikelihood::from_value(c.p_x_q),
                                  NormalizedLikelihood::from_value(c.p_x_qd),
                                  NormalizedLikelihood::from_value(c.p_d_q),
                                  NormalizedLikelihood::from_value(c.p_d_qx)};
        char id[64];
        std::snprintf(id, sizeof id, "%06zu/%s/%s", i, world.q_symbols()[q].c_str(),
                      world.x_symbols()[x].c_str());
        points.push_back(make_point(id, world.d_symbols()[d], profile));
    }
    return points;
}

DiscreteWorld constant_ratio_world(std::size_t nq, std::size_t nx, std::size_t nd, Rng& rng) {
    if (nq == 0 || nx < 2 || nd < 2) throw InvalidInput("constant-ratio world needs nx, nd >= 2");
    const auto q_mass = rng.dirichlet_ones(nq);
    std::vector<double> joint(nq * nx * nd);
    for (std::size_t q = 0; q < nq; ++q) {
        // Double-centred noise has zero row and column sums, so adding it to the
        // uniform table keeps both marginals uniform.
        std::vector<double> noise(nx * nd);
        for (auto& v : noise) v = rng.uniform() - 0.5;
        std::vector<double> row_mean(nx, 0.0), col_mean(nd, 0.0);
        double mean = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t d = 0; d < nd; ++d) {
                row_mean[x] += noise[x * nd + d] / static_cast<double>(nd);
                col_mean[d] += noise[x * nd + d] / static_cast<double>(nx);
                mean += noise[x * nd + d] / static_cast<double>(nx * nd);
            }
        }
        double max_abs = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t d = 0; d < nd; ++d) {
                auto& v = noise[x * nd + d];
                v = v - row_mean[x] - col_mean[d] + mean;
                max_abs = std::max(max_abs, std::abs(v));
            }
        }
        const double base = 1.0 / static_cast<double>(nx * nd);
        const double scale = max_abs > 0.0 ? 0.9 * base / max_abs : 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t d = 0; d < nd; ++d) {
                joint[(q * nx + x) * nd + d] = q_mass[q] * (base + scale * noise[x * nd + d]);
            }
        }
    }
    const double total = std::accumulate(joint.begin(), joint.end(), 0.0);
    for (auto& v : joint) v /= total;
    return DiscreteWorld(labels('q', nq), labels('x', nx), labels('d', nd), std::move(joint));
}

Theorem2Case premise_satisfying_case(Rng& rng, std::size_t max_side) {
    const std::size_t nq = 1 + rng.index(max_side);
    const std::size_t nx = 2 + rng.index(max_side - 1);
    const std::size_t nd = 2 + rng.index(max_side - 1);

    const auto q_mass = rng.dirichlet_ones(nq);
    std::vector<double> joint(nq * nx * nd);
    for (std::size_t q = 0; q < nq; ++q) {
        auto d_given_q = rng.dirichlet_ones(nd);
        if (d_given_q[0] > d_given_q[1]) std::swap(d_given_q[0], d_given_q[1]);
        std::vector<std::vector<double>> x_given_qd(nd);
        for (std::size_t d = 1; d < nd; ++d) x_given_qd[d] = rng.dirichlet_ones(nx);
        // The synthetic demonstration (d0) is exactly as informative as the real one (d1).
        x_given_qd[0] = x_given_qd[1];
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t d = 0; d < nd; ++d) {
                joint[(q * nx + x) * nd + d] = q_mass[q] * d_given_q[d] * x_given_qd[d][x];
            }
        }
    }
    const double total = std::accumulate(joint.begin(), joint.end(), 0.0);
    for (auto& v : joint) v /= total;
    DiscreteWorld empirical(labels('q', nq), labels('x', nx), labels('d', nd), std::move(joint));
    DiscreteWorld oracle = random_world(rng, nq, nx, nd);
    return Theorem2Case{std::move(oracle), std::move(empirical), "d0", "d1"};
}

std::optional<PerturbedWorld> sample_premise_satisfying_perturbation(Rng& rng, std::size_t max_attempts) {
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        DiscreteWorld world = random_world(rng);
        Perturbation p;
        p.q = rng.index(world.q_count());
        p.x = rng.index(world.x_count());
        p.d = rng.index(world.d_count());
        const double scale = 0.05;
        p.epsilon.x_q = scale * rng.uniform();
        p.epsilon.x_qd = scale * rng.uniform();
        p.epsilon.d_q = scale * (2.0 * rng.uniform() - 1.0);
        p.epsilon.d_qx = scale * (2.0 * rng.uniform() - 1.0);
        if (first_failed_error_premise(world, p).empty()) {
            return PerturbedWorld{std::move(world), {p}};
        }
    }
    return std::nullopt;
}

}  // namespace iclslope::oracle

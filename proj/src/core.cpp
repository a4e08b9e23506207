#include "iclslope/core.hpp"

#include <cmath>
#include <numeric>

namespace iclslope {

namespace {

void require_probability(double p, const char* name) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw InvalidInput(std::string(name) + " must lie in (0, 1], got " + std::to_string(p));
    }
}

}  // namespace

std::string_view to_string(Origin origin) {
    switch (origin) {
        case Origin::labeled: return "labeled";
        case Origin::synthetic: return "synthetic";
        case Origin::paraphrased: return "paraphrased";
    }
    return "labeled";
}

Origin origin_from_string(std::string_view name) {
    if (name == "labeled") return Origin::labeled;
    if (name == "synthetic") return Origin::synthetic;
    if (name == "paraphrased") return Origin::paraphrased;
    throw InvalidInput("unknown origin '" + std::string(name) + "'");
}

void validate(const TaskInstance& instance) {
    if (instance.question.empty()) {
        throw InvalidInput("instance '" + instance.id + "' has an empty question");
    }
    if (instance.reference_output.empty()) {
        throw InvalidInput("instance '" + instance.id + "' has an empty reference output");
    }
}

void validate(const Demonstration& demo) {
    if (demo.question.empty()) {
        throw InvalidInput("demonstration '" + demo.id + "' has an empty question");
    }
    if (demo.output.empty()) {
        throw InvalidInput("demonstration '" + demo.id + "' has an empty output");
    }
}

NormalizedLikelihood NormalizedLikelihood::from_logprobs(std::span<const double> token_logprobs) {
    if (token_logprobs.empty()) {
        throw InvalidInput("cannot normalize a likelihood over zero tokens");
    }
    for (double lp : token_logprobs) {
        if (!std::isfinite(lp) || lp > 0.0) {
            throw InvalidInput("token log-probability must be finite and <= 0, got " + std::to_string(lp));
        }
    }
    double sum = std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0);
    return from_sum(sum, token_logprobs.size());
}

NormalizedLikelihood NormalizedLikelihood::from_sum(double sum_logprob, std::size_t token_count) {
    if (token_count == 0) {
        throw InvalidInput("token_count must be positive");
    }
    if (!std::isfinite(sum_logprob) || sum_logprob > 0.0) {
        throw InvalidInput("sum_logprob must be finite and <= 0, got " + std::to_string(sum_logprob));
    }
    double value = std::exp(sum_logprob / static_cast<double>(token_count));
    if (!(value > 0.0)) {
        throw InvalidInput("normalized likelihood underflows to zero");
    }
    return NormalizedLikelihood(value, token_count, sum_logprob);
}

NormalizedLikelihood NormalizedLikelihood::from_value(double value) {
    require_probability(value, "likelihood");
    return NormalizedLikelihood(value, 1, std::log(value));
}

ScoredPoint make_point(std::string instance_id, std::string demo_id,
                       const LikelihoodProfile& profile,
                       std::optional<bool> correctness_1shot) {
    ScoredPoint point{std::move(instance_id), std::move(demo_id),
                      contextual_relevance(profile.p_x_qd.value(), profile.p_x_q.value()),
                      learning_gain(profile.p_d_qx.value(), profile.p_d_q.value()),
                      profile, correctness_1shot};
    return point;
}

double contextual_relevance(double p_x_qd, double p_x_q) {
    require_probability(p_x_qd, "p(X|Q;D)");
    require_probability(p_x_q, "p(X|Q)");
    return p_x_qd - p_x_q;
}

double learning_gain(double p_d_qx, double p_d_q) {
    require_probability(p_d_qx, "p(D|Q;X)");
    require_probability(p_d_q, "p(D|Q)");
    return p_d_qx - p_d_q;
}

double zero_shot_loss(double p_x_q) {
    require_probability(p_x_q, "p(X|Q)");
    return -std::log(p_x_q);
}

}  // namespace iclslope

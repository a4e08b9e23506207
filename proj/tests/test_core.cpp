#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "iclslope/core.hpp"

using namespace iclslope;

TEST_CASE("contextual relevance examples") {
    CHECK(contextual_relevance(0.8, 0.8) == 0.0);
    // W1: p(x1|q,d1) = 0.4/0.6, p(x1|q) = 0.5
    CHECK(contextual_relevance(2.0 / 3.0, 0.5) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(contextual_relevance(0.3, 0.5) == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("learning gain examples") {
    CHECK(learning_gain(0.6, 0.6) == 0.0);
    CHECK(learning_gain(0.8, 0.6) == doctest::Approx(0.2).epsilon(1e-15));
    // Theorem-1 reading of the same W1 triple: ratio 1.2 times s = 1/6
    CHECK(learning_gain(0.8, 0.6) == doctest::Approx(1.2 * (1.0 / 6.0)).epsilon(1e-15));
    CHECK(learning_gain(0.1, 0.4) == doctest::Approx(-0.3).epsilon(1e-15));
}

TEST_CASE("measures reject probabilities outside (0, 1]") {
    CHECK_THROWS_AS(contextual_relevance(0.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(contextual_relevance(0.5, 1.5), InvalidInput);
    CHECK_THROWS_AS(learning_gain(-0.1, 0.5), InvalidInput);
    CHECK_THROWS_AS(learning_gain(0.5, std::nan("")), InvalidInput);
    CHECK_NOTHROW(learning_gain(1.0, 1.0));
}

TEST_CASE("zero-shot loss") {
    CHECK(zero_shot_loss(1.0) == 0.0);
    CHECK(zero_shot_loss(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(zero_shot_loss(std::exp(-3.0)) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(zero_shot_loss(0.0), InvalidInput);
    CHECK_THROWS_AS(zero_shot_loss(-1.0), InvalidInput);
}

TEST_CASE("antisymmetry of both measures") {
    const std::vector<double> grid = {0.01, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.77, 0.999, 1.0};
    for (double a : grid) {
        for (double b : grid) {
            CHECK(contextual_relevance(a, b) == -contextual_relevance(b, a));
            CHECK(learning_gain(a, b) == -learning_gain(b, a));
        }
    }
}

TEST_CASE("zero-shot loss is strictly decreasing") {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 1000; ++i) {
        const double loss = zero_shot_loss(i / 1000.0);
        CHECK(loss < prev);
        prev = loss;
    }
}

TEST_CASE("normalized likelihood") {
    SUBCASE("certain token") {
        const std::vector<double> lp = {0.0};
        const auto nl = NormalizedLikelihood::from_logprobs(lp);
        CHECK(nl.value() == 1.0);
        CHECK(nl.token_count() == 1);
        CHECK(nl.sum_logprob() == 0.0);
    }
    SUBCASE("geometric mean of two halves") {
        const std::vector<double> lp = {std::log(0.5), std::log(0.5)};
        CHECK(NormalizedLikelihood::from_logprobs(lp).value() == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("rejections") {
        const std::vector<double> none;
        CHECK_THROWS_AS(NormalizedLikelihood::from_logprobs(none), InvalidInput);
        const std::vector<double> positive = {0.1};
        CHECK_THROWS_AS(NormalizedLikelihood::from_logprobs(positive), InvalidInput);
        CHECK_THROWS_AS(NormalizedLikelihood::from_sum(-1.0, 0), InvalidInput);
        CHECK_THROWS_AS(NormalizedLikelihood::from_value(0.0), InvalidInput);
        CHECK_THROWS_AS(NormalizedLikelihood::from_value(1.01), InvalidInput);
    }
    SUBCASE("round trip through sum and count") {
        for (int n = 1; n <= 40; ++n) {
            std::vector<double> lp;
            for (int i = 0; i < n; ++i) lp.push_back(-0.013 * (i + 1) * (i % 3 + 1));
            const auto nl = NormalizedLikelihood::from_logprobs(lp);
            CHECK(nl.value() > 0.0);
            CHECK(nl.value() <= 1.0);
            const double rebuilt = std::exp(nl.sum_logprob() / static_cast<double>(nl.token_count()));
            CHECK(std::abs(rebuilt - nl.value()) <= 1e-12);
            CHECK(NormalizedLikelihood::from_sum(nl.sum_logprob(), nl.token_count()).value() == nl.value());
        }
    }
}

TEST_CASE("scored points reuse profile values bit for bit") {
    const LikelihoodProfile profile{NormalizedLikelihood::from_value(0.5), NormalizedLikelihood::from_value(2.0 / 3.0),
                                    NormalizedLikelihood::from_value(0.6), NormalizedLikelihood::from_value(0.8)};
    const auto p = make_point("i", "d", profile, false);
    CHECK(p.s == profile.p_x_qd.value() - profile.p_x_q.value());
    CHECK(p.t == profile.p_d_qx.value() - profile.p_d_q.value());
    CHECK(p.s >= -1.0);
    CHECK(p.t <= 1.0);
    CHECK(p.correctness_1shot == false);
}

TEST_CASE("instance and demonstration validation") {
    TaskInstance ok{"id", "q", "x", std::nullopt, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    CHECK_NOTHROW(validate(ok));
    auto no_question = ok;
    no_question.question.clear();
    CHECK_THROWS_AS(validate(no_question), InvalidInput);
    auto no_output = ok;
    no_output.reference_output.clear();
    CHECK_THROWS_AS(validate(no_output), InvalidInput);

    Demonstration demo{"d", "q", "o", Origin::labeled, std::nullopt};
    CHECK_NOTHROW(validate(demo));
    demo.output.clear();
    CHECK_THROWS_AS(validate(demo), InvalidInput);
}

TEST_CASE("origin names") {
    for (auto o : {Origin::labeled, Origin::synthetic, Origin::paraphrased}) {
        CHECK(origin_from_string(to_string(o)) == o);
    }
    CHECK_THROWS_AS(origin_from_string("scraped"), InvalidInput);
}

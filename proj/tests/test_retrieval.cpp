#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "iclslope/oracle.hpp"
#include "iclslope/retrieval.hpp"

using namespace iclslope;
using namespace iclslope::retrieval;

namespace {

CorpusIndex ab_ac() { return CorpusIndex::build({{"doc1", "a b"}, {"doc2", "a c"}}); }

const std::vector<Document>& fixture_docs() {
    static const std::vector<Document> docs = {
        {"d01", "Natalia sold clips to 48 of her friends in April"},
        {"d02", "Weng earns 12 an hour for babysitting"},
        {"d03", "Betty is saving money for a new wallet which costs 100"},
        {"d04", "James writes a 3 page letter to 2 different friends twice a week"},
        {"d05", "Mark has a garden with flowers of three colors"},
        {"d06", "Albert is wondering how much pizza he can eat in one day"},
        {"d07", "Ken created a care package to send to his brother"},
        {"d08", "Alexis is applying for a new job and bought a new set of business clothes"},
        {"d09", "Tina makes 18 an hour and gets overtime for every hour over 8"},
        {"d10", "a new wallet a new job a new garden"},
    };
    return docs;
}

}  // namespace

TEST_CASE("tokenization") {
    CHECK(tokenize("Hello, World! x2") == std::vector<std::string>{"hello", "world", "x2"});
    CHECK(tokenize("  ").empty());
    CHECK(tokenize("caf\xc3\xa9-bar") == std::vector<std::string>{"caf\xc3\xa9", "bar"});
}

TEST_CASE("index statistics") {
    const auto index = ab_ac();
    CHECK(index.doc_count() == 2);
    CHECK(index.avg_doc_length() == 2.0);
    CHECK(index.doc_freq("a") == 2);
    CHECK(index.doc_freq("c") == 1);
    CHECK(index.term_frequency("doc2", "c") == 1);
    CHECK_THROWS_AS(CorpusIndex::build({{"x", "a"}, {"x", "b"}}), InvalidInput);
    for (const auto& t : {"a", "b", "c", "z"}) CHECK(index.doc_freq(t) <= index.doc_count());
}

TEST_CASE("BM25 hand example") {
    const auto index = ab_ac();
    // idf(c) = ln(1 + (2 - 1 + .5)/(1 + .5)) = ln 2; tf part = 2.2 / (1 + 1.2) = 1
    CHECK(std::abs(bm25_score("c", "doc2", index) - std::log(2.0)) <= 1e-9);
    CHECK(bm25_score("c", "doc2", index) == doctest::Approx(0.6931).epsilon(1e-4));
    CHECK(bm25_score("c", "doc1", index) == 0.0);
    CHECK(bm25_score("zzz", "doc1", index) == 0.0);
    CHECK(bm25_score("zzz", "doc2", index) == 0.0);
    CHECK_THROWS_AS(bm25_score("c", "doc9", index), InvalidInput);

    const auto ranked = top_k("c", index, 1);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].doc_id == "doc2");
}

TEST_CASE("BM25 by the formula on an uneven corpus") {
    const auto index = CorpusIndex::build(fixture_docs());
    const std::string query = "new wallet for a friend";
    const double n = static_cast<double>(index.doc_count());
    for (const auto& id : index.doc_ids()) {
        double expected = 0.0;
        for (const auto& term : tokenize(query)) {
            const double df = static_cast<double>(index.doc_freq(term));
            const double tf = static_cast<double>(index.term_frequency(id, term));
            const double len = static_cast<double>(index.doc_length(id));
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            expected += idf * tf * 2.2 / (tf + 1.2 * (1.0 - 0.75 + 0.75 * len / index.avg_doc_length()));
        }
        CHECK(bm25_score(query, id, index) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(bm25_score(query, id, index) >= 0.0);
    }
}

TEST_CASE("a query identical to a document ranks it first") {
    const auto index = CorpusIndex::build(fixture_docs());
    for (const auto& doc : fixture_docs()) {
        const auto ranked = top_k(doc.text, index, index.doc_count());
        CHECK(ranked[0].doc_id == doc.id);
        CHECK(ranked[0].score > ranked[1].score);
    }
}

TEST_CASE("n-gram overlap") {
    CHECK(ngram_overlap("a b c", "a b d", 2) == 0.5);
    CHECK(ngram_overlap("a b c", "a b c", 2) == 1.0);
    CHECK(ngram_overlap("a b c", "x y z", 1) == 0.0);
    CHECK(ngram_overlap("a a a", "a", 1) == doctest::Approx(1.0 / 3.0));
    CHECK(ngram_overlap("a", "a b", 2) == 0.0);  // query has no bigrams
    CHECK_THROWS_AS(ngram_overlap("a", "a", 0), InvalidInput);
}

TEST_CASE("term-frequency cosine") {
    CHECK(std::abs(tf_cosine("a a b", "a b b") - 0.8) <= 1e-9);
    CHECK(tf_cosine("a b", "a b") == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tf_cosine("a b", "c d") == 0.0);
    CHECK(tf_cosine("", "c d") == 0.0);
}

TEST_CASE("embedding cosine") {
    const std::vector<double> a = {1.0, 0.0}, b = {0.6, 0.8}, z = {0.0, 0.0}, c = {1.0, 2.0, 3.0};
    CHECK(embedding_cosine(a, b) == doctest::Approx(0.6));
    CHECK(embedding_cosine(a, z) == 0.0);
    CHECK_THROWS_AS(embedding_cosine(a, c), InvalidInput);
    const std::vector<std::pair<std::string, std::vector<double>>> docs = {{"y", b}, {"x", b}, {"w", a}};
    const auto ranked = top_k_by_embedding(a, docs, 3);
    CHECK(ranked[0].doc_id == "w");
    CHECK(ranked[1].doc_id == "x");
    CHECK(ranked[2].doc_id == "y");
}

TEST_CASE("similarities stay in [0, 1]") {
    oracle::Rng rng(1);
    const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
    for (int i = 0; i < 500; ++i) {
        std::string q, d;
        for (std::size_t n = rng.index(6); n > 0; --n) q += words[rng.index(words.size())] + " ";
        for (std::size_t n = rng.index(6); n > 0; --n) d += words[rng.index(words.size())] + " ";
        for (std::size_t n = 1; n <= 3; ++n) {
            const double g = ngram_overlap(q, d, n);
            CHECK(g >= 0.0);
            CHECK(g <= 1.0);
        }
        const double c = tf_cosine(q, d);
        CHECK(c >= 0.0);
        CHECK(c <= 1.0 + 1e-15);
    }
}

TEST_CASE("top_k ordering contract") {
    const auto index = CorpusIndex::build({{"b", "x y"}, {"a", "x y"}, {"c", "z"}});
    const auto ranked = top_k("x", index, 5);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].doc_id == "a");
    CHECK(ranked[1].doc_id == "b");
    CHECK(ranked[0].score == ranked[1].score);
    CHECK(ranked[2].doc_id == "c");
    CHECK(top_k("x", index, 5) == ranked);
    CHECK_THROWS_AS(top_k("x", index, 0), InvalidInput);
    CHECK(top_k("x", CorpusIndex::build({}), 3).empty());

    for (auto method : {Method::ngram, Method::tf_cosine}) {
        Options options;
        options.method = method;
        options.ngram_n = 1;
        const auto r = top_k("x", index, 2, options);
        REQUIRE(r.size() == 2);
        CHECK(r[0].doc_id == "a");
        CHECK(r[1].doc_id == "b");
    }
    CHECK(method_from_string("cosine") == Method::tf_cosine);
    CHECK(method_from_string("bm25") == Method::bm25);
    CHECK_THROWS_AS(method_from_string("dense"), InvalidInput);
}

TEST_CASE("duplicating the corpus keeps the relative ranking") {
    const auto& docs = fixture_docs();
    auto doubled = docs;
    for (const auto& d : docs) doubled.push_back({d.id + "#copy", d.text});
    const auto single = CorpusIndex::build(docs);
    const auto twice = CorpusIndex::build(doubled);

    const std::vector<std::string> queries = {"new wallet",     "friends letter", "hour overtime",
                                              "a new garden",   "pizza",          "money for a new job",
                                              "the and of a a", "brother package clips"};
    for (const auto& q : queries) {
        CAPTURE(q);
        for (auto method : {Method::bm25, Method::ngram, Method::tf_cosine}) {
            Options options;
            options.method = method;
            options.ngram_n = 1;
            auto order = top_k(q, single, single.doc_count(), options);
            std::vector<std::string> expected;
            for (const auto& r : order) expected.push_back(r.doc_id);

            std::vector<std::string> got;
            for (const auto& r : top_k(q, twice, twice.doc_count(), options)) {
                if (r.doc_id.find('#') == std::string::npos) got.push_back(r.doc_id);
            }
            CHECK(got == expected);
        }
    }
}

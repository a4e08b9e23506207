#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace iclslope::retrieval {

/// Lowercased runs of letters and digits; everything else separates tokens.
/// Bytes >= 0x80 are kept inside tokens so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

struct Document {
    std::string id;
    std::string text;
};

/// Immutable term statistics over a demonstration pool.
class CorpusIndex {
public:
    /// Throws InvalidInput on duplicate ids.
    static CorpusIndex build(const std::vector<Document>& docs);

    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    bool contains(std::string_view id) const;

    std::size_t doc_length(std::string_view id) const;
    std::size_t term_frequency(std::string_view id, std::string_view term) const;
    std::size_t doc_freq(std::string_view term) const;
    const std::vector<std::string>& tokens(std::string_view id) const;
    const std::string& text(std::string_view id) const;

private:
    std::size_t position(std::string_view id) const;

    std::vector<std::string> doc_ids_;
    std::vector<std::string> texts_;
    std::vector<std::vector<std::string>> tokens_;
    std::vector<std::unordered_map<std::string, std::size_t>> term_freqs_;
    std::unordered_map<std::string, std::size_t> doc_freq_;
    std::map<std::string, std::size_t, std::less<>> positions_;
    double avg_doc_length_ = 0.0;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi BM25 with the non-negative idf ln(1 + (N - n + 0.5) / (n + 0.5)).
/// Each query token contributes, so repeated query terms count repeatedly.
double bm25_score(std::string_view query, std::string_view doc_id, const CorpusIndex& index,
                  Bm25Params params = {});

/// Shared n-gram multiset size over the query's n-gram count, in [0, 1].
double ngram_overlap(std::string_view query, std::string_view doc, std::size_t n);

/// Cosine of raw term-frequency vectors; 0 if either side has no terms.
double tf_cosine(std::string_view query, std::string_view doc);

/// Cosine of two caller-supplied embedding vectors.
double embedding_cosine(std::span<const double> a, std::span<const double> b);

enum class Method { bm25, ngram, tf_cosine };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct Options {
    Method method = Method::bm25;
    Bm25Params bm25;
    std::size_t ngram_n = 2;
};

struct Ranked {
    std::string doc_id;
    double score = 0.0;

    friend bool operator==(const Ranked&, const Ranked&) = default;
};

/// Highest-scoring documents, score descending then doc id ascending.
/// Throws InvalidInput when k == 0; an empty index yields an empty list.
std::vector<Ranked> top_k(std::string_view query, const CorpusIndex& index, std::size_t k,
                          const Options& options = {});

/// Same ordering contract as top_k, over caller-supplied embeddings.
std::vector<Ranked> top_k_by_embedding(std::span<const double> query,
                                       const std::vector<std::pair<std::string, std::vector<double>>>& docs,
                                       std::size_t k);

}  // namespace iclslope::retrieval

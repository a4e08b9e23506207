#include "iclslope/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "iclslope/core.hpp"

namespace iclslope::retrieval {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

std::unordered_map<std::string, std::size_t> counts(const std::vector<std::string>& tokens) {
    std::unordered_map<std::string, std::size_t> out;
    for (const auto& t : tokens) ++out[t];
    return out;
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                             std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> out;
    if (tokens.size() < n) return out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return out;
}

void sort_ranked(std::vector<Ranked>& ranked) {
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

CorpusIndex CorpusIndex::build(const std::vector<Document>& docs) {
    CorpusIndex index;
    std::size_t total_length = 0;
    for (const auto& doc : docs) {
        if (!index.positions_.emplace(doc.id, index.doc_ids_.size()).second) {
            throw InvalidInput("duplicate document id '" + doc.id + "'");
        }
        auto tokens = tokenize(doc.text);
        auto tf = counts(tokens);
        for (const auto& [term, _] : tf) ++index.doc_freq_[term];
        total_length += tokens.size();
        index.doc_ids_.push_back(doc.id);
        index.texts_.push_back(doc.text);
        index.tokens_.push_back(std::move(tokens));
        index.term_freqs_.push_back(std::move(tf));
    }
    if (!docs.empty()) {
        index.avg_doc_length_ = static_cast<double>(total_length) / static_cast<double>(docs.size());
    }
    return index;
}

bool CorpusIndex::contains(std::string_view id) const {
    return positions_.find(id) != positions_.end();
}

std::size_t CorpusIndex::position(std::string_view id) const {
    const auto it = positions_.find(id);
    if (it == positions_.end()) throw InvalidInput("unknown document id '" + std::string(id) + "'");
    return it->second;
}

std::size_t CorpusIndex::doc_length(std::string_view id) const { return tokens_[position(id)].size(); }

std::size_t CorpusIndex::term_frequency(std::string_view id, std::string_view term) const {
    const auto& tf = term_freqs_[position(id)];
    const auto it = tf.find(std::string(term));
    return it == tf.end() ? 0 : it->second;
}

std::size_t CorpusIndex::doc_freq(std::string_view term) const {
    const auto it = doc_freq_.find(std::string(term));
    return it == doc_freq_.end() ? 0 : it->second;
}

const std::vector<std::string>& CorpusIndex::tokens(std::string_view id) const {
    return tokens_[position(id)];
}

const std::string& CorpusIndex::text(std::string_view id) const { return texts_[position(id)]; }

double bm25_score(std::string_view query, std::string_view doc_id, const CorpusIndex& index,
                  Bm25Params params) {
    const double length = static_cast<double>(index.doc_length(doc_id));  // validates the id
    const double avg = index.avg_doc_length();
    const double length_ratio = avg > 0.0 ? length / avg : 1.0;
    const double n_docs = static_cast<double>(index.doc_count());

    double score = 0.0;
    for (const auto& term : tokenize(query)) {
        const double tf = static_cast<double>(index.term_frequency(doc_id, term));
        if (tf == 0.0) continue;
        const double df = static_cast<double>(index.doc_freq(term));
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        score += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * length_ratio));
    }
    return score;
}

double ngram_overlap(std::string_view query, std::string_view doc, std::size_t n) {
    if (n < 1) throw InvalidInput("n-gram order must be at least 1");
    const auto q = ngram_counts(tokenize(query), n);
    const auto d = ngram_counts(tokenize(doc), n);
    std::size_t total = 0;
    std::size_t shared = 0;
    for (const auto& [gram, count] : q) {
        total += count;
        if (const auto it = d.find(gram); it != d.end()) shared += std::min(count, it->second);
    }
    return static_cast<double>(shared) / static_cast<double>(std::max<std::size_t>(1, total));
}

double tf_cosine(std::string_view query, std::string_view doc) {
    const auto q = counts(tokenize(query));
    const auto d = counts(tokenize(doc));
    if (q.empty() || d.empty()) return 0.0;
    double dot = 0.0, qq = 0.0, dd = 0.0;
    for (const auto& [term, count] : q) {
        qq += static_cast<double>(count * count);
        if (const auto it = d.find(term); it != d.end()) dot += static_cast<double>(count * it->second);
    }
    for (const auto& [term, count] : d) dd += static_cast<double>(count * count);
    return std::clamp(dot / (std::sqrt(qq) * std::sqrt(dd)), 0.0, 1.0);
}

double embedding_cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInput("embedding dimensions differ");
    double dot = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

std::string_view to_string(Method method) {
    switch (method) {
        case Method::bm25: return "bm25";
        case Method::ngram: return "ngram";
        case Method::tf_cosine: return "cosine";
    }
    return "bm25";
}

Method method_from_string(std::string_view name) {
    if (name == "bm25") return Method::bm25;
    if (name == "ngram") return Method::ngram;
    if (name == "cosine" || name == "tf_cosine") return Method::tf_cosine;
    throw InvalidInput("unknown retrieval method '" + std::string(name) + "'");
}

std::vector<Ranked> top_k(std::string_view query, const CorpusIndex& index, std::size_t k,
                          const Options& options) {
    if (k < 1) throw InvalidInput("top_k needs k >= 1");
    std::vector<Ranked> ranked;
    ranked.reserve(index.doc_count());
    for (const auto& id : index.doc_ids()) {
        double score = 0.0;
        switch (options.method) {
            case Method::bm25: score = bm25_score(query, id, index, options.bm25); break;
            case Method::ngram: score = ngram_overlap(query, index.text(id), options.ngram_n); break;
            case Method::tf_cosine: score = tf_cosine(query, index.text(id)); break;
        }
        ranked.push_back({id, score});
    }
    sort_ranked(ranked);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

std::vector<Ranked> top_k_by_embedding(std::span<const double> query,
                                       const std::vector<std::pair<std::string, std::vector<double>>>& docs,
                                       std::size_t k) {
    if (k < 1) throw InvalidInput("top_k needs k >= 1");
    std::vector<Ranked> ranked;
    ranked.reserve(docs.size());
    for (const auto& [id, vec] : docs) ranked.push_back({id, embedding_cosine(query, vec)});
    sort_ranked(ranked);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

}  // namespace iclslope::retrieval

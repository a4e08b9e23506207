#include "iclslope/reference_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace iclslope {

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

ReferenceLM ReferenceLM::train(std::span<const std::string> corpus_lines, Options options) {
    if (!(options.alpha > 0.0)) throw InvalidInput("smoothing alpha must be positive");

    std::vector<std::vector<std::string>> tokenized;
    std::set<std::string> vocab;
    for (const auto& line : corpus_lines) {
        auto tokens = whitespace_tokens(line);
        for (const auto& t : tokens) {
            if (t == kBeginOfLine) throw InvalidInput("corpus uses the reserved token <s>");
            vocab.insert(t);
        }
        tokenized.push_back(std::move(tokens));
    }
    if (options.include_unk) vocab.insert(std::string(kUnk));
    if (vocab.empty()) throw InvalidInput("reference model needs a non-empty vocabulary");

    ReferenceLM lm;
    lm.alpha_ = options.alpha;
    lm.include_unk_ = options.include_unk;
    lm.vocab_.assign(vocab.begin(), vocab.end());
    for (std::size_t i = 0; i < lm.vocab_.size(); ++i) lm.ids_.emplace(lm.vocab_[i], i);
    if (options.include_unk) lm.unk_id_ = lm.ids_.at(std::string(kUnk));
    lm.rows_.resize(lm.vocab_.size() + 1);
    lm.row_totals_.assign(lm.vocab_.size() + 1, 0);

    const std::size_t bol = lm.vocab_.size();
    for (const auto& tokens : tokenized) {
        std::size_t prev = bol;
        for (const auto& t : tokens) {
            const std::size_t next = lm.ids_.at(t);
            ++lm.rows_[prev][next];
            ++lm.row_totals_[prev];
            prev = next;
        }
    }
    return lm;
}

ReferenceLM ReferenceLM::train_from_file(const std::string& path, Options options) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open corpus file '" + path + "'");
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return train(lines, options);
}

std::size_t ReferenceLM::token_id(std::string_view token) const {
    if (auto it = ids_.find(std::string(token)); it != ids_.end()) return it->second;
    if (include_unk_) return unk_id_;
    throw InvalidInput("token '" + std::string(token) + "' is out of vocabulary");
}

std::size_t ReferenceLM::context_id(std::string_view token) const {
    if (token == kBeginOfLine) return vocab_.size();
    return token_id(token);
}

double ReferenceLM::probability_ids(std::size_t prev, std::size_t next) const {
    const auto& row = rows_[prev];
    const auto it = row.find(next);
    const double count = it == row.end() ? 0.0 : static_cast<double>(it->second);
    return (count + alpha_) /
           (static_cast<double>(row_totals_[prev]) + alpha_ * static_cast<double>(vocab_.size()));
}

double ReferenceLM::probability(std::string_view prev, std::string_view next) const {
    return probability_ids(context_id(prev), token_id(next));
}

std::uint64_t ReferenceLM::bigram_count(std::string_view prev, std::string_view next) const {
    const auto& row = rows_[context_id(prev)];
    const auto it = row.find(token_id(next));
    return it == row.end() ? 0 : it->second;
}

std::uint64_t ReferenceLM::context_count(std::string_view prev) const {
    return row_totals_[context_id(prev)];
}

NormalizedLikelihood ReferenceLM::score(const ScoringRequest& request) const {
    const auto context = whitespace_tokens(render_prefix(request.template_spec, request.condition));
    const auto target = whitespace_tokens(request.target);
    if (target.empty()) {
        throw InvalidInput("scoring target has no tokens" +
                           (request.tag.empty() ? std::string{} : " [request " + request.tag + "]"));
    }
    std::size_t prev = context.empty() ? vocab_.size() : token_id(context.back());
    double sum = 0.0;
    for (const auto& token : target) {
        const std::size_t next = token_id(token);
        sum += std::log(probability_ids(prev, next));
        prev = next;
    }
    return NormalizedLikelihood::from_sum(sum, target.size());
}

std::string ReferenceLM::generate(const GenerationRequest& request) const {
    if (request.max_tokens < 1) throw InvalidInput("max_tokens must be at least 1");
    const auto context = whitespace_tokens(request.prompt);
    std::size_t prev = context.empty() ? vocab_.size() : token_id(context.back());
    std::string out;
    for (std::size_t step = 0; step < request.max_tokens; ++step) {
        if (row_totals_[prev] == 0) break;  // the context never continued in training
        std::size_t best = vocab_.size();
        std::uint64_t best_count = 0;
        // Smoothing is monotone in the count, so the argmax is the largest count.
        for (std::size_t id = 0; id < vocab_.size(); ++id) {
            if (include_unk_ && id == unk_id_) continue;
            const auto& row = rows_[prev];
            const auto it = row.find(id);
            const std::uint64_t count = it == row.end() ? 0 : it->second;
            if (best == vocab_.size() || count > best_count) {
                best = id;
                best_count = count;
            }
        }
        if (best == vocab_.size()) break;  // vocabulary holds only <unk>
        if (!out.empty()) out.push_back(' ');
        out.append(vocab_[best]);
        prev = best;
    }
    return out;
}

}  // namespace iclslope

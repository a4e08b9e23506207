#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "iclslope/backend.hpp"

namespace iclslope {

/// Additively smoothed bigram language model over whitespace tokens.
///
///   p(next | prev) = (count(prev, next) + alpha) / (count(prev, .) + alpha * |V|)
///
/// Each corpus line starts from a begin-of-line context that is never emitted.
/// When `include_unk` is set, V also holds the reserved "<unk>" token and
/// out-of-vocabulary tokens map to it; otherwise they are rejected. The model
/// is immutable after training and safe to share across threads.
class ReferenceLM final : public Backend {
public:
    static constexpr std::string_view kUnk = "<unk>";
    static constexpr std::string_view kBeginOfLine = "<s>";

    struct Options {
        double alpha = 1.0;
        bool include_unk = true;
    };

    static ReferenceLM train(std::span<const std::string> corpus_lines, Options options);
    static ReferenceLM train(std::span<const std::string> corpus_lines) {
        return train(corpus_lines, Options{});
    }
    static ReferenceLM train_from_file(const std::string& path, Options options);

    /// Sorted vocabulary (including "<unk>" when enabled).
    const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
    double alpha() const noexcept { return alpha_; }

    /// Smoothed p(next | prev). `prev` may be kBeginOfLine.
    double probability(std::string_view prev, std::string_view next) const;

    std::uint64_t bigram_count(std::string_view prev, std::string_view next) const;
    std::uint64_t context_count(std::string_view prev) const;

    NormalizedLikelihood score(const ScoringRequest& request) const override;

    bool can_generate() const override { return true; }

    /// Greedy continuation of the prompt's last token; ties go to the
    /// lexicographically smallest token and "<unk>" is never emitted.
    /// Generation stops early at a context that has no observed successor. The
    /// seed is accepted for interface parity and does not change the output.
    std::string generate(const GenerationRequest& request) const override;

private:
    ReferenceLM() = default;

    std::size_t token_id(std::string_view token) const;  // maps OOV to unk or throws
    std::size_t context_id(std::string_view token) const;
    double probability_ids(std::size_t prev, std::size_t next) const;

    std::vector<std::string> vocab_;
    std::unordered_map<std::string, std::size_t> ids_;
    // Rows indexed by context id: vocab ids, then begin-of-line at vocab_.size().
    std::vector<std::unordered_map<std::size_t, std::uint64_t>> rows_;
    std::vector<std::uint64_t> row_totals_;
    double alpha_ = 1.0;
    bool include_unk_ = true;
    std::size_t unk_id_ = 0;
};

/// Whitespace tokenization used by the reference model.
std::vector<std::string> whitespace_tokens(std::string_view text);

}  // namespace iclslope

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iclslope/backend.hpp"
#include "iclslope/core.hpp"
#include "iclslope/retrieval.hpp"

namespace iclslope::selection {

/// Zero-shot answer used as a stand-in for the unknown reference output.
/// The prompt is the question rendered with the scoring template.
std::string preliminary_answer(std::string_view question, const Backend& backend, const TemplateSpec& spec,
                               std::size_t max_tokens = kDefaultMaxTokens, std::uint64_t seed = 0);

struct ScoredDemo {
    Demonstration demo;
    double gain = 0.0;  // p̂(d|Q;X̂) - p̂(d|Q)
};

/// Top-k candidates by learning gain (descending, ties by ascending id).
std::vector<ScoredDemo> select_by_learning_gain(std::string_view question, std::string_view x_hat,
                                                const std::vector<Demonstration>& candidates,
                                                const Backend& backend, const TemplateSpec& spec, std::size_t k,
                                                std::size_t jobs = 1);

/// A demonstration pool with its retrieval index.
class DemoPool {
public:
    explicit DemoPool(std::vector<Demonstration> demos);

    const std::vector<Demonstration>& demos() const noexcept { return demos_; }
    const retrieval::CorpusIndex& index() const noexcept { return index_; }
    const Demonstration& get(std::string_view id) const;

private:
    std::vector<Demonstration> demos_;
    retrieval::CorpusIndex index_;
};

struct PipelineOptions {
    std::size_t k = 1;
    /// BM25 candidates passed to the reranker; nullopt reranks the whole pool.
    std::optional<std::size_t> prefilter_m = 50;
    retrieval::Bm25Params bm25;
    TemplateSpec template_spec;
    std::size_t max_tokens = kDefaultMaxTokens;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct Selection {
    std::string x_hat;
    std::vector<retrieval::Ranked> candidates;  // the BM25 prefilter, in BM25 order
    std::vector<ScoredDemo> selected;
};

/// BM25 top-m, then learning-gain top-k among them with a generated X̂.
Selection select_pipeline(std::string_view question, const DemoPool& pool, const Backend& backend,
                          const PipelineOptions& options);

}  // namespace iclslope::selection

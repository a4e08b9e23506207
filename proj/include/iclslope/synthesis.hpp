#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "iclslope/analysis.hpp"
#include "iclslope/backend.hpp"
#include "iclslope/core.hpp"

namespace iclslope::synthesis {

enum class PromptKind { paraphrase, synthesize };

std::string_view to_string(PromptKind kind);

/// Instruction body with {question}, {answer} and {reasoning} placeholders.
class PromptTemplate {
public:
    /// Throws InvalidInput if a placeholder the pipeline fills is missing, or
    /// the body names a placeholder the pipeline does not know.
    PromptTemplate(PromptKind kind, std::string body);

    static PromptTemplate load(PromptKind kind, const std::string& path);

    PromptKind kind() const noexcept { return kind_; }
    const std::string& body() const noexcept { return body_; }

    std::string fill(std::string_view question, std::string_view answer = {},
                     std::string_view reasoning = {}) const;

private:
    PromptKind kind_;
    std::string body_;
};

struct GenerationOptions {
    std::size_t max_tokens = kDefaultMaxTokens;
    std::uint64_t seed = 0;
};

struct ParaphraseOptions {
    GenerationOptions generation;
    bool strict = false;
};

struct ParaphraseResult {
    TaskInstance instance;
    bool changed = false;
    /// Set when generation failed in lenient mode and the instance passed through.
    std::string warning;
};

/// Restyles the instance's reasoning with the model. Question and reference
/// answer are never touched; the old reasoning moves to original_reasoning.
ParaphraseResult paraphrase(const TaskInstance& instance, const Backend& backend, const PromptTemplate& prompt,
                            const ParaphraseOptions& options = {});

Demonstration synthesize_demo(std::string_view question, const Backend& backend, const PromptTemplate& prompt,
                              const GenerationOptions& options = {}, std::string id = {});

struct OriginFit {
    analysis::FitResult fit;
    Origin origin = Origin::labeled;
    std::vector<ScoredPoint> points;
};

struct FitOptions {
    TemplateSpec template_spec;
    GenerationOptions generation;
    double threshold = analysis::kDefaultThreshold;
    analysis::Orientation orientation = analysis::Orientation::theorem_consistent;
    std::size_t jobs = 1;
};

/// Shared by the labeled and label-free paths.
OriginFit fit_with_origin(std::vector<ScoredPoint> points, Origin origin, const FitOptions& options);

/// For each question: the zero-shot answer as X̂ and k synthesized demonstrations
/// (seeds seed, seed+1, ...). Instance ids come from `ids` when given, otherwise
/// "q000000", "q000001", ...; demo ids append "-syn<j>".
std::vector<analysis::InstanceWithDemos> synthetic_batch(const std::vector<std::string>& questions,
                                                        const Backend& backend, const PromptTemplate& prompt,
                                                        std::size_t k, const FitOptions& options = {},
                                                        const std::vector<std::string>& ids = {});

/// LCS from questions alone: the model's zero-shot answer stands in for X and
/// k synthesized demonstrations per question stand in for D.
OriginFit lcs_without_labels(const std::vector<std::string>& questions, const Backend& backend,
                             const PromptTemplate& prompt, std::size_t k, const FitOptions& options = {});

/// The labeled counterpart over the same fitting code.
OriginFit lcs_with_labels(const std::vector<analysis::InstanceWithDemos>& batch, const Backend& backend,
                          const FitOptions& options = {});

}  // namespace iclslope::synthesis

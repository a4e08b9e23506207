#pragma once

#include <map>
#include <string>
#include <utility>

#include "iclslope/backend.hpp"

namespace iclslope {

/// Serves precomputed likelihoods and generations keyed by the rendered
/// (prefix, target) pair. Useful for replaying logged model scores and for
/// driving the pipeline from an exact discrete world.
class TableBackend final : public Backend {
public:
    void add_score(const ScoringRequest& request, NormalizedLikelihood likelihood);
    void add_generation(std::string prompt, std::string text);

    std::size_t size() const noexcept { return scores_.size(); }

    NormalizedLikelihood score(const ScoringRequest& request) const override;
    bool can_generate() const override { return !generations_.empty(); }
    std::string generate(const GenerationRequest& request) const override;

private:
    std::map<std::pair<std::string, std::string>, NormalizedLikelihood> scores_;
    std::map<std::string, std::string> generations_;
};

}  // namespace iclslope

#include "iclslope/table_backend.hpp"

namespace iclslope {

void TableBackend::add_score(const ScoringRequest& request, NormalizedLikelihood likelihood) {
    auto key = std::make_pair(render_prefix(request.template_spec, request.condition), request.target);
    auto [it, inserted] = scores_.emplace(std::move(key), likelihood);
    if (!inserted && !(it->second == likelihood)) {
        throw InvalidInput("conflicting likelihoods registered for the same rendered request");
    }
}

void TableBackend::add_generation(std::string prompt, std::string text) {
    generations_[std::move(prompt)] = std::move(text);
}

NormalizedLikelihood TableBackend::score(const ScoringRequest& request) const {
    const auto it = scores_.find({render_prefix(request.template_spec, request.condition), request.target});
    if (it == scores_.end()) {
        throw BackendError("no likelihood recorded for request", false, request.tag);
    }
    return it->second;
}

std::string TableBackend::generate(const GenerationRequest& request) const {
    const auto it = generations_.find(request.prompt);
    if (it == generations_.end()) {
        throw BackendError("no generation recorded for prompt", false, request.tag);
    }
    return it->second;
}

}  // namespace iclslope

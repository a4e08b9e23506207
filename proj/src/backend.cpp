#include "iclslope/backend.hpp"

namespace iclslope {

std::string_view to_string(TemplateKind kind) {
    return kind == TemplateKind::chat_minimal ? "chat_minimal" : "plain_concat";
}

TemplateKind template_kind_from_string(std::string_view name) {
    if (name == "plain_concat") return TemplateKind::plain_concat;
    if (name == "chat_minimal") return TemplateKind::chat_minimal;
    throw InvalidInput("unknown template '" + std::string(name) + "'");
}

void validate(const TemplateSpec& spec) {
    if (spec.kind == TemplateKind::chat_minimal && !spec.role_markers) {
        throw InvalidInput("chat_minimal template requires role markers");
    }
}

std::string render_prefix(const TemplateSpec& spec, std::string_view condition) {
    validate(spec);
    std::string out;
    if (spec.kind == TemplateKind::chat_minimal) {
        out.append(spec.role_markers->first).append(condition).append(spec.role_markers->second);
    } else {
        out.append(condition).append(spec.separator);
    }
    return out;
}

std::string render(const TemplateSpec& spec, std::string_view condition, std::string_view target) {
    std::string out = render_prefix(spec, condition);
    out.append(target);
    return out;
}

std::string join_condition(const TemplateSpec& spec, std::string_view first, std::string_view second) {
    std::string out(first);
    out.append(spec.separator).append(second);
    return out;
}

NormalizedLikelihood score(const ScoringRequest& request, const Backend& backend) {
    if (request.target.empty()) {
        throw InvalidInput("scoring request has an empty target" +
                           (request.tag.empty() ? std::string{} : " [request " + request.tag + "]"));
    }
    validate(request.template_spec);
    return backend.score(request);
}

std::string generate(const GenerationRequest& request, const Backend& backend) {
    if (request.max_tokens < 1) {
        throw InvalidInput("max_tokens must be at least 1");
    }
    if (!backend.can_generate()) {
        throw CapabilityError("backend does not support generation" +
                              (request.tag.empty() ? std::string{} : " [request " + request.tag + "]"));
    }
    return backend.generate(request);
}

}  // namespace iclslope

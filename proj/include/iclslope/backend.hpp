#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "iclslope/core.hpp"

namespace iclslope {

enum class TemplateKind { plain_concat, chat_minimal };

std::string_view to_string(TemplateKind kind);
TemplateKind template_kind_from_string(std::string_view name);

/// How a (condition, target) pair is laid out as one string.
///   plain_concat: condition + separator + target
///   chat_minimal: user_marker + condition + assistant_marker + target
/// The separator is also used to join multi-part conditions (question and
/// demonstration, question and output).
struct TemplateSpec {
    TemplateKind kind = TemplateKind::plain_concat;
    std::string separator = "\n";
    std::optional<std::pair<std::string, std::string>> role_markers;

    friend bool operator==(const TemplateSpec&, const TemplateSpec&) = default;
};

/// Throws InvalidInput for chat_minimal without role markers.
void validate(const TemplateSpec& spec);

std::string render(const TemplateSpec& spec, std::string_view condition, std::string_view target);

/// Everything that precedes the target in `render`.
std::string render_prefix(const TemplateSpec& spec, std::string_view condition);

/// Joins two condition segments with the template separator.
std::string join_condition(const TemplateSpec& spec, std::string_view first, std::string_view second);

struct ScoringRequest {
    std::string condition;
    std::string target;
    TemplateSpec template_spec;
    /// Identity attached to errors, e.g. "gsm-17/demo-4/p_x_qd".
    std::string tag;
};

inline constexpr std::size_t kDefaultMaxTokens = 32768;

struct GenerationRequest {
    std::string prompt;
    std::size_t max_tokens = kDefaultMaxTokens;
    std::uint64_t seed = 0;
    std::string tag;
};

/// A likelihood and generation provider. Implementations must tolerate
/// concurrent calls from several threads.
class Backend {
public:
    virtual ~Backend() = default;

    /// Length-normalized likelihood of the target tokens given the rendered
    /// prefix; prefix tokens are conditioned on, never scored.
    virtual NormalizedLikelihood score(const ScoringRequest& request) const = 0;

    virtual bool can_generate() const { return false; }

    virtual std::string generate(const GenerationRequest& request) const {
        throw CapabilityError("backend does not support generation" +
                              (request.tag.empty() ? std::string{} : " [request " + request.tag + "]"));
    }
};

/// Validates the request, then forwards to the backend.
NormalizedLikelihood score(const ScoringRequest& request, const Backend& backend);

std::string generate(const GenerationRequest& request, const Backend& backend);

}  // namespace iclslope

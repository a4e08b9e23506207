#include "iclslope/synthesis.hpp"

#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "iclslope/parallel.hpp"
#include "iclslope/selection.hpp"

namespace iclslope::synthesis {

namespace {

const std::regex& placeholder_pattern() {
    static const std::regex pattern(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");
    return pattern;
}

std::set<std::string> required_placeholders(PromptKind kind) {
    if (kind == PromptKind::paraphrase) return {"question", "answer", "reasoning"};
    return {"question"};
}

}  // namespace

std::string_view to_string(PromptKind kind) {
    return kind == PromptKind::paraphrase ? "paraphrase" : "synthesize";
}

PromptTemplate::PromptTemplate(PromptKind kind, std::string body) : kind_(kind), body_(std::move(body)) {
    std::set<std::string> found;
    for (std::sregex_iterator it(body_.begin(), body_.end(), placeholder_pattern()), end; it != end; ++it) {
        found.insert((*it)[1].str());
    }
    const auto required = required_placeholders(kind_);
    for (const auto& name : required) {
        if (!found.count(name)) {
            throw InvalidInput(std::string(to_string(kind_)) + " prompt is missing the {" + name + "} placeholder");
        }
    }
    const std::set<std::string> known = {"question", "answer", "reasoning"};
    for (const auto& name : found) {
        if (!known.count(name)) {
            throw InvalidInput(std::string(to_string(kind_)) + " prompt uses unknown placeholder {" + name + "}");
        }
    }
}

PromptTemplate PromptTemplate::load(PromptKind kind, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open prompt file '" + path + "'");
    std::ostringstream body;
    body << in.rdbuf();
    return PromptTemplate(kind, body.str());
}

std::string PromptTemplate::fill(std::string_view question, std::string_view answer,
                                 std::string_view reasoning) const {
    std::string out;
    auto begin = body_.cbegin();
    for (std::sregex_iterator it(body_.begin(), body_.end(), placeholder_pattern()), end; it != end; ++it) {
        const auto& m = *it;
        out.append(begin, m[0].first);
        const auto name = m[1].str();
        if (name == "question") out.append(question);
        else if (name == "answer") out.append(answer);
        else out.append(reasoning);
        begin = m[0].second;
    }
    out.append(begin, body_.cend());
    return out;
}

ParaphraseResult paraphrase(const TaskInstance& instance, const Backend& backend, const PromptTemplate& prompt,
                            const ParaphraseOptions& options) {
    if (prompt.kind() != PromptKind::paraphrase) throw InvalidInput("paraphrase needs a paraphrase prompt");
    ParaphraseResult result{instance, false, {}};
    if (!instance.reasoning || instance.reasoning->empty()) return result;

    try {
        GenerationRequest request{prompt.fill(instance.question, instance.reference_output, *instance.reasoning),
                                  options.generation.max_tokens, options.generation.seed,
                                  "paraphrase/" + instance.id};
        std::string restyled = generate(request, backend);
        if (restyled.empty()) throw BackendError("paraphrase produced empty text", false, request.tag);
        result.instance.original_reasoning = instance.reasoning;
        result.instance.reasoning = std::move(restyled);
        result.changed = true;
    } catch (const Error& e) {
        if (options.strict) {
            throw Error("paraphrase failed for instance '" + instance.id + "': " + e.what());
        }
        result.warning = "paraphrase failed for instance '" + instance.id + "', reasoning kept: " + e.what();
    }
    return result;
}

Demonstration synthesize_demo(std::string_view question, const Backend& backend, const PromptTemplate& prompt,
                              const GenerationOptions& options, std::string id) {
    if (prompt.kind() != PromptKind::synthesize) throw InvalidInput("synthesis needs a synthesize prompt");
    if (question.empty()) throw InvalidInput("cannot synthesize a demonstration for an empty question");
    GenerationRequest request{prompt.fill(question), options.max_tokens, options.seed,
                              "synthesize/" + (id.empty() ? std::string("-") : id)};
    std::string output = generate(request, backend);
    if (output.empty()) throw BackendError("synthesis produced empty text", false, request.tag);
    return Demonstration{std::move(id), std::string(question), std::move(output), Origin::synthetic, std::nullopt};
}

OriginFit fit_with_origin(std::vector<ScoredPoint> points, Origin origin, const FitOptions& options) {
    auto fit = analysis::fit_lcs(points, options.threshold, options.orientation);
    analysis::sort_points(points);
    return OriginFit{fit, origin, std::move(points)};
}

std::vector<analysis::InstanceWithDemos> synthetic_batch(const std::vector<std::string>& questions,
                                                        const Backend& backend, const PromptTemplate& prompt,
                                                        std::size_t k, const FitOptions& options,
                                                        const std::vector<std::string>& ids) {
    if (k < 1) throw InvalidInput("label-free LCS needs k >= 1 synthetic demonstrations per question");
    if (!ids.empty() && ids.size() != questions.size()) {
        throw InvalidInput("synthetic batch: got " + std::to_string(ids.size()) + " ids for " +
                           std::to_string(questions.size()) + " questions");
    }
    std::vector<analysis::InstanceWithDemos> batch(questions.size());
    parallel_for(questions.size(), options.jobs, [&](std::size_t i) {
        std::string id;
        if (ids.empty()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "q%06zu", i);
            id = buf;
        } else {
            id = ids[i];
        }
        auto& entry = batch[i];
        entry.instance.id = id;
        entry.instance.question = questions[i];
        entry.instance.reference_output = selection::preliminary_answer(
            questions[i], backend, options.template_spec, options.generation.max_tokens, options.generation.seed);
        for (std::size_t j = 0; j < k; ++j) {
            GenerationOptions g = options.generation;
            g.seed += j;
            entry.demos.push_back(synthesize_demo(questions[i], backend, prompt, g, id + "-syn" + std::to_string(j)));
        }
    });
    return batch;
}

OriginFit lcs_without_labels(const std::vector<std::string>& questions, const Backend& backend,
                             const PromptTemplate& prompt, std::size_t k, const FitOptions& options) {
    if (questions.size() < 2) throw InvalidInput("label-free LCS needs at least 2 questions");
    const auto batch = synthetic_batch(questions, backend, prompt, k, options);
    auto points = analysis::score_all(batch, backend, options.template_spec, options.jobs);
    return fit_with_origin(std::move(points), Origin::synthetic, options);
}

OriginFit lcs_with_labels(const std::vector<analysis::InstanceWithDemos>& batch, const Backend& backend,
                          const FitOptions& options) {
    auto points = analysis::score_all(batch, backend, options.template_spec, options.jobs);
    return fit_with_origin(std::move(points), Origin::labeled, options);
}

}  // namespace iclslope::synthesis

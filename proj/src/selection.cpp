#include "iclslope/selection.hpp"

#include <algorithm>

#include "iclslope/analysis.hpp"
#include "iclslope/parallel.hpp"

namespace iclslope::selection {

std::string preliminary_answer(std::string_view question, const Backend& backend, const TemplateSpec& spec,
                               std::size_t max_tokens, std::uint64_t seed) {
    if (question.empty()) throw InvalidInput("cannot generate a preliminary answer for an empty question");
    GenerationRequest request{render_prefix(spec, question), max_tokens, seed, "preliminary-answer"};
    return generate(request, backend);
}

std::vector<ScoredDemo> select_by_learning_gain(std::string_view question, std::string_view x_hat,
                                                const std::vector<Demonstration>& candidates,
                                                const Backend& backend, const TemplateSpec& spec, std::size_t k,
                                                std::size_t jobs) {
    if (candidates.empty()) throw InvalidInput("learning-gain selection needs at least one candidate");
    if (k < 1) throw InvalidInput("learning-gain selection needs k >= 1");

    std::vector<ScoredDemo> scored(candidates.size());
    parallel_for(candidates.size(), jobs, [&](std::size_t i) {
        const auto& demo = candidates[i];
        auto with_output = analysis::demo_given_question_output(question, x_hat, demo, spec);
        auto without_output = analysis::demo_given_question(question, demo, spec);
        with_output.tag = "select/" + demo.id + "/p_d_qx";
        without_output.tag = "select/" + demo.id + "/p_d_q";
        try {
            scored[i] = ScoredDemo{demo, learning_gain(score(with_output, backend).value(),
                                                       score(without_output, backend).value())};
        } catch (const BackendError& e) {
            throw analysis::ScoringFailure("<selection>", demo.id, e.what(), e.retryable());
        } catch (const Error& e) {
            throw analysis::ScoringFailure("<selection>", demo.id, e.what(), false);
        }
    });
    std::sort(scored.begin(), scored.end(), [](const ScoredDemo& a, const ScoredDemo& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return a.demo.id < b.demo.id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

namespace {

std::vector<retrieval::Document> as_documents(const std::vector<Demonstration>& demos) {
    std::vector<retrieval::Document> docs;
    docs.reserve(demos.size());
    for (const auto& d : demos) docs.push_back({d.id, d.question});
    return docs;
}

}  // namespace

DemoPool::DemoPool(std::vector<Demonstration> demos)
    : demos_(std::move(demos)), index_(retrieval::CorpusIndex::build(as_documents(demos_))) {}

const Demonstration& DemoPool::get(std::string_view id) const {
    const auto it = std::find_if(demos_.begin(), demos_.end(), [&](const Demonstration& d) { return d.id == id; });
    if (it == demos_.end()) throw InvalidInput("unknown demonstration id '" + std::string(id) + "'");
    return *it;
}

Selection select_pipeline(std::string_view question, const DemoPool& pool, const Backend& backend,
                          const PipelineOptions& options) {
    if (options.k < 1) throw InvalidInput("selection needs k >= 1");
    if (options.prefilter_m && *options.prefilter_m < options.k) {
        throw InvalidInput("prefilter size m must be at least k");
    }
    Selection result;
    result.x_hat = preliminary_answer(question, backend, options.template_spec, options.max_tokens, options.seed);
    if (pool.demos().empty()) return result;

    const std::size_t m = options.prefilter_m.value_or(pool.demos().size());
    retrieval::Options retrieval_options;
    retrieval_options.bm25 = options.bm25;
    result.candidates = retrieval::top_k(question, pool.index(), m, retrieval_options);

    std::vector<Demonstration> candidates;
    candidates.reserve(result.candidates.size());
    for (const auto& r : result.candidates) candidates.push_back(pool.get(r.doc_id));
    result.selected = select_by_learning_gain(question, result.x_hat, candidates, backend, options.template_spec,
                                              options.k, options.jobs);
    return result;
}

}  // namespace iclslope::selection

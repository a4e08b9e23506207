#include "iclslope/cli/commands.hpp"

#include <algorithm>
#include <map>

#include "iclslope/cli/dataset.hpp"
#include "iclslope/cli/report.hpp"
#include "iclslope/oracle.hpp"
#include "iclslope/parallel.hpp"
#include "iclslope/retrieval.hpp"
#include "iclslope/selection.hpp"
#include "iclslope/synthesis.hpp"

#ifndef ICLSLOPE_PROMPT_DIR
#define ICLSLOPE_PROMPT_DIR "prompts"
#endif

namespace iclslope::cli {

namespace {

std::string out_path(const RunConfig& config, const std::string& name) {
    if (config.out_dir.empty() || config.out_dir == ".") return name;
    return config.out_dir + "/" + name;
}

std::string dump_report(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

void require_shots(const RunConfig& config) {
    if (config.shots < 1) throw InvalidInput("shots must be at least 1 for an in-context analysis");
}

synthesis::FitOptions fit_options(const RunConfig& config) {
    synthesis::FitOptions options;
    options.template_spec = config.template_spec;
    options.generation.max_tokens = config.max_tokens;
    options.generation.seed = config.seed;
    options.threshold = config.threshold;
    options.orientation = config.orientation;
    options.jobs = config.jobs;
    return options;
}

/// Fits the configured subset and builds the report. The full point set is
/// kept for the CSV.
nlohmann::ordered_json fit_report(const std::vector<ScoredPoint>& points, const RunConfig& config, Origin origin) {
    const auto subset = config.subset == Subset::bad_cases ? analysis::filter_bad_cases(points) : points;
    const auto fit = analysis::fit_lcs(subset, config.threshold, config.orientation);
    const auto diag = analysis::diagnostics(subset);
    return report_json(fit, diag, config.subset, origin);
}

bool all_embedded(const std::vector<Demonstration>& pool) {
    return std::all_of(pool.begin(), pool.end(), [](const Demonstration& d) { return d.embedding.has_value(); });
}

std::string jsonl(const std::vector<nlohmann::ordered_json>& lines) {
    std::string out;
    for (const auto& line : lines) out += line.dump() + "\n";
    return out;
}

}  // namespace

std::string default_prompt_path(bool paraphrase) {
    return std::string(ICLSLOPE_PROMPT_DIR) + (paraphrase ? "/paraphrase.txt" : "/synthesize.txt");
}

std::vector<analysis::InstanceWithDemos> attach_demos(const std::vector<TaskInstance>& instances,
                                                      const std::vector<Demonstration>& pool,
                                                      const RunConfig& config) {
    require_shots(config);
    if (pool.empty()) throw InvalidInput("demonstration pool is empty");

    std::vector<retrieval::Document> docs;
    docs.reserve(pool.size());
    std::map<std::string, const Demonstration*> by_id;
    for (const auto& demo : pool) {
        docs.push_back({demo.id, demo.question});
        by_id.emplace(demo.id, &demo);
    }
    const auto index = retrieval::CorpusIndex::build(docs);

    std::vector<std::pair<std::string, std::vector<double>>> embedded;
    const bool use_embeddings = config.retrieval.method == retrieval::Method::tf_cosine && all_embedded(pool);
    if (use_embeddings) {
        for (const auto& demo : pool) embedded.emplace_back(demo.id, *demo.embedding);
    }

    std::vector<analysis::InstanceWithDemos> batch;
    batch.reserve(instances.size());
    for (const auto& instance : instances) {
        std::vector<retrieval::Ranked> ranked;
        if (use_embeddings && instance.embedding) {
            ranked = retrieval::top_k_by_embedding(*instance.embedding, embedded, config.shots);
        } else {
            ranked = retrieval::top_k(instance.question, index, config.shots, config.retrieval);
        }
        if (ranked.size() < config.shots) {
            throw InvalidInput("instance '" + instance.id + "': pool has " + std::to_string(pool.size()) +
                               " demonstrations, fewer than shots = " + std::to_string(config.shots));
        }
        analysis::InstanceWithDemos entry{instance, {}};
        for (const auto& r : ranked) entry.demos.push_back(*by_id.at(r.doc_id));
        batch.push_back(std::move(entry));
    }
    return batch;
}

EvaluateResult cmd_evaluate(const RunConfig& config, const std::string& dataset_path, const std::string& pool_path,
                            const Backend& backend) {
    require_shots(config);
    const auto instances = ingest_dataset(dataset_path);
    const auto pool = ingest_pool(pool_path);
    const auto batch = attach_demos(instances, pool, config);

    auto points = analysis::score_all(batch, backend, config.template_spec, config.jobs);
    analysis::sort_points(points);
    auto report = fit_report(points, config, Origin::labeled);

    write_file(out_path(config, "report.json"), dump_report(report));
    write_file(out_path(config, "points.csv"), points_csv(points));
    return EvaluateResult{std::move(report), std::move(points)};
}

std::vector<nlohmann::ordered_json> cmd_select(const RunConfig& config, const std::string& dataset_path,
                                               const std::string& pool_path, const Backend& backend) {
    const auto instances = ingest_dataset(dataset_path);
    const selection::DemoPool pool(ingest_pool(pool_path));

    selection::PipelineOptions options;
    options.k = config.k;
    options.prefilter_m = config.prefilter_m;
    options.bm25 = config.retrieval.bm25;
    options.template_spec = config.template_spec;
    options.max_tokens = config.max_tokens;
    options.seed = config.seed;
    options.jobs = config.jobs;

    std::vector<nlohmann::ordered_json> lines;
    lines.reserve(instances.size());
    for (const auto& instance : instances) {
        selection::Selection chosen;
        try {
            chosen = selection::select_pipeline(instance.question, pool, backend, options);
        } catch (const Error& e) {
            throw Error("selection failed for instance '" + instance.id + "': " + e.what());
        }
        nlohmann::ordered_json line;
        line["id"] = instance.id;
        line["x_hat"] = chosen.x_hat;
        auto candidates = nlohmann::ordered_json::array();
        for (const auto& c : chosen.candidates) {
            candidates.push_back({{"id", c.doc_id}, {"bm25", round_for_report(c.score)}});
        }
        line["candidates"] = std::move(candidates);
        auto selected = nlohmann::ordered_json::array();
        for (const auto& s : chosen.selected) {
            selected.push_back({{"id", s.demo.id}, {"gain", round_for_report(s.gain)}});
        }
        line["selected"] = std::move(selected);
        lines.push_back(std::move(line));
    }
    write_file(out_path(config, "selections.jsonl"), jsonl(lines));
    return lines;
}

SynthesizeResult cmd_synthesize(const RunConfig& config, const std::string& dataset_path,
                                const std::optional<std::string>& pool_path, const Backend& backend) {
    require_shots(config);
    const auto instances = ingest_dataset(dataset_path);
    if (instances.size() < 2) throw InvalidInput(dataset_path + ": label-free LCS needs at least 2 questions");
    const auto prompt = synthesis::PromptTemplate::load(
        synthesis::PromptKind::synthesize,
        config.synthesize_prompt.empty() ? default_prompt_path(false) : config.synthesize_prompt);

    std::vector<std::string> questions, ids;
    for (const auto& instance : instances) {
        questions.push_back(instance.question);
        ids.push_back(instance.id);
    }
    const auto options = fit_options(config);
    auto batch = synthesis::synthetic_batch(questions, backend, prompt, config.shots, options, ids);
    // Correctness flags describe the labeled run; they carry over so bad-case
    // subsetting selects the same questions.
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i].instance.correctness_1shot = instances[i].correctness_1shot;

    auto points = analysis::score_all(batch, backend, config.template_spec, config.jobs);
    analysis::sort_points(points);

    SynthesizeResult result;
    result.synthetic_report = fit_report(points, config, Origin::synthetic);

    std::vector<nlohmann::ordered_json> demos;
    for (const auto& entry : batch) {
        for (const auto& demo : entry.demos) demos.push_back(to_json(demo));
    }

    std::optional<std::string> labeled_text;
    if (pool_path) {
        const auto labeled_batch = attach_demos(instances, ingest_pool(*pool_path), config);
        auto labeled_points = analysis::score_all(labeled_batch, backend, config.template_spec, config.jobs);
        result.labeled_report = fit_report(labeled_points, config, Origin::labeled);
        labeled_text = dump_report(*result.labeled_report);
    }

    write_file(out_path(config, "synthetic_pool.jsonl"), jsonl(demos));
    write_file(out_path(config, "report.json"), dump_report(result.synthetic_report));
    write_file(out_path(config, "points.csv"), points_csv(points));
    if (labeled_text) write_file(out_path(config, "labeled_report.json"), *labeled_text);
    return result;
}

ParaphraseSummary cmd_paraphrase(const RunConfig& config, const std::string& dataset_path,
                                 const Backend& backend) {
    const auto records = read_dataset(dataset_path);
    const auto prompt = synthesis::PromptTemplate::load(
        synthesis::PromptKind::paraphrase,
        config.paraphrase_prompt.empty() ? default_prompt_path(true) : config.paraphrase_prompt);

    synthesis::ParaphraseOptions options;
    options.generation.max_tokens = config.max_tokens;
    options.generation.seed = config.seed;
    options.strict = config.strict_paraphrase;

    std::vector<std::optional<synthesis::ParaphraseResult>> results(records.size());
    parallel_for(records.size(), config.jobs, [&](std::size_t i) {
        results[i] = synthesis::paraphrase(records[i].value, backend, prompt, options);
    });

    ParaphraseSummary summary;
    summary.total = records.size();
    std::string out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = *results[i];
        if (!r.warning.empty()) summary.warnings.push_back(dataset_path + ":" + std::to_string(records[i].line) +
                                                           ": " + r.warning);
        if (r.changed) {
            ++summary.changed;
            out += to_json(r.instance).dump() + "\n";
        } else {
            out += records[i].raw + "\n";
        }
    }
    write_file(out_path(config, "paraphrased.jsonl"), out);
    return summary;
}

nlohmann::ordered_json cmd_oracle_verify(const RunConfig& config, std::size_t worlds) {
    using namespace oracle;
    if (worlds == 0) throw InvalidInput("oracle-verify needs at least one world");
    const std::size_t constructed = std::max<std::size_t>(worlds, 50);

    IdentityReport t1_total, bayes_total;
    t1_total.tolerance = 1e-12;
    bayes_total.tolerance = 1e-10;
    Rng world_rng(config.seed);
    for (std::size_t i = 0; i < worlds; ++i) {
        const auto world = random_world(world_rng);
        for (auto [total, part] : {std::pair{&t1_total, verify_theorem1(world)},
                                   std::pair{&bayes_total, verify_bayes_decomposition(world)}}) {
            total->max_residual = std::max(total->max_residual, part.max_residual);
            total->max_abs_gain_term = std::max(total->max_abs_gain_term, part.max_abs_gain_term);
            total->checked += part.checked;
            total->skipped += part.skipped;
            total->pass = total->pass && part.pass;
        }
    }
    auto identity_json = [](const IdentityReport& r) {
        nlohmann::ordered_json j;
        j["max_residual"] = r.max_residual;
        j["tolerance"] = r.tolerance;
        j["checked"] = r.checked;
        j["skipped"] = r.skipped;
        j["max_abs_gain_term"] = round_for_report(r.max_abs_gain_term);
        j["pass"] = r.pass;
        return j;
    };

    // Constructed premise-satisfying cases: the inequality must hold in each.
    std::size_t t2_holds = 0, t2_violated = 0, t2_premise = 0;
    double t2_min_margin = 0.0;
    bool first_margin = true;
    Rng t2_rng(config.seed + 1);
    for (std::size_t i = 0; i < constructed; ++i) {
        const auto c = premise_satisfying_case(t2_rng);
        const auto report = verify_theorem2(c.oracle, c.empirical, c.d_hat, c.d_star);
        if (report.status == VerdictStatus::holds) ++t2_holds;
        else if (report.status == VerdictStatus::violated) ++t2_violated;
        else ++t2_premise;
        for (const auto& check : report.per_question) {
            const double margin = check.star_ratio - check.hat_ratio;
            if (first_margin || margin < t2_min_margin) t2_min_margin = margin;
            first_margin = false;
        }
    }

    // Unconstrained worlds: premises usually fail; a violated verdict would be
    // an inequality asserted against its own premises.
    std::size_t guard_premise = 0, guard_holds = 0, guard_violated = 0;
    Rng guard_rng(config.seed + 2);
    for (std::size_t i = 0; i < worlds; ++i) {
        const auto oracle_world = random_world(guard_rng, 4);
        const auto report = verify_theorem2(oracle_world, "d0", "d1");
        if (report.status == VerdictStatus::premise_failed) ++guard_premise;
        else if (report.status == VerdictStatus::holds) ++guard_holds;
        else ++guard_violated;
    }

    std::size_t eb_cases = 0, eb_accepted = 0, eb_violated = 0, eb_premise = 0;
    double eb_max_gap = 0.0;
    bool first_gap = true;
    Rng eb_rng(config.seed + 3);
    for (std::size_t i = 0; i < constructed; ++i) {
        const auto pw = sample_premise_satisfying_perturbation(eb_rng);
        if (!pw) throw Error("oracle-verify: no premise-satisfying perturbation found for case " + std::to_string(i));
        ++eb_cases;
        const auto report = verify_error_bound(*pw);
        eb_accepted += report.accepted;
        eb_premise += report.premise_failures;
        for (const auto& check : report.checks) {
            if (check.status == VerdictStatus::violated) ++eb_violated;
            if (check.status == VerdictStatus::premise_failed) continue;
            const double gap = check.delta_slope - check.delta_ratio;
            if (first_gap || gap > eb_max_gap) eb_max_gap = gap;
            first_gap = false;
        }
    }

    nlohmann::ordered_json j;
    j["worlds"] = worlds;
    j["seed"] = config.seed;
    j["theorem1"] = identity_json(t1_total);
    j["bayes_decomposition"] = identity_json(bayes_total);

    nlohmann::ordered_json t2;
    t2["cases"] = constructed;
    t2["holds"] = t2_holds;
    t2["violated"] = t2_violated;
    t2["premise_failed"] = t2_premise;
    t2["min_ratio_margin"] = round_for_report(t2_min_margin);
    t2["pass"] = t2_holds == constructed;
    j["theorem2"] = t2;

    nlohmann::ordered_json guard;
    guard["worlds"] = worlds;
    guard["premise_failed"] = guard_premise;
    guard["holds"] = guard_holds;
    guard["violated"] = guard_violated;
    guard["pass"] = guard_violated == 0;
    j["theorem2_premise_guard"] = guard;

    nlohmann::ordered_json eb;
    eb["cases"] = eb_cases;
    eb["accepted"] = eb_accepted;
    eb["violated"] = eb_violated;
    eb["premise_failed"] = eb_premise;
    eb["max_delta_gap"] = round_for_report(eb_max_gap);
    eb["pass"] = eb_violated == 0 && eb_premise == 0 && eb_accepted >= constructed;
    j["error_bound"] = eb;

    j["pass"] = t1_total.pass && bayes_total.pass && t2["pass"].get<bool>() && guard["pass"].get<bool>() &&
                eb["pass"].get<bool>();
    write_file(out_path(config, "oracle_report.json"), dump_report(j));
    return j;
}

}  // namespace iclslope::cli

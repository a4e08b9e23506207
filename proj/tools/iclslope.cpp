#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "iclslope/analysis.hpp"
#include "iclslope/cli/commands.hpp"
#include "iclslope/cli/config.hpp"
#include "iclslope/cli/dataset.hpp"

using namespace iclslope;

namespace {

enum Exit : int {
    ok = 0,
    failure = 1,
    usage = 2,  // bad flags, config or input files
    degenerate_fit = 3,
    backend_failure = 4,
    verification_failed = 5,
};

struct CommonFlags {
    std::optional<std::string> config;
    std::optional<std::string> backend;
    std::optional<std::string> endpoint;
    std::optional<std::string> corpus;
    std::optional<std::string> template_name;
    std::optional<std::size_t> shots;
    std::optional<std::string> retrieval;
    std::optional<std::size_t> k;
    std::optional<std::size_t> prefilter_m;
    bool no_prefilter = false;
    std::optional<double> threshold;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> subset;
    std::optional<std::string> orientation;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> jobs;
    std::optional<std::size_t> max_tokens;
    std::optional<std::string> prompt;
    bool strict = false;
};

void add_common(CLI::App& app, CommonFlags& f) {
    app.add_option("--config", f.config, "JSON configuration file");
    app.add_option("--backend", f.backend, "reference | remote");
    app.add_option("--endpoint", f.endpoint, "remote scoring server, http://host:port[/base]");
    app.add_option("--corpus", f.corpus, "training text for the reference model");
    app.add_option("--template", f.template_name, "plain_concat | chat_minimal");
    app.add_option("--shots", f.shots, "demonstrations per instance");
    app.add_option("--retrieval", f.retrieval, "bm25 | ngram | cosine");
    app.add_option("--k", f.k, "demonstrations to select");
    app.add_option("--threshold", f.threshold, "LCS threshold for effective ICL");
    app.add_option("--seed", f.seed, "generation and sampling seed");
    app.add_option("--subset", f.subset, "all | bad_cases");
    app.add_option("--orientation", f.orientation, "theorem_consistent | eq3_as_printed");
    app.add_option("--out-dir", f.out_dir, "directory for output files");
    app.add_option("--jobs", f.jobs, "worker threads");
    app.add_option("--max-tokens", f.max_tokens, "generation length limit");
}

nlohmann::json flag_patch(const CommonFlags& f) {
    nlohmann::json patch = nlohmann::json::object();
    if (f.backend) patch["backend"] = *f.backend;
    if (f.endpoint) patch["endpoint"] = *f.endpoint;
    if (f.corpus) patch["corpus"] = *f.corpus;
    if (f.template_name) patch["template"] = {{"name", *f.template_name}};
    if (f.shots) patch["shots"] = *f.shots;
    if (f.retrieval) patch["retrieval"] = *f.retrieval;
    if (f.k) patch["k"] = *f.k;
    if (f.prefilter_m) patch["prefilter_m"] = *f.prefilter_m;
    if (f.no_prefilter) patch["prefilter_m"] = nullptr;
    if (f.threshold) patch["threshold"] = *f.threshold;
    if (f.seed) patch["seed"] = *f.seed;
    if (f.subset) patch["subset"] = *f.subset;
    if (f.orientation) patch["orientation"] = *f.orientation;
    if (f.out_dir) patch["out_dir"] = *f.out_dir;
    if (f.jobs) patch["jobs"] = *f.jobs;
    if (f.max_tokens) patch["max_tokens"] = *f.max_tokens;
    if (f.strict) patch["strict_paraphrase"] = true;
    return patch;
}

cli::RunConfig resolve(const CommonFlags& f, const char* prompt_key = nullptr) {
    auto patch = flag_patch(f);
    if (prompt_key && f.prompt) patch[prompt_key] = *f.prompt;
    return cli::resolve_config(f.config, cli::process_env(), patch);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning-to-context slope toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string dataset, pool;
    std::optional<std::string> synth_pool;
    std::size_t worlds = 100;

    auto* evaluate = app.add_subcommand("evaluate", "score a dataset against a pool and fit the LCS");
    add_common(*evaluate, flags);
    evaluate->add_option("--dataset", dataset, "test instances (JSONL)")->required();
    evaluate->add_option("--pool", pool, "demonstration pool (JSONL)")->required();

    auto* select = app.add_subcommand("select", "choose demonstrations by learning gain");
    add_common(*select, flags);
    select->add_option("--dataset", dataset, "questions (JSONL)")->required();
    select->add_option("--pool", pool, "demonstration pool (JSONL)")->required();
    select->add_option("--prefilter-m", flags.prefilter_m, "BM25 candidates passed to the reranker");
    select->add_flag("--no-prefilter", flags.no_prefilter, "rerank the whole pool");

    auto* synthesize = app.add_subcommand("synthesize", "LCS from questions with synthetic demonstrations");
    add_common(*synthesize, flags);
    synthesize->add_option("--dataset", dataset, "questions (JSONL)")->required();
    synthesize->add_option("--pool", synth_pool, "labeled pool for a side-by-side labeled fit");
    synthesize->add_option("--prompt", flags.prompt, "synthesis prompt file");

    auto* paraphrase = app.add_subcommand("paraphrase", "restyle reasoning with the model");
    add_common(*paraphrase, flags);
    paraphrase->add_option("--dataset", dataset, "instances (JSONL)")->required();
    paraphrase->add_option("--prompt", flags.prompt, "paraphrase prompt file");
    paraphrase->add_flag("--strict", flags.strict, "fail instead of passing instances through");

    auto* verify = app.add_subcommand("oracle-verify", "check the identities on random finite worlds");
    add_common(*verify, flags);
    verify->add_option("--worlds", worlds, "number of random worlds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Exit::ok : Exit::usage;
    }

    try {
        if (evaluate->parsed()) {
            const auto config = resolve(flags);
            const auto backend = cli::make_backend(config);
            const auto result = cli::cmd_evaluate(config, dataset, pool, *backend);
            std::cout << result.report.dump(2) << "\n";
        } else if (select->parsed()) {
            const auto config = resolve(flags);
            const auto backend = cli::make_backend(config);
            const auto lines = cli::cmd_select(config, dataset, pool, *backend);
            std::cout << "selected demonstrations for " << lines.size() << " instances\n";
        } else if (synthesize->parsed()) {
            const auto config = resolve(flags, "synthesize_prompt");
            const auto backend = cli::make_backend(config);
            const auto result = cli::cmd_synthesize(config, dataset, synth_pool, *backend);
            std::cout << result.synthetic_report.dump(2) << "\n";
            if (result.labeled_report) std::cout << result.labeled_report->dump(2) << "\n";
        } else if (paraphrase->parsed()) {
            const auto config = resolve(flags, "paraphrase_prompt");
            const auto backend = cli::make_backend(config);
            const auto summary = cli::cmd_paraphrase(config, dataset, *backend);
            for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "paraphrased " << summary.changed << " of " << summary.total << " instances\n";
        } else if (verify->parsed()) {
            const auto config = resolve(flags);
            const auto report = cli::cmd_oracle_verify(config, worlds);
            std::cout << report.dump(2) << "\n";
            if (!report["pass"].get<bool>()) return Exit::verification_failed;
        }
    } catch (const DegenerateFit& e) {
        std::cerr << "error: degenerate fit: " << e.what() << "\n";
        return Exit::degenerate_fit;
    } catch (const analysis::ScoringFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::backend_failure;
    } catch (const BackendError& e) {
        std::cerr << "error: backend: " << e.what() << "\n";
        return Exit::backend_failure;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::usage;
    } catch (const cli::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::usage;
    } catch (const MissingCorrectness& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::failure;
    }
    return Exit::ok;
}

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iclslope/analysis.hpp"
#include "iclslope/cli/commands.hpp"
#include "iclslope/cli/config.hpp"
#include "iclslope/cli/dataset.hpp"
#include "iclslope/oracle.hpp"
#include "iclslope/retrieval.hpp"
#include "iclslope/table_backend.hpp"

using namespace iclslope;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = ICLSLOPE_FIXTURE_DIR;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* pattern, double value) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("iclslope-acceptance-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ScoredPoint point(double s, double t, std::size_t i) {
    const auto half = NormalizedLikelihood::from_value(0.5);
    return ScoredPoint{"i" + std::to_string(i), "d", s, t, {half, half, half, half}, std::nullopt};
}

std::vector<ScoredPoint> points(std::initializer_list<std::pair<double, double>> st) {
    std::vector<ScoredPoint> out;
    for (auto [s, t] : st) out.push_back(point(s, t, out.size()));
    return out;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Criteria 1-4 share one oracle-verify run.
nlohmann::ordered_json oracle_report;
double oracle_seconds = 0.0;

void run_oracle_verify() {
    cli::RunConfig config;
    config.seed = 20240501;
    config.out_dir = scratch_dir("oracle").string();
    const auto start = std::chrono::steady_clock::now();
    oracle_report = cli::cmd_oracle_verify(config, 100);
    oracle_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome criterion1() {
    Outcome o;
    const auto& t1 = oracle_report["theorem1"];
    const double residual = t1["max_residual"].get<double>();
    o.require(residual <= 1e-12, "theorem-1 residual " + fmt("%.3g", residual));
    o.require(t1["checked"].get<std::size_t>() > 0, "no triples checked");
    o.require(oracle_seconds < 5.0, "runtime " + fmt("%.3f s", oracle_seconds));
    if (o.pass) o.detail = "max residual " + fmt("%.3g", residual) + " over 100 worlds in " + fmt("%.3f s", oracle_seconds);
    return o;
}

Outcome criterion2() {
    Outcome o;
    const double residual = oracle_report["bayes_decomposition"]["max_residual"].get<double>();
    o.require(residual <= 1e-10, "bayes residual " + fmt("%.3g", residual));
    if (o.pass) o.detail = "max residual " + fmt("%.3g", residual);
    return o;
}

Outcome criterion3() {
    Outcome o;
    const auto& t2 = oracle_report["theorem2"];
    const auto cases = t2["cases"].get<std::size_t>();
    o.require(cases >= 50, "only " + std::to_string(cases) + " constructed cases");
    o.require(t2["holds"].get<std::size_t>() == cases, "inequality failed on a premise-satisfying case");
    const auto& guard = oracle_report["theorem2_premise_guard"];
    o.require(guard["violated"].get<std::size_t>() == 0, "a random world reported a false assertion");
    if (o.pass) {
        o.detail = std::to_string(cases) + " constructed cases hold; " +
                   std::to_string(guard["premise_failed"].get<std::size_t>()) + " of " +
                   std::to_string(guard["worlds"].get<std::size_t>()) + " random worlds report premise failure";
    }
    return o;
}

Outcome criterion4() {
    Outcome o;
    const auto& eb = oracle_report["error_bound"];
    const auto accepted = eb["accepted"].get<std::size_t>();
    o.require(accepted >= 50, "only " + std::to_string(accepted) + " accepted perturbations");
    o.require(eb["violated"].get<std::size_t>() == 0, "bound violated");
    o.require(eb["premise_failed"].get<std::size_t>() == 0, "sampled perturbation failed a premise");
    if (o.pass) {
        o.detail = std::to_string(accepted) + " perturbations, max (delta_I - delta_p) " +
                   fmt("%.3g", eb["max_delta_gap"].get<double>());
    }
    return o;
}

Outcome criterion5() {
    using analysis::fit_lcs;
    Outcome o;
    const auto line = fit_lcs(points({{0, 0}, {1, 2}, {2, 4}}));
    o.require(near(line.slope, 2.0, 1e-12) && near(line.intercept, 0.0, 1e-12) && near(line.pearson, 1.0, 1e-12),
              "exact line");
    const auto flat = fit_lcs(points({{0, 1}, {1, 1}, {2, 1}}));
    o.require(near(flat.slope, 0.0, 1e-12) && near(flat.intercept, 1.0, 1e-12), "flat line");
    const auto bent = fit_lcs(points({{0, 0}, {1, 1}, {2, 3}}));
    o.require(near(bent.slope, 1.5, 1e-12) && near(bent.intercept, -1.0 / 6.0, 1e-12), "three-point fit");

    oracle::Rng rng(11);
    const auto world = oracle::constant_ratio_world(3, 4, 2, rng);  // ratio 4/2
    const auto fit = fit_lcs(oracle::sample_points(world, 1000, 99));
    o.require(near(fit.slope, 2.0, 1e-12), "constant-ratio slope " + fmt("%.17g", fit.slope));
    o.require(near(fit.pearson, 1.0, 1e-12), "constant-ratio pearson " + fmt("%.17g", fit.pearson));
    if (o.pass) o.detail = "hand examples exact; 1000-point constant-ratio slope " + fmt("%.15g", fit.slope);
    return o;
}

Outcome criterion6() {
    using analysis::classify;
    using analysis::Classification;
    Outcome o;
    o.require(classify(0.07) == Classification::ineffective, "0.07");
    o.require(classify(0.94) == Classification::effective, "0.94");
    o.require(classify(1.06) == Classification::effective, "1.06");
    o.require(classify(0.2) == Classification::ineffective, "0.2 boundary");
    if (o.pass) o.detail = "0.07 ineffective, 0.94 effective, 1.06 effective, 0.2 ineffective";
    return o;
}

cli::RunConfig fixture_config(const fs::path& out) {
    cli::RunConfig config;
    config.corpus = fixture("lcs_corpus.txt");
    config.out_dir = out.string();
    return config;
}

Outcome criterion7() {
    Outcome o;
    const auto golden_report = slurp(fixture("golden/report.json"));
    const auto golden_points = slurp(fixture("golden/points.csv"));
    for (int run = 0; run < 2; ++run) {
        const auto dir = scratch_dir("evaluate-" + std::to_string(run));
        auto config = fixture_config(dir);
        config.jobs = run == 0 ? 1 : 4;
        const auto backend = cli::make_backend(config);
        cli::cmd_evaluate(config, fixture("lcs_dataset.jsonl"), fixture("lcs_pool_informative.jsonl"), *backend);
        o.require(slurp((dir / "report.json").string()) == golden_report,
                  "report.json differs on run " + std::to_string(run + 1));
        o.require(slurp((dir / "points.csv").string()) == golden_points,
                  "points.csv differs on run " + std::to_string(run + 1));
        fs::remove_all(dir);
    }
    if (o.pass) o.detail = "report.json and points.csv identical to golden on two runs";
    return o;
}

double paired_slope(const std::string& pool_file, const Backend& backend, const TemplateSpec& spec) {
    const auto instances = cli::ingest_dataset(fixture("lcs_dataset.jsonl"));
    const auto pool = cli::ingest_pool(fixture(pool_file));
    if (pool.size() != instances.size()) throw Error("fixture size mismatch");
    std::vector<analysis::InstanceWithDemos> batch;
    for (std::size_t i = 0; i < instances.size(); ++i) batch.push_back({instances[i], {pool[i]}});
    return analysis::fit_lcs(analysis::score_all(batch, backend, spec)).slope;
}

Outcome criterion8() {
    Outcome o;
    const auto config = fixture_config(scratch_dir("monotone"));
    const auto backend = cli::make_backend(config);
    const double informative = paired_slope("lcs_pool_informative.jsonl", *backend, config.template_spec);
    const double shuffled = paired_slope("lcs_pool_shuffled.jsonl", *backend, config.template_spec);
    o.require(informative > shuffled, "informative LCS does not exceed shuffled");
    o.require(informative > 0.2, "informative LCS " + fmt("%.6g", informative) + " <= 0.2");
    o.require(shuffled <= 0.2, "shuffled LCS " + fmt("%.6g", shuffled) + " > 0.2");
    o.detail = (o.pass ? std::string() : o.detail + "; ") + "informative " + fmt("%.6g", informative) +
               ", shuffled " + fmt("%.6g", shuffled);
    return o;
}

Outcome criterion9() {
    using namespace retrieval;
    Outcome o;
    const auto index = CorpusIndex::build({{"doc1", "a b"}, {"doc2", "a c"}});
    const double bm25 = bm25_score("c", "doc2", index);
    o.require(near(bm25, std::log(2.0), 1e-9) && near(bm25, 0.6931, 1e-4), "bm25 " + fmt("%.12g", bm25));
    o.require(bm25_score("c", "doc1", index) == 0.0, "bm25 doc1 nonzero");
    o.require(near(ngram_overlap("a b c", "a b d", 2), 0.5, 1e-9), "n-gram");
    o.require(near(tf_cosine("a a b", "a b b"), 0.8, 1e-9), "cosine");

    const auto first = top_k("c", index, 1);
    o.require(first.size() == 1 && first[0].doc_id == "doc2", "top_k on the bm25 fixture");
    const auto tied = CorpusIndex::build({{"z", "same text"}, {"m", "same text"}, {"a", "same text"}});
    for (int repeat = 0; repeat < 3; ++repeat) {
        const auto ranked = top_k("same", tied, 3);
        o.require(ranked.size() == 3 && ranked[0].doc_id == "a" && ranked[1].doc_id == "m" && ranked[2].doc_id == "z",
                  "tie order");
    }
    if (o.pass) o.detail = "bm25 " + fmt("%.10g", bm25) + ", n-gram 0.5, cosine 0.8, ties by ascending id";
    return o;
}

// Ten instances drawn from a constant-ratio world, scored through a table
// backend that serves the world's exact conditionals for every prompt.
Outcome criterion10() {
    Outcome o;
    oracle::Rng rng(31);
    const auto world = oracle::constant_ratio_world(4, 3, 4, rng);  // ratio 3/4
    const TemplateSpec spec;
    TableBackend table;

    std::vector<analysis::InstanceWithDemos> three_shot, one_shot;
    for (std::size_t i = 0; i < 10; ++i) {
        const std::size_t q = rng.index(world.q_count());
        const std::size_t x = rng.index(world.x_count());
        TaskInstance instance;
        instance.id = "inst" + std::to_string(i);
        instance.question = world.q_symbols()[q];
        instance.reference_output = world.x_symbols()[x];
        const auto output = analysis::output_text(instance, spec);

        std::vector<Demonstration> demos;
        for (std::size_t j = 0; j < 3; ++j) {
            const std::size_t d = (i + j) % world.d_count();
            Demonstration demo;
            demo.id = world.d_symbols()[d];
            demo.question = world.d_symbols()[d];
            demo.output = "answer";
            const auto c = oracle::triple_conditionals(world, q, x, d);
            table.add_score(analysis::output_given_question(instance.question, output, spec),
                            NormalizedLikelihood::from_value(c.p_x_q));
            table.add_score(analysis::output_given_question_demo(instance.question, output, demo, spec),
                            NormalizedLikelihood::from_value(c.p_x_qd));
            table.add_score(analysis::demo_given_question(instance.question, demo, spec),
                            NormalizedLikelihood::from_value(c.p_d_q));
            table.add_score(analysis::demo_given_question_output(instance.question, output, demo, spec),
                            NormalizedLikelihood::from_value(c.p_d_qx));
            demos.push_back(std::move(demo));
        }
        one_shot.push_back({instance, {demos.front()}});
        three_shot.push_back({instance, std::move(demos)});
    }

    const auto pts3 = analysis::score_all(three_shot, table, spec, 4);
    const auto pts1 = analysis::score_all(one_shot, table, spec, 4);
    o.require(pts3.size() == 30, "shots=3 gave " + std::to_string(pts3.size()) + " points");
    o.require(pts1.size() == 10, "shots=1 gave " + std::to_string(pts1.size()) + " points");
    const double slope3 = analysis::fit_lcs(pts3).slope;
    const double slope1 = analysis::fit_lcs(pts1).slope;
    o.require(std::abs(slope3 - slope1) <= 0.05, "slope difference " + fmt("%.6g", slope3 - slope1));
    if (o.pass) {
        o.detail = "30 points; slope " + fmt("%.12g", slope3) + " (3-shot) vs " + fmt("%.12g", slope1) + " (1-shot)";
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"Theorem-1 exactness on random worlds", criterion1},
        {"Bayes decomposition residual", criterion2},
        {"Theorem-2 inequality and premise guard", criterion3},
        {"error bound on sampled perturbations", criterion4},
        {"least-squares correctness", criterion5},
        {"threshold classification readings", criterion6},
        {"end-to-end determinism against golden files", criterion7},
        {"informative vs shuffled demonstrations", criterion8},
        {"BM25 and similarity fixtures", criterion9},
        {"k-shot explosion on a constant-ratio world", criterion10},
    };

    bool oracle_ok = true;
    std::string oracle_error;
    try {
        run_oracle_verify();
    } catch (const std::exception& e) {
        oracle_ok = false;
        oracle_error = e.what();
    }

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        if (i < 4 && !oracle_ok) {
            outcome = {false, "oracle-verify threw: " + oracle_error};
        } else {
            try {
                outcome = criteria[i].second();
            } catch (const std::exception& e) {
                outcome = {false, std::string("threw: ") + e.what()};
            }
        }
        if (!outcome.pass) ++failures;
        std::printf("%s criterion %zu: %s (%s)\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    outcome.detail.c_str());
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}

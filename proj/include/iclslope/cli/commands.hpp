#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iclslope/analysis.hpp"
#include "iclslope/backend.hpp"
#include "iclslope/cli/config.hpp"
#include "iclslope/core.hpp"

namespace iclslope::cli {

/// Picks config.shots demonstrations per instance from the pool with the
/// configured retrieval method (query = instance question, documents = demo
/// questions). With method "cosine", instances and demos that all carry
/// embeddings are matched by embedding cosine instead of term frequencies.
std::vector<analysis::InstanceWithDemos> attach_demos(const std::vector<TaskInstance>& instances,
                                                      const std::vector<Demonstration>& pool,
                                                      const RunConfig& config);

struct EvaluateResult {
    nlohmann::ordered_json report;
    std::vector<ScoredPoint> points;  // every scored point, before subsetting
};

/// Scores, fits and writes report.json and points.csv into config.out_dir.
/// Throws DegenerateFit when the (subset of) points cannot be fitted; nothing
/// is written in that case.
EvaluateResult cmd_evaluate(const RunConfig& config, const std::string& dataset_path, const std::string& pool_path,
                            const Backend& backend);

/// Writes selections.jsonl: one line per instance with X̂, the BM25 candidates
/// and the demonstrations chosen by learning gain.
std::vector<nlohmann::ordered_json> cmd_select(const RunConfig& config, const std::string& dataset_path,
                                               const std::string& pool_path, const Backend& backend);

struct SynthesizeResult {
    nlohmann::ordered_json synthetic_report;
    std::optional<nlohmann::ordered_json> labeled_report;
};

/// Label-free LCS over the dataset questions with config.shots synthetic
/// demonstrations each. Writes synthetic_pool.jsonl and report.json; when a pool
/// is given, also fits the labeled pipeline and writes labeled_report.json so
/// the two slopes can be compared.
SynthesizeResult cmd_synthesize(const RunConfig& config, const std::string& dataset_path,
                                const std::optional<std::string>& pool_path, const Backend& backend);

struct ParaphraseSummary {
    std::size_t total = 0;
    std::size_t changed = 0;
    std::vector<std::string> warnings;
};

/// Writes paraphrased.jsonl. Lines whose instance is left alone are copied
/// byte for byte from the input.
ParaphraseSummary cmd_paraphrase(const RunConfig& config, const std::string& dataset_path,
                                 const Backend& backend);

/// Runs every oracle verifier over `worlds` random worlds (at least 50
/// constructed cases for the Theorem-2 and error-bound checks) and writes
/// oracle_report.json. The report's "pass" field is the overall verdict.
nlohmann::ordered_json cmd_oracle_verify(const RunConfig& config, std::size_t worlds);

/// Default prompt file for a kind, from the shipped prompts directory.
std::string default_prompt_path(bool paraphrase);

}  // namespace iclslope::cli

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "iclslope/analysis.hpp"
#include "iclslope/backend.hpp"
#include "iclslope/retrieval.hpp"

namespace iclslope::cli {

enum class BackendKind { reference, remote };
enum class Subset { all, bad_cases };

std::string_view to_string(BackendKind kind);
std::string_view to_string(Subset subset);

inline constexpr const char* kEndpointEnv = "ICLSLOPE_ENDPOINT";
inline constexpr const char* kTokenEnv = "ICLSLOPE_TOKEN";

struct RunConfig {
    BackendKind backend = BackendKind::reference;
    std::string endpoint;
    std::string token;
    /// Training text for the reference model, one sequence per line.
    std::string corpus;
    double alpha = 1.0;
    bool include_unk = true;

    TemplateSpec template_spec;
    std::size_t shots = 1;
    retrieval::Options retrieval;
    std::size_t k = 1;
    std::optional<std::size_t> prefilter_m = 50;
    double threshold = analysis::kDefaultThreshold;
    std::size_t max_tokens = kDefaultMaxTokens;
    std::uint64_t seed = 0;
    bool strict_paraphrase = false;
    Subset subset = Subset::all;
    analysis::Orientation orientation = analysis::Orientation::theorem_consistent;

    std::size_t jobs = 4;
    std::size_t max_in_flight = 8;
    std::size_t max_retries = 4;

    std::string out_dir = ".";
    std::string paraphrase_prompt;
    std::string synthesize_prompt;
};

/// Overlays the keys present in `patch` onto `config`. Keys use the config
/// file spelling (e.g. "shots", "retrieval", "k1", "template"). Unknown keys and
/// ill-typed values throw InvalidInput naming the key.
void apply_json(RunConfig& config, const nlohmann::json& patch, const std::string& source);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

/// Applies ICLSLOPE_ENDPOINT and ICLSLOPE_TOKEN when set.
void apply_env(RunConfig& config, const EnvLookup& env);

/// defaults < config file < environment < flags.
RunConfig resolve_config(const std::optional<std::string>& config_path, const EnvLookup& env,
                         const nlohmann::json& flag_overrides);

/// Throws InvalidInput for inconsistent settings (remote without endpoint,
/// reference without corpus, zero jobs, ...).
void validate(const RunConfig& config);

std::unique_ptr<Backend> make_backend(const RunConfig& config);

}  // namespace iclslope::cli

#include "iclslope/cli/config.hpp"

#include <cstdlib>
#include <fstream>

#include "iclslope/reference_lm.hpp"
#include "iclslope/remote_backend.hpp"

namespace iclslope::cli {

using json = nlohmann::json;

std::string_view to_string(BackendKind kind) { return kind == BackendKind::remote ? "remote" : "reference"; }

std::string_view to_string(Subset subset) { return subset == Subset::bad_cases ? "bad_cases" : "all"; }

namespace {

template <typename T>
T get_as(const json& value, const std::string& key, const std::string& source) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw InvalidInput(source + ": setting '" + key + "' has the wrong type");
    }
}

std::size_t get_count(const json& value, const std::string& key, const std::string& source) {
    if (!value.is_number_integer() || value.get<long long>() < 0) {
        throw InvalidInput(source + ": setting '" + key + "' must be a non-negative integer");
    }
    return value.get<std::size_t>();
}

}  // namespace

void apply_json(RunConfig& config, const json& patch, const std::string& source) {
    if (!patch.is_object()) throw InvalidInput(source + ": configuration must be a JSON object");
    for (const auto& [key, value] : patch.items()) {
        try {
            if (key == "backend") {
                const auto name = get_as<std::string>(value, key, source);
                if (name == "reference") config.backend = BackendKind::reference;
                else if (name == "remote") config.backend = BackendKind::remote;
                else throw InvalidInput("unknown backend '" + name + "'");
            } else if (key == "endpoint") {
                config.endpoint = get_as<std::string>(value, key, source);
            } else if (key == "token") {
                config.token = get_as<std::string>(value, key, source);
            } else if (key == "corpus") {
                config.corpus = get_as<std::string>(value, key, source);
            } else if (key == "alpha") {
                config.alpha = get_as<double>(value, key, source);
            } else if (key == "include_unk") {
                config.include_unk = get_as<bool>(value, key, source);
            } else if (key == "template") {
                if (!value.is_object()) throw InvalidInput("'template' must be an object");
                for (const auto& [tkey, tval] : value.items()) {
                    if (tkey == "name") {
                        config.template_spec.kind = template_kind_from_string(get_as<std::string>(tval, tkey, source));
                    } else if (tkey == "separator") {
                        config.template_spec.separator = get_as<std::string>(tval, tkey, source);
                    } else if (tkey == "role_markers") {
                        if (tval.is_null()) {
                            config.template_spec.role_markers.reset();
                        } else {
                            auto markers = get_as<std::vector<std::string>>(tval, tkey, source);
                            if (markers.size() != 2) throw InvalidInput("'role_markers' needs exactly two strings");
                            config.template_spec.role_markers = std::make_pair(markers[0], markers[1]);
                        }
                    } else {
                        throw InvalidInput("unknown template setting '" + tkey + "'");
                    }
                }
            } else if (key == "shots") {
                config.shots = get_count(value, key, source);
            } else if (key == "retrieval") {
                config.retrieval.method = retrieval::method_from_string(get_as<std::string>(value, key, source));
            } else if (key == "k1") {
                config.retrieval.bm25.k1 = get_as<double>(value, key, source);
            } else if (key == "b") {
                config.retrieval.bm25.b = get_as<double>(value, key, source);
            } else if (key == "ngram_n") {
                config.retrieval.ngram_n = get_count(value, key, source);
            } else if (key == "k") {
                config.k = get_count(value, key, source);
            } else if (key == "prefilter_m") {
                if (value.is_null()) config.prefilter_m.reset();
                else config.prefilter_m = get_count(value, key, source);
            } else if (key == "threshold") {
                config.threshold = get_as<double>(value, key, source);
            } else if (key == "max_tokens") {
                config.max_tokens = get_count(value, key, source);
            } else if (key == "seed") {
                config.seed = get_count(value, key, source);
            } else if (key == "strict_paraphrase") {
                config.strict_paraphrase = get_as<bool>(value, key, source);
            } else if (key == "subset") {
                const auto name = get_as<std::string>(value, key, source);
                if (name == "all") config.subset = Subset::all;
                else if (name == "bad_cases") config.subset = Subset::bad_cases;
                else throw InvalidInput("unknown subset '" + name + "'");
            } else if (key == "orientation") {
                config.orientation = analysis::orientation_from_string(get_as<std::string>(value, key, source));
            } else if (key == "jobs") {
                config.jobs = get_count(value, key, source);
            } else if (key == "max_in_flight") {
                config.max_in_flight = get_count(value, key, source);
            } else if (key == "max_retries") {
                config.max_retries = get_count(value, key, source);
            } else if (key == "out_dir") {
                config.out_dir = get_as<std::string>(value, key, source);
            } else if (key == "paraphrase_prompt") {
                config.paraphrase_prompt = get_as<std::string>(value, key, source);
            } else if (key == "synthesize_prompt") {
                config.synthesize_prompt = get_as<std::string>(value, key, source);
            } else {
                throw InvalidInput("unknown setting '" + key + "'");
            }
        } catch (const InvalidInput& e) {
            const std::string what = e.what();
            if (what.rfind(source, 0) == 0) throw;
            throw InvalidInput(source + ": " + what);
        }
    }
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str()); v != nullptr && *v != '\0') return std::string(v);
        return std::nullopt;
    };
}

void apply_env(RunConfig& config, const EnvLookup& env) {
    if (auto endpoint = env(kEndpointEnv)) {
        config.endpoint = *endpoint;
    }
    if (auto token = env(kTokenEnv)) {
        config.token = *token;
    }
}

RunConfig resolve_config(const std::optional<std::string>& config_path, const EnvLookup& env,
                         const json& flag_overrides) {
    RunConfig config;
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in) throw InvalidInput("cannot open config file '" + *config_path + "'");
        const auto parsed = json::parse(in, nullptr, false);
        if (parsed.is_discarded()) throw InvalidInput("config file '" + *config_path + "' is not valid JSON");
        apply_json(config, parsed, "config file '" + *config_path + "'");
    }
    apply_env(config, env);
    apply_json(config, flag_overrides, "command line");
    return config;
}

void validate(const RunConfig& config) {
    validate(config.template_spec);
    if (config.backend == BackendKind::remote && config.endpoint.empty()) {
        throw InvalidInput(std::string("remote backend requires an endpoint (--endpoint or ") + kEndpointEnv + ")");
    }
    if (config.backend == BackendKind::reference && config.corpus.empty()) {
        throw InvalidInput("reference backend requires a training corpus (--corpus)");
    }
    if (config.jobs == 0) throw InvalidInput("jobs must be at least 1");
    if (config.max_in_flight == 0) throw InvalidInput("max_in_flight must be at least 1");
    if (config.max_tokens == 0) throw InvalidInput("max_tokens must be at least 1");
    if (config.k == 0) throw InvalidInput("k must be at least 1");
    if (config.prefilter_m && *config.prefilter_m < config.k) {
        throw InvalidInput("prefilter_m must be at least k");
    }
}

std::unique_ptr<Backend> make_backend(const RunConfig& config) {
    validate(config);
    if (config.backend == BackendKind::remote) {
        RemoteConfig remote;
        remote.endpoint = config.endpoint;
        remote.token = config.token;
        remote.max_in_flight = config.max_in_flight;
        remote.max_retries = config.max_retries;
        return std::make_unique<RemoteBackend>(remote);
    }
    return std::make_unique<ReferenceLM>(
        ReferenceLM::train_from_file(config.corpus, ReferenceLM::Options{config.alpha, config.include_unk}));
}

}  // namespace iclslope::cli

#include "iclslope/remote_backend.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace iclslope {

using json = nlohmann::json;

namespace {

std::ptrdiff_t checked_limit(std::size_t limit) {
    if (limit == 0 || limit > 4096) throw InvalidInput("max_in_flight must be in [1, 4096]");
    return static_cast<std::ptrdiff_t>(limit);
}

}  // namespace

struct RemoteBackend::Response {
    json body;
};

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), in_flight_(checked_limit(config_.max_in_flight)) {
    const std::string& url = config_.endpoint;
    constexpr std::string_view scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
        throw InvalidInput("remote endpoint must be an http:// URL, got '" + url + "'");
    }
    const auto slash = url.find('/', scheme.size());
    scheme_host_port_ = url.substr(0, slash);
    if (slash != std::string::npos) {
        base_path_ = url.substr(slash);
        while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
    }
    if (scheme_host_port_.size() == scheme.size()) {
        throw InvalidInput("remote endpoint has no host: '" + url + "'");
    }
}

RemoteBackend::~RemoteBackend() = default;

RemoteBackend::Response RemoteBackend::post(const std::string& path, const std::string& body,
                                            const std::string& tag) const {
    const std::string full_path = base_path_ + path;
    auto backoff = config_.initial_backoff;
    std::string last_error;

    for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, config_.max_backoff);
        }
        ++attempts_;

        httplib::Result result;
        {
            in_flight_.acquire();
            struct Release {
                std::counting_semaphore<4096>& s;
                ~Release() { s.release(); }
            } release{in_flight_};

            httplib::Client client(scheme_host_port_);
            const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
            const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
            client.set_connection_timeout(seconds.count(), micros.count());
            client.set_read_timeout(seconds.count(), micros.count());
            client.set_write_timeout(seconds.count(), micros.count());
            httplib::Headers headers;
            if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
            result = client.Post(full_path, headers, body, "application/json");
        }

        if (!result) {
            last_error = "transport failure: " + httplib::to_string(result.error());
            continue;
        }
        const int status = result->status;
        if (status >= 500) {
            last_error = "server error " + std::to_string(status);
            continue;
        }
        if (status >= 400) {
            std::string message = "request rejected with status " + std::to_string(status);
            const auto parsed = json::parse(result->body, nullptr, false);
            if (parsed.is_object() && parsed.contains("error") && parsed["error"].is_string()) {
                message += ": " + parsed["error"].get<std::string>();
            }
            throw BackendError(message, false, tag);
        }
        if (status < 200 || status >= 300) {
            throw BackendError("unexpected status " + std::to_string(status), false, tag);
        }
        auto parsed = json::parse(result->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            throw BackendError("response body is not a JSON object", false, tag);
        }
        return Response{std::move(parsed)};
    }
    throw BackendError(last_error + " after " + std::to_string(config_.max_retries + 1) + " attempts",
                       true, tag);
}

NormalizedLikelihood RemoteBackend::score(const ScoringRequest& request) const {
    json body = {{"context", render_prefix(request.template_spec, request.condition)},
                 {"continuation", request.target}};
    const auto response = post("/v1/score", body.dump(), request.tag);
    const auto& r = response.body;
    if (!r.contains("tokens") || !r["tokens"].is_array() || !r.contains("token_logprobs") ||
        !r["token_logprobs"].is_array()) {
        throw BackendError("score response lacks tokens/token_logprobs arrays", false, request.tag);
    }
    if (r["tokens"].size() != r["token_logprobs"].size()) {
        throw BackendError("score response arrays differ in length", false, request.tag);
    }
    std::vector<double> logprobs;
    logprobs.reserve(r["token_logprobs"].size());
    for (const auto& v : r["token_logprobs"]) {
        if (!v.is_number()) throw BackendError("token_logprobs holds a non-number", false, request.tag);
        const double lp = v.get<double>();
        if (!std::isfinite(lp) || lp > 0.0) {
            throw BackendError("token log-probability must be finite and <= 0", false, request.tag);
        }
        logprobs.push_back(lp);
    }
    if (logprobs.empty()) throw BackendError("score response has no tokens", false, request.tag);
    return NormalizedLikelihood::from_logprobs(logprobs);
}

std::string RemoteBackend::generate(const GenerationRequest& request) const {
    json body = {{"prompt", request.prompt}, {"max_tokens", request.max_tokens}, {"seed", request.seed}};
    const auto response = post("/v1/generate", body.dump(), request.tag);
    const auto& r = response.body;
    if (!r.contains("text") || !r["text"].is_string()) {
        throw BackendError("generate response lacks a text field", false, request.tag);
    }
    return r["text"].get<std::string>();
}

}  // namespace iclslope

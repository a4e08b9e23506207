#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "iclslope/backend.hpp"

namespace iclslope {

struct RemoteConfig {
    /// Base URL, e.g. "http://127.0.0.1:8080" or "http://host:8080/api".
    std::string endpoint;
    /// Sent as "Authorization: Bearer <token>" when non-empty.
    std::string token;
    std::size_t max_in_flight = 8;
    std::size_t max_retries = 4;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::milliseconds max_backoff{5000};
    std::chrono::milliseconds timeout{60000};
};

/// Client for the JSON scoring protocol:
///
///   POST /v1/score     {"context", "continuation"} -> {"tokens", "token_logprobs"}
///   POST /v1/generate  {"prompt", "max_tokens", "seed"} -> {"text"}
///
/// 4xx responses are final; 5xx responses and transport failures are retried
/// with capped exponential backoff. At most `max_in_flight` requests are on
/// the wire at once across all threads using this client.
class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(RemoteConfig config);
    ~RemoteBackend() override;

    RemoteBackend(const RemoteBackend&) = delete;
    RemoteBackend& operator=(const RemoteBackend&) = delete;

    NormalizedLikelihood score(const ScoringRequest& request) const override;
    bool can_generate() const override { return true; }
    std::string generate(const GenerationRequest& request) const override;

    /// Total HTTP attempts made, retries included.
    std::size_t attempts() const noexcept { return attempts_.load(); }

    const RemoteConfig& config() const noexcept { return config_; }

private:
    struct Response;
    Response post(const std::string& path, const std::string& body, const std::string& tag) const;

    RemoteConfig config_;
    std::string scheme_host_port_;
    std::string base_path_;
    mutable std::counting_semaphore<4096> in_flight_;
    mutable std::atomic<std::size_t> attempts_{0};
};

}  // namespace iclslope

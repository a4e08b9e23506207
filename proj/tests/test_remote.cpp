#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "iclslope/parallel.hpp"
#include "iclslope/remote_backend.hpp"

using namespace iclslope;
using json = nlohmann::json;

namespace {

/// A local HTTP server running on an ephemeral port for the test's lifetime.
class LocalServer {
public:
    httplib::Server server;

    void start() {
        port_ = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    int port_ = 0;
    std::thread thread_;
};

RemoteConfig fast(const std::string& url) {
    RemoteConfig c;
    c.endpoint = url;
    c.max_retries = 3;
    c.initial_backoff = std::chrono::milliseconds(1);
    c.max_backoff = std::chrono::milliseconds(4);
    c.timeout = std::chrono::milliseconds(5000);
    return c;
}

ScoringRequest request(const std::string& tag = "inst/demo/p_x_qd") {
    return ScoringRequest{"Q", "X", TemplateSpec{}, tag};
}

void reply_logprobs(httplib::Response& res, const json& tokens, const json& logprobs) {
    res.set_content(json{{"tokens", tokens}, {"token_logprobs", logprobs}}.dump(), "application/json");
}

}  // namespace

TEST_CASE("remote scoring round trip") {
    LocalServer s;
    std::string seen_body, seen_auth;
    s.server.Post("/v1/score", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        seen_auth = req.get_header_value("Authorization");
        reply_logprobs(res, {"x", "y"}, {std::log(0.5), std::log(0.5)});
    });
    s.start();
    auto config = fast(s.url());
    config.token = "secret";
    const RemoteBackend backend(config);
    const auto nl = backend.score(request());
    CHECK(nl.value() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(nl.token_count() == 2);
    const auto body = json::parse(seen_body);
    CHECK(body["context"] == "Q\n");
    CHECK(body["continuation"] == "X");
    CHECK(seen_auth == "Bearer secret");
    CHECK(backend.attempts() == 1);
}

TEST_CASE("remote generation and base path") {
    LocalServer s;
    json seen;
    s.server.Post("/api/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(R"({"text": "forty two"})", "application/json");
    });
    s.start();
    const RemoteBackend backend(fast(s.url() + "/api/"));
    CHECK(backend.generate(GenerationRequest{"prompt", 16, 9, "g"}) == "forty two");
    CHECK(seen["prompt"] == "prompt");
    CHECK(seen["max_tokens"] == 16);
    CHECK(seen["seed"] == 9);
}

TEST_CASE("server errors are retried with backoff") {
    LocalServer s;
    std::atomic<int> calls{0};
    s.server.Post("/v1/score", [&](const httplib::Request&, httplib::Response& res) {
        if (calls++ < 2) {
            res.status = 503;
            res.set_content(R"({"error": "busy"})", "application/json");
            return;
        }
        reply_logprobs(res, {"x"}, {0.0});
    });
    s.start();
    const RemoteBackend backend(fast(s.url()));
    CHECK(backend.score(request()).value() == 1.0);
    CHECK(backend.attempts() == 3);
}

TEST_CASE("persistent server errors surface as retryable with request identity") {
    LocalServer s;
    s.server.Post("/v1/score", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    s.start();
    const RemoteBackend backend(fast(s.url()));
    try {
        backend.score(request("gsm-17/demo-4/p_x_qd"));
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.retryable());
        CHECK(e.request_id() == "gsm-17/demo-4/p_x_qd");
        CHECK(std::string(e.what()).find("gsm-17/demo-4/p_x_qd") != std::string::npos);
    }
    CHECK(backend.attempts() == 4);
}

TEST_CASE("client errors are final and carry the server message") {
    LocalServer s;
    s.server.Post("/v1/score", [](const httplib::Request&, httplib::Response& res) {
        res.status = 400;
        res.set_content(R"({"error": "context too long"})", "application/json");
    });
    s.start();
    const RemoteBackend backend(fast(s.url()));
    try {
        backend.score(request());
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK_FALSE(e.retryable());
        CHECK(std::string(e.what()).find("context too long") != std::string::npos);
    }
    CHECK(backend.attempts() == 1);
}

TEST_CASE("malformed score responses are rejected") {
    LocalServer s;
    std::atomic<int> mode{0};
    s.server.Post("/v1/score", [&](const httplib::Request&, httplib::Response& res) {
        switch (mode.load()) {
            case 0: reply_logprobs(res, {"a", "b"}, {-0.1}); break;
            case 1: reply_logprobs(res, {"a"}, {0.3}); break;
            case 2: res.set_content("not json", "application/json"); break;
            case 3: res.set_content(R"({"tokens": []})", "application/json"); break;
            default: reply_logprobs(res, json::array(), json::array()); break;
        }
    });
    s.start();
    const RemoteBackend backend(fast(s.url()));
    for (int m = 0; m <= 4; ++m) {
        mode = m;
        CAPTURE(m);
        try {
            backend.score(request());
            FAIL("expected BackendError");
        } catch (const BackendError& e) {
            CHECK_FALSE(e.retryable());
        }
    }
}

TEST_CASE("transport failures are retryable") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }  // closed again: nothing listens there now
    auto config = fast("http://127.0.0.1:" + std::to_string(port));
    config.max_retries = 1;
    const RemoteBackend backend(config);
    try {
        backend.score(request());
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.retryable());
    }
    CHECK(backend.attempts() == 2);
}

TEST_CASE("in-flight requests are bounded") {
    LocalServer s;
    std::atomic<int> active{0}, peak{0};
    s.server.new_task_queue = [] { return new httplib::ThreadPool(16); };
    s.server.Post("/v1/score", [&](const httplib::Request&, httplib::Response& res) {
        const int now = ++active;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        --active;
        reply_logprobs(res, {"x"}, {-0.5});
    });
    s.start();
    auto config = fast(s.url());
    config.max_in_flight = 2;
    const RemoteBackend backend(config);
    parallel_for(12, 12, [&](std::size_t) { backend.score(request()); });
    CHECK(peak.load() <= 2);
    CHECK(peak.load() >= 1);
    CHECK(backend.attempts() == 12);
}

TEST_CASE("endpoint validation") {
    CHECK_THROWS_AS(RemoteBackend(fast("https://example.com")), InvalidInput);
    CHECK_THROWS_AS(RemoteBackend(fast("http://")), InvalidInput);
    auto zero = fast("http://127.0.0.1:1");
    zero.max_in_flight = 0;
    CHECK_THROWS_AS(RemoteBackend{zero}, InvalidInput);
}

#pragma once

// Chat-completions client with deterministic decoding, retry accounting and
// wall-clock latency measurement, plus bounded-concurrency batch execution.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

// The stock backlog of 5 drops SYNs under parallel load.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 256
#endif
#include <httplib.h>
#include <json.hpp>

#include "tangle/error.hpp"
#include "tangle/promptkit.hpp"
#include "tangle/taxonomy.hpp"
#include "tangle/token_counter.hpp"

namespace tangle {

// Request header carrying the ground-truth labels. Only the in-tree mock
// backend reads it; it is sent only when a run asks for it.
inline constexpr const char* kTruthHintHeader = "X-Tangle-Truth";

struct EndpointConfig {
    std::string base_url = "http://127.0.0.1:8080/v1";
    std::string model_name = "default";
    std::string api_key_env = "TANGLE_API_KEY";
    double timeout_seconds = 120.0;
    std::size_t max_in_flight = 1;
    std::size_t max_retries = 2;
    double retry_backoff_seconds = 0.1;

    void validate() const
    {
        if (!(timeout_seconds > 0))
            throw ConfigError("endpoint timeout must be > 0");
        if (max_in_flight < 1)
            throw ConfigError("max_in_flight must be >= 1");
        if (!base_url.starts_with("http://") && !base_url.starts_with("https://"))
            throw ConfigError("base_url must start with http:// or https://");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (base_url.starts_with("https://"))
            throw ConfigError("https endpoints need a build with TANGLE_WITH_OPENSSL=ON");
#endif
    }

    // Key read from the environment at request time; never stored in logs.
    std::optional<std::string> api_key() const
    {
        if (api_key_env.empty())
            return std::nullopt;
        if (const char* v = std::getenv(api_key_env.c_str()); v && *v)
            return std::string(v);
        return std::nullopt;
    }
};

struct DecodingConfig {
    double temperature = 0.0;
    std::int64_t seed = 42;
    std::size_t max_output_tokens = 512;
};

enum class FailureKind { none, timeout, transport, server_error, protocol };

inline constexpr std::string_view render(FailureKind k) noexcept
{
    switch (k) {
    case FailureKind::none:
        return "none";
    case FailureKind::timeout:
        return "Timeout";
    case FailureKind::transport:
        return "TransportFailure";
    case FailureKind::server_error:
        return "ServerError";
    case FailureKind::protocol:
        return "ProtocolError";
    }
    return "?";
}

struct PredictionOutcome {
    ParsedPrediction parsed;
    std::optional<double> latency_seconds; // successful exchanges only
    std::size_t request_tokens = 0;
    std::size_t attempt = 0; // attempts made, 1-based
    FailureKind failure = FailureKind::none;
    int http_status = 0;
    std::string error;

    bool ok() const { return failure == FailureKind::none; }
};

struct RequestHints {
    std::optional<LabelSet> truth;
};

namespace detail {

struct SplitUrl {
    std::string scheme_host_port;
    std::string path_prefix;
};

inline SplitUrl split_url(const std::string& url)
{
    const auto scheme_end = url.find("://");
    const auto path_at = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    SplitUrl s;
    if (path_at == std::string::npos) {
        s.scheme_host_port = url;
    } else {
        s.scheme_host_port = url.substr(0, path_at);
        s.path_prefix = url.substr(path_at);
    }
    while (!s.path_prefix.empty() && s.path_prefix.back() == '/')
        s.path_prefix.pop_back();
    return s;
}

} // namespace detail

inline nlohmann::json chat_request_body(const EndpointConfig& ep, const DecodingConfig& dec, const std::string& prompt)
{
    return {
        {"model", ep.model_name},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", dec.temperature},
        {"seed", dec.seed},
        {"max_tokens", dec.max_output_tokens},
    };
}

class ChatClient {
public:
    ChatClient(EndpointConfig endpoint, DecodingConfig decoding, TokenCounter counter = {})
        : endpoint_(std::move(endpoint))
        , decoding_(decoding)
        , counter_(std::move(counter))
    {
        endpoint_.validate();
    }

    const EndpointConfig& endpoint() const noexcept { return endpoint_; }
    const DecodingConfig& decoding() const noexcept { return decoding_; }

    // One classification: request, full response, parse. Failed attempts are
    // retried up to max_retries; the outcome records how many were used.
    // Safe to call concurrently.
    PredictionOutcome classify(const std::string& prompt, const RequestHints& hints = {}) const
    {
        PredictionOutcome out;
        out.request_tokens = counter_.count(prompt);
        const auto url = detail::split_url(endpoint_.base_url);
        const std::string path = url.path_prefix + "/chat/completions";
        const std::string body = chat_request_body(endpoint_, decoding_, prompt).dump();

        httplib::Headers headers;
        if (auto key = endpoint_.api_key())
            headers.emplace("Authorization", "Bearer " + *key);
        if (hints.truth)
            headers.emplace(kTruthHintHeader, hints.truth->to_string());

        for (std::size_t attempt = 1; attempt <= endpoint_.max_retries + 1; ++attempt) {
            out.attempt = attempt;
            if (attempt > 1 && endpoint_.retry_backoff_seconds > 0)
                std::this_thread::sleep_for(std::chrono::duration<double>(endpoint_.retry_backoff_seconds * double(attempt - 1)));

            httplib::Client cli(url.scheme_host_port);
            const auto t = std::chrono::duration<double>(endpoint_.timeout_seconds);
            cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(t));
            cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(t));
            cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(t));

            const auto start = std::chrono::steady_clock::now();
            auto res = cli.Post(path, headers, body, "application/json");
            const auto stop = std::chrono::steady_clock::now();

            if (!res) {
                const auto err = res.error();
                out.failure = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                                  ? FailureKind::timeout
                                  : FailureKind::transport;
                out.error = httplib::to_string(err);
                continue;
            }
            out.http_status = res->status;
            if (res->status < 200 || res->status >= 300) {
                out.failure = FailureKind::server_error;
                out.error = "status " + std::to_string(res->status);
                continue;
            }
            std::string content;
            try {
                const auto j = nlohmann::json::parse(res->body);
                content = j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                out.failure = FailureKind::protocol;
                out.error = e.what();
                continue;
            }
            out.failure = FailureKind::none;
            out.error.clear();
            out.latency_seconds = std::chrono::duration<double>(stop - start).count();
            out.parsed = parse_prediction(content);
            return out;
        }
        // Exhausted: scored as an empty prediction.
        out.parsed = ParsedPrediction{};
        out.parsed.status = ParseStatus::empty;
        out.latency_seconds.reset();
        return out;
    }

private:
    EndpointConfig endpoint_;
    DecodingConfig decoding_;
    TokenCounter counter_;
};

// Runs fn(i) for i in [0, count) with at most `max_in_flight` calls active.
// fn must write its result into caller-owned storage indexed by i, so the
// collected order never depends on completion order.
inline void bounded_parallel_for(std::size_t count, std::size_t max_in_flight, const std::function<void(std::size_t)>& fn)
{
    if (count == 0)
        return;
    const auto workers = std::max<std::size_t>(1, std::min(max_in_flight, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
}

struct PlanItem {
    std::string prompt;
    RequestHints hints;
};

// Every item executed `runs` times; result[run][item]. Individual failures
// stay in their slot and never abort the batch.
inline std::vector<std::vector<PredictionOutcome>> run_repeated(const ChatClient& client, const std::vector<PlanItem>& plan,
                                                                std::size_t runs = 3)
{
    if (runs < 1)
        throw ConfigError("runs must be >= 1");
    std::vector<std::vector<PredictionOutcome>> out(runs, std::vector<PredictionOutcome>(plan.size()));
    for (std::size_t r = 0; r < runs; ++r)
        bounded_parallel_for(plan.size(), client.endpoint().max_in_flight,
                             [&](std::size_t i) { out[r][i] = client.classify(plan[i].prompt, plan[i].hints); });
    return out;
}

} // namespace tangle

#pragma once

// Loopback chat-completions server with scripted answers, for offline
// runs and analytic acceptance checks. Speaks the same wire protocol as
// ChatClient expects.

#include <atomic>
#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

// The stock backlog of 5 drops SYNs under parallel load.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 256
#endif
#include <httplib.h>
#include <json.hpp>

#include "tangle/error.hpp"
#include "tangle/inference.hpp"
#include "tangle/promptkit.hpp"
#include "tangle/taxonomy.hpp"
#include "tangle/util.hpp"

namespace tangle {

enum class MockMode { echo_truth, drop_one_label, fixed_label, inject_delay, inject_noise };

inline constexpr std::string_view render(MockMode m) noexcept
{
    switch (m) {
    case MockMode::echo_truth:
        return "echo-truth";
    case MockMode::drop_one_label:
        return "drop-one-label";
    case MockMode::fixed_label:
        return "fixed-label";
    case MockMode::inject_delay:
        return "inject-delay";
    case MockMode::inject_noise:
        return "inject-noise";
    }
    return "?";
}

inline MockMode parse_mock_mode(std::string_view s)
{
    for (auto m : {MockMode::echo_truth, MockMode::drop_one_label, MockMode::fixed_label, MockMode::inject_delay,
                   MockMode::inject_noise})
        if (render(m) == s)
            return m;
    throw ConfigError("unknown mock mode '" + std::string(s) + "'");
}

struct MockOptions {
    MockMode mode = MockMode::echo_truth;
    LabelSet fixed_labels = {ConcernLabel::feat};
    double delay_seconds = 0.0;        // added to every response; inject-delay defaults to 0.05
    std::size_t outlier_every = 0;     // every k-th request (by arrival) gets the extra delay
    double outlier_delay_seconds = 0.0;
    double noise_rate = 0.1;           // inject-noise: per-label flip probability
    std::uint64_t seed = 0;
};

// Answer text the mock produces for a given truth set. Deterministic in
// (options, truth, prompt).
inline LabelSet mock_answer(const MockOptions& opt, LabelSet truth, std::string_view prompt)
{
    switch (opt.mode) {
    case MockMode::echo_truth:
    case MockMode::inject_delay:
        return truth;
    case MockMode::drop_one_label: {
        auto labels = truth.labels();
        if (!labels.empty())
            truth.erase(labels.back());
        return truth;
    }
    case MockMode::fixed_label:
        return opt.fixed_labels;
    case MockMode::inject_noise: {
        Rng rng(fnv1a64(prompt, opt.seed ^ 0x9e3779b97f4a7c15ULL));
        for (auto l : kAllLabels)
            if (rng.unit() < opt.noise_rate) {
                if (truth.contains(l))
                    truth.erase(l);
                else
                    truth.insert(l);
            }
        return truth;
    }
    }
    return truth;
}

class MockBackend {
public:
    // port 0 picks a free loopback port.
    explicit MockBackend(MockOptions opt, const std::string& host = "127.0.0.1", int port = 0) : opt_(opt)
    {
        if (opt_.mode == MockMode::inject_delay && opt_.delay_seconds <= 0)
            opt_.delay_seconds = 0.05;
        server_.new_task_queue = [] { return new httplib::ThreadPool(16); };
        server_.Post(R"(.*/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
        if (port == 0)
            port_ = server_.bind_to_any_port(host);
        else if (server_.bind_to_port(host, port))
            port_ = port;
        if (port_ <= 0)
            throw ConfigError("mock backend could not bind " + host + ":" + std::to_string(port));
        host_ = host;
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    MockBackend(const MockBackend&) = delete;
    MockBackend& operator=(const MockBackend&) = delete;

    ~MockBackend()
    {
        server_.stop();
        if (thread_.joinable())
            thread_.join();
    }

    int port() const noexcept { return port_; }
    std::string base_url() const { return "http://" + host_ + ":" + std::to_string(port_) + "/v1"; }
    std::size_t requests() const noexcept { return requests_.load(); }
    const MockOptions& options() const noexcept { return opt_; }

    nlohmann::json last_request() const
    {
        std::lock_guard lock(mu_);
        return last_request_;
    }

    std::string last_authorization() const
    {
        std::lock_guard lock(mu_);
        return last_authorization_;
    }

    // Blocks until the server stops (standalone use).
    void wait()
    {
        if (thread_.joinable())
            thread_.join();
    }

private:
    void handle(const httplib::Request& req, httplib::Response& res)
    {
        const auto serial = requests_.fetch_add(1) + 1;
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            res.status = 400;
            res.set_content(R"({"error":"invalid json"})", "application/json");
            return;
        }
        if (!body.contains("model") || !body.contains("messages") || !body["messages"].is_array() || body["messages"].empty()) {
            res.status = 400;
            res.set_content(R"({"error":"missing model or messages"})", "application/json");
            return;
        }
        {
            std::lock_guard lock(mu_);
            last_request_ = body;
            last_authorization_ = req.get_header_value("Authorization");
        }
        LabelSet truth;
        if (req.has_header(kTruthHintHeader)) {
            try {
                truth = parse_label_list(req.get_header_value(kTruthHintHeader));
            } catch (const Error&) {
                res.status = 400;
                res.set_content(R"({"error":"bad truth hint"})", "application/json");
                return;
            }
        }
        const std::string prompt = body["messages"].back().value("content", "");
        const auto answer = mock_answer(opt_, truth, prompt);

        double delay = opt_.delay_seconds;
        if (opt_.outlier_every > 0 && serial % opt_.outlier_every == 0)
            delay += opt_.outlier_delay_seconds;
        if (delay > 0)
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));

        nlohmann::json reply = {
            {"id", "mock-" + std::to_string(serial)},
            {"object", "chat.completion"},
            {"model", body["model"]},
            {"choices",
             nlohmann::json::array({{{"index", 0},
                                     {"message", {{"role", "assistant"}, {"content", "Mock classification.\n" + render_answer(answer)}}},
                                     {"finish_reason", "stop"}}})},
        };
        res.set_content(reply.dump(), "application/json");
    }

    MockOptions opt_;
    httplib::Server server_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
    std::atomic<std::size_t> requests_{0};
    mutable std::mutex mu_;
    nlohmann::json last_request_;
    std::string last_authorization_;
};

} // namespace tangle

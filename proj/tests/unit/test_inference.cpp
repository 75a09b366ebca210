#include <gtest/gtest.h>

#include <cstdlib>

#include "tangle/inference.hpp"
#include "tangle/mock_backend.hpp"

using namespace tangle;

namespace {

EndpointConfig endpoint_for(const MockBackend& mock)
{
    EndpointConfig ep;
    ep.base_url = mock.base_url();
    ep.model_name = "mock-model";
    ep.timeout_seconds = 10;
    return ep;
}

RequestHints truth(LabelSet s) { return {s}; }

} // namespace

TEST(Inference, RequestBodyShape)
{
    EndpointConfig ep;
    ep.model_name = "m";
    DecodingConfig dec;
    dec.seed = 7;
    dec.max_output_tokens = 64;
    const auto j = chat_request_body(ep, dec, "hello");
    EXPECT_EQ(j["model"], "m");
    EXPECT_EQ(j["messages"][0]["role"], "user");
    EXPECT_EQ(j["messages"][0]["content"], "hello");
    EXPECT_EQ(j["temperature"], 0.0);
    EXPECT_EQ(j["seed"], 7);
    EXPECT_EQ(j["max_tokens"], 64);
}

TEST(Inference, EndpointValidation)
{
    EndpointConfig ep;
    ep.base_url = "ftp://x";
    EXPECT_THROW(ep.validate(), ConfigError);
    ep = {};
    ep.timeout_seconds = 0;
    EXPECT_THROW(ep.validate(), ConfigError);
    ep = {};
    ep.max_in_flight = 0;
    EXPECT_THROW(ep.validate(), ConfigError);
    EXPECT_NO_THROW(EndpointConfig{}.validate());
}

TEST(Inference, MockAnswers)
{
    const LabelSet t{ConcernLabel::fix, ConcernLabel::docs, ConcernLabel::ci};
    MockOptions o;
    EXPECT_EQ(mock_answer(o, t, "p"), t);
    o.mode = MockMode::drop_one_label;
    EXPECT_EQ(mock_answer(o, t, "p"), (LabelSet{ConcernLabel::fix, ConcernLabel::docs}));
    o.mode = MockMode::fixed_label;
    EXPECT_EQ(mock_answer(o, t, "p"), LabelSet{ConcernLabel::feat});
    o.mode = MockMode::inject_noise;
    o.noise_rate = 0.5;
    EXPECT_EQ(mock_answer(o, t, "p"), mock_answer(o, t, "p"));
    o.noise_rate = 0;
    EXPECT_EQ(mock_answer(o, t, "p"), t);
    EXPECT_EQ(parse_mock_mode("drop-one-label"), MockMode::drop_one_label);
    EXPECT_THROW(parse_mock_mode("random"), ConfigError);
}

TEST(Inference, MockRoundTrip)
{
    MockBackend mock({});
    ChatClient client(endpoint_for(mock), {});
    const LabelSet t{ConcernLabel::refactor, ConcernLabel::test};
    const auto out = client.classify("classify this", truth(t));
    ASSERT_TRUE(out.ok()) << out.error;
    EXPECT_EQ(out.parsed.labels, t);
    EXPECT_EQ(out.parsed.status, ParseStatus::ok);
    EXPECT_EQ(out.http_status, 200);
    EXPECT_EQ(out.attempt, 1u);
    ASSERT_TRUE(out.latency_seconds);
    EXPECT_GT(*out.latency_seconds, 0.0);
    EXPECT_EQ(out.request_tokens, 2u);
    EXPECT_EQ(mock.requests(), 1u);
    EXPECT_EQ(mock.last_request()["messages"][0]["content"], "classify this");
    EXPECT_EQ(mock.last_request()["model"], "mock-model");
}

TEST(Inference, ApiKeyFromEnvironmentIsSentAsBearer)
{
    MockBackend mock({});
    auto ep = endpoint_for(mock);
    ep.api_key_env = "TANGLE_TEST_KEY_FOR_UNIT";
    ::setenv("TANGLE_TEST_KEY_FOR_UNIT", "sekret", 1);
    ChatClient(ep, {}).classify("x", truth({ConcernLabel::ci}));
    EXPECT_EQ(mock.last_authorization(), "Bearer sekret");
    ::unsetenv("TANGLE_TEST_KEY_FOR_UNIT");
    ChatClient(ep, {}).classify("x", truth({ConcernLabel::ci}));
    EXPECT_EQ(mock.last_authorization(), "");
}

TEST(Inference, UnreachableEndpointIsRecordedNotThrown)
{
    EndpointConfig ep;
    ep.base_url = "http://127.0.0.1:1/v1";
    ep.timeout_seconds = 2;
    ep.max_retries = 1;
    ep.retry_backoff_seconds = 0;
    const auto out = ChatClient(ep, {}).classify("x");
    EXPECT_FALSE(out.ok());
    EXPECT_EQ(out.failure, FailureKind::transport);
    EXPECT_EQ(out.attempt, 2u);
    EXPECT_FALSE(out.latency_seconds);
    EXPECT_TRUE(out.parsed.labels.empty());
    EXPECT_EQ(out.parsed.status, ParseStatus::empty);
    EXPECT_FALSE(out.error.empty());
}

TEST(Inference, MockRejectsBadRequests)
{
    MockBackend mock({});
    // A hint the mock cannot parse comes back as 400.
    httplib::Client raw("127.0.0.1", mock.port());
    auto res = raw.Post("/v1/chat/completions", httplib::Headers{{kTruthHintHeader, "style"}},
                        R"({"model":"m","messages":[{"role":"user","content":"x"}]})", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    res = raw.Post("/v1/chat/completions", "{nope", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
}

TEST(Inference, TimeoutIsClassified)
{
    MockOptions o;
    o.delay_seconds = 1.5;
    MockBackend mock(o);
    auto ep = endpoint_for(mock);
    ep.timeout_seconds = 0.2;
    ep.max_retries = 0;
    const auto out = ChatClient(ep, {}).classify("x", truth({ConcernLabel::fix}));
    EXPECT_EQ(out.failure, FailureKind::timeout);
    EXPECT_FALSE(out.latency_seconds);
}

TEST(Inference, InjectedDelayShowsInLatency)
{
    MockOptions o;
    o.mode = MockMode::inject_delay;
    MockBackend mock(o);
    EXPECT_DOUBLE_EQ(mock.options().delay_seconds, 0.05);
    const auto out = ChatClient(endpoint_for(mock), {}).classify("x", truth({ConcernLabel::fix}));
    ASSERT_TRUE(out.latency_seconds);
    EXPECT_GE(*out.latency_seconds, 0.05);
    EXPECT_EQ(out.parsed.labels, LabelSet{ConcernLabel::fix});
}

TEST(Inference, BoundedParallelForCoversEveryIndexOnce)
{
    std::vector<std::atomic<int>> hits(500);
    std::atomic<int> active{0}, peak{0};
    bounded_parallel_for(hits.size(), 6, [&](std::size_t i) {
        const int now = ++active;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        ++hits[i];
        --active;
    });
    for (const auto& h : hits)
        EXPECT_EQ(h.load(), 1);
    EXPECT_LE(peak.load(), 6);
}

TEST(Inference, RunRepeatedKeepsPlanOrder)
{
    MockBackend mock({});
    auto ep = endpoint_for(mock);
    ep.max_in_flight = 8;
    ChatClient client(ep, {});
    std::vector<PlanItem> plan;
    for (unsigned m = 1; m < 40; ++m)
        plan.push_back({"p" + std::to_string(m), truth(LabelSet::from_mask(static_cast<std::uint8_t>(m)))});
    const auto out = run_repeated(client, plan, 3);
    ASSERT_EQ(out.size(), 3u);
    for (const auto& run : out)
        for (std::size_t i = 0; i < plan.size(); ++i)
            EXPECT_EQ(run[i].parsed.labels, *plan[i].hints.truth);
    EXPECT_EQ(mock.requests(), 3 * plan.size());
    EXPECT_THROW(run_repeated(client, plan, 0), ConfigError);
}

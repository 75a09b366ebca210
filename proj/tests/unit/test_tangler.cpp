#include <gtest/gtest.h>

#include <set>

#include "tangle/corpus.hpp"
#include "tangle/tangler.hpp"

using namespace tangle;

namespace {

AtomicPool synthetic_pool(std::size_t per_label, std::size_t words = 3)
{
    std::vector<CommitRecord> recs;
    for (auto l : kAllLabels)
        for (std::size_t i = 0; i < per_label; ++i) {
            const auto id = std::string(render(l)) + "-" + std::to_string(i);
            std::string diff = "--- a/" + id + "\n+++ b/" + id + "\n@@ -1 +1 @@\n+";
            for (std::size_t w = 0; w < words; ++w)
                diff += " t" + std::to_string(w);
            recs.push_back({id, l, std::string(render(l)) + ": " + id, diff + "\n", true});
        }
    return AtomicPool::from_records(recs);
}

} // namespace

TEST(Tangler, ConstructMergesInOrder)
{
    const std::vector<CommitRecord> atomics = {
        {"a", ConcernLabel::docs, "docs: a", "--- a/x\n+++ b/x\n@@ -1 +1 @@\n-1\n+2\n", true},
        {"b", ConcernLabel::fix, "fix: b", "--- a/y\n+++ b/y\n@@ -1 +1 @@\n-3\n+4", true},
    };
    const auto t = construct_tangled_commit(atomics);
    EXPECT_EQ(t.merged_message, "docs: a\nfix: b");
    EXPECT_EQ(t.labels, (LabelSet{ConcernLabel::docs, ConcernLabel::fix}));
    EXPECT_EQ(t.concern_count, 2u);
    ASSERT_EQ(t.diff_segments.size(), 2u);
    EXPECT_EQ(t.diff_segments[0].source_id, "a");
    EXPECT_EQ(t.rendered_diff(), atomics[0].diff_text + "\n" + atomics[1].diff_text);
}

TEST(Tangler, SegmentWithoutTrailingNewlineStillGetsBlankLine)
{
    const std::vector<CommitRecord> atomics = {
        {"a", ConcernLabel::docs, "docs: a", "--- a/x\n+++ b/x\n@@ -1 +1 @@\n+2", true},
        {"b", ConcernLabel::fix, "fix: b", "--- a/y\n+++ b/y\n@@ -1 +1 @@\n+4\n", true},
    };
    EXPECT_EQ(construct_tangled_commit(atomics).rendered_diff(),
              "--- a/x\n+++ b/x\n@@ -1 +1 @@\n+2\n\n--- a/y\n+++ b/y\n@@ -1 +1 @@\n+4\n");
}

TEST(Tangler, ConstructRejectsDuplicateLabels)
{
    const std::vector<CommitRecord> atomics = {
        {"a", ConcernLabel::fix, "fix: a", "d1", true},
        {"b", ConcernLabel::fix, "fix: b", "d2", true},
    };
    EXPECT_THROW(construct_tangled_commit(atomics), DuplicateLabels);
    EXPECT_THROW(construct_tangled_commit(std::vector<CommitRecord>{}), DuplicateLabels);
}

TEST(Tangler, GeneratesFlatHistogramOfValidSamples)
{
    const auto pool = synthetic_pool(10);
    TangleOptions opt;
    opt.counts = {1, 2, 3, 4, 5, 6, 7};
    opt.per_count_quota = 6;
    opt.seed = 9;
    const auto ds = generate_tangled(pool, opt);
    ASSERT_EQ(ds.samples.size(), 42u);
    for (auto [n, c] : ds.histogram())
        EXPECT_EQ(c, 6u) << n;
    std::set<std::uint64_t> keys;
    std::set<std::string> ids;
    for (const auto& s : ds.samples) {
        EXPECT_EQ(check_sample(s, opt.counter, opt.token_limit), "");
        EXPECT_TRUE(keys.insert(s.dedup_key()).second);
        EXPECT_TRUE(ids.insert(s.id).second);
    }
    EXPECT_EQ(ds.samples.front().id, "n1-0001");
    EXPECT_EQ(ds.samples.back().id, "n7-0006");
}

TEST(Tangler, DeterministicPerSeed)
{
    const auto pool = synthetic_pool(8);
    TangleOptions opt;
    opt.per_count_quota = 5;
    opt.seed = 1;
    const auto a = serialize_dataset(generate_tangled(pool, opt));
    EXPECT_EQ(a, serialize_dataset(generate_tangled(pool, opt)));
    opt.seed = 2;
    EXPECT_NE(a, serialize_dataset(generate_tangled(pool, opt)));
}

TEST(Tangler, QuotaUnreachableWhenPoolTooSmall)
{
    // One record per label leaves only 7 distinct n=1 samples.
    const auto pool = synthetic_pool(1);
    TangleOptions opt;
    opt.counts = {1};
    opt.per_count_quota = 8;
    opt.retry_factor = 10;
    EXPECT_THROW(generate_tangled(pool, opt), QuotaUnreachable);
}

TEST(Tangler, TokenLimitRespected)
{
    const auto pool = synthetic_pool(6, 20);
    TangleOptions opt;
    opt.counts = {1, 2};
    opt.per_count_quota = 5;
    opt.token_limit = 70;
    const auto ds = generate_tangled(pool, opt);
    for (const auto& s : ds.samples)
        EXPECT_LE(opt.counter.count(s.length_text()), 70u);
    opt.counts = {5};
    opt.retry_factor = 3;
    EXPECT_THROW(generate_tangled(pool, opt), QuotaUnreachable);
}

TEST(Tangler, RejectsCountsOutsideLabelRange)
{
    TangleOptions opt;
    opt.counts = {0};
    EXPECT_THROW(generate_tangled(synthetic_pool(2), opt), ConfigError);
    opt.counts = {8};
    EXPECT_THROW(generate_tangled(synthetic_pool(2), opt), ConfigError);
}

TEST(Tangler, SerializeRoundTrip)
{
    TangleOptions opt;
    opt.per_count_quota = 3;
    const auto ds = generate_tangled(synthetic_pool(5), opt);
    const auto text = serialize_dataset(ds);
    EXPECT_EQ(parse_dataset(text), ds.samples);
    const auto j = nlohmann::json::parse(text.substr(0, text.find('\n')));
    for (auto key : {"id", "labels", "message", "diff_segments", "n"})
        EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Tangler, ParseDatasetValidates)
{
    EXPECT_THROW(parse_dataset(R"({"id":"x","labels":["fix","fix"],"message":"m","diff_segments":[],"n":2})"),
                 SchemaViolation);
    EXPECT_THROW(parse_dataset("{}"), SchemaViolation);
}

TEST(Tangler, SharedSourcesFindsOverlap)
{
    const auto pool = synthetic_pool(5);
    TangleOptions opt;
    opt.counts = {2};
    opt.per_count_quota = 3;
    const auto ds = generate_tangled(pool, opt);
    EXPECT_FALSE(shared_sources(ds, pool).empty());
    EXPECT_TRUE(shared_sources(ds, AtomicPool{}).empty());
}

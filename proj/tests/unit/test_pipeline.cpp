#include <gtest/gtest.h>

#include "support.hpp"
#include "tangle/pipeline.hpp"

using namespace tangle;

namespace {

PoolOptions pool_options(std::size_t quota, std::uint64_t seed)
{
    PoolOptions o;
    o.quota = quota;
    o.seed = seed;
    return o;
}

} // namespace

TEST(Pipeline, BuildPoolWritesFileAndManifest)
{
    testsupport::TempDir dir;
    const auto out = dir.file("pool.jsonl");
    const auto res = build_pool_file(testsupport::source_path("data/sample_corpus.jsonl"), pool_options(20, 3), "verified", out);
    EXPECT_EQ(res.pool.size(), 140u);
    EXPECT_GT(res.stats.dropped_for(DropReason::ExcludedType), 0u);
    const auto m = read_manifest(out);
    ASSERT_TRUE(m);
    EXPECT_EQ((*m)["records"], 140);
    EXPECT_EQ((*m)["rng"], "mt19937_64+rejection");
    EXPECT_EQ((*m)["counter"], "whitespace");
    EXPECT_EQ((*m)["content_hash"], hex64(fnv1a64(read_file(out))));
    EXPECT_EQ(load_pool_file(out).flatten(), res.pool.flatten());
}

TEST(Pipeline, TamperedPoolIsRejected)
{
    testsupport::TempDir dir;
    const auto out = dir.file("pool.jsonl");
    build_pool_file(testsupport::source_path("data/sample_corpus.jsonl"), pool_options(5, 1), "verified", out);
    write_file(out, read_file(out) + "\n");
    EXPECT_THROW(load_pool_file(out), ManifestMismatch);
}

TEST(Pipeline, SplitAndTangleFiles)
{
    testsupport::TempDir dir;
    const auto pool = dir.file("pool.jsonl");
    build_pool_file(testsupport::source_path("data/sample_corpus.jsonl"), pool_options(25, 4), "verified", pool);
    const auto split = split_pool_file(pool, 8, dir.file("train.jsonl"), dir.file("eval.jsonl"));
    EXPECT_EQ(load_pool_file(dir.file("train.jsonl")).size(), 140u);
    EXPECT_EQ(load_pool_file(dir.file("eval.jsonl")).size(), 35u);
    EXPECT_EQ(split.eval.quota, 5u);

    TangleOptions opt;
    opt.per_count_quota = 10;
    opt.seed = 2;
    const auto ds = tangle_file(dir.file("eval.jsonl"), opt, dir.file("ds.jsonl"));
    EXPECT_EQ(ds.samples.size(), 50u);
    EXPECT_TRUE(shared_sources(ds, split.train).empty());
    const auto content = read_file(dir.file("ds.jsonl"));
    EXPECT_NO_THROW(verify_manifest(dir.file("ds.jsonl"), content, true));
    EXPECT_EQ(parse_dataset(content), ds.samples);
}

TEST(Pipeline, HeuristicAtomicityBuildsFromUnverifiedCorpus)
{
    testsupport::TempDir dir;
    auto opt = pool_options(10, 6);
    opt.atomicity = heuristic_atomicity;
    const auto res = build_pool_file(testsupport::source_path("data/sample_corpus.jsonl"), opt, "heuristic", dir.file("p.jsonl"));
    EXPECT_TRUE(res.pool.balanced());
    EXPECT_EQ((*read_manifest(dir.file("p.jsonl")))["atomicity"], "heuristic");
}

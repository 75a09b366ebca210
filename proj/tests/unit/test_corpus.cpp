#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "tangle/corpus.hpp"

using namespace tangle;

namespace {

std::string line(const std::string& id, const std::string& label, const std::string& msg, const std::string& diff,
                 bool verified = true)
{
    nlohmann::json j{{"id", id}, {"label", label}, {"message", msg}, {"diff", diff}, {"verified_atomic", verified}};
    return j.dump() + "\n";
}

const std::string kDiff = "--- a/f\n+++ b/f\n@@ -1 +1 @@\n-a\n+b\n";

CommitRecord rec(const std::string& id, ConcernLabel l, const std::string& msg, std::size_t body_words = 1)
{
    std::string diff = "--- a/" + id + "\n+++ b/" + id + "\n@@ -1 +1 @@\n+";
    for (std::size_t i = 0; i < body_words; ++i)
        diff += " w" + std::to_string(i);
    diff += "\n";
    return {id, l, msg, diff, true};
}

std::vector<CommitRecord> synthetic(std::size_t per_label)
{
    std::vector<CommitRecord> out;
    for (auto l : kAllLabels)
        for (std::size_t i = 0; i < per_label; ++i)
            out.push_back(rec(std::string(render(l)) + "-" + std::to_string(i), l,
                              std::string(render(l)) + ": change " + std::to_string(i)));
    return out;
}

} // namespace

TEST(Corpus, ParsesAndSortsById)
{
    const auto c = parse_corpus(line("b", "fix", "fix: b", kDiff) + line("a", "feat", "feat: a", kDiff));
    ASSERT_EQ(c.records.size(), 2u);
    EXPECT_EQ(c.records[0].id, "a");
    EXPECT_EQ(c.records[1].label, ConcernLabel::fix);
    EXPECT_EQ(c.stats.accepted, 2u);
    const auto kept = parse_corpus(line("b", "fix", "fix: b", kDiff) + line("a", "feat", "feat: a", kDiff), "x", true);
    EXPECT_EQ(kept.records[0].id, "b");
}

TEST(Corpus, DropsExcludedUnknownAndEmpty)
{
    const auto c = parse_corpus(line("1", "perf", "perf: x", kDiff) + line("2", "chore", "chore: x", kDiff)
                                + line("3", "wip", "wip", kDiff) + line("4", "fix", "fix: x", "")
                                + line("5", "docs", "   ", kDiff) + line("6", "ci", "ci: ok", kDiff) + "\n");
    EXPECT_EQ(c.records.size(), 1u);
    EXPECT_EQ(c.stats.lines_read, 6u);
    EXPECT_EQ(c.stats.dropped_for(DropReason::ExcludedType), 2u);
    EXPECT_EQ(c.stats.dropped_for(DropReason::UnknownLabel), 1u);
    EXPECT_EQ(c.stats.dropped_for(DropReason::EmptyField), 2u);
    EXPECT_EQ(c.stats.dropped_total(), 5u);
}

TEST(Corpus, SchemaViolationsNameTheLine)
{
    try {
        parse_corpus(line("1", "fix", "fix: x", kDiff) + "{\"id\":\"2\",\"label\":\"fix\"}\n", "corpus.jsonl");
        FAIL() << "expected SchemaViolation";
    } catch (const SchemaViolation& e) {
        EXPECT_NE(std::string(e.what()).find("corpus.jsonl:2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_corpus("not json\n"), SchemaViolation);
    EXPECT_THROW(parse_corpus("[1,2]\n"), SchemaViolation);
    EXPECT_THROW(parse_corpus(R"({"id":"1","label":"fix","message":"m","diff":"d","verified_atomic":"yes"})"),
                 SchemaViolation);
}

TEST(Corpus, CountsLossyUtf8AndDuplicateIds)
{
    std::string bad = line("x", "fix", "fix: PLACEHOLDER", kDiff);
    bad.replace(bad.find("PLACEHOLDER"), 11, "caf\xe9");
    const auto c = parse_corpus(bad + line("x", "feat", "feat: y", kDiff));
    EXPECT_EQ(c.stats.lossy_utf8, 1u);
    EXPECT_EQ(c.stats.duplicate_ids, 1u);
    EXPECT_EQ(c.records.size(), 2u);
}

TEST(Corpus, MissingFileThrows) { EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), FileUnreadable); }

TEST(Corpus, SerializeRoundTrip)
{
    const auto recs = synthetic(2);
    const auto back = parse_corpus(serialize_records(recs), "mem", true);
    EXPECT_EQ(back.records, recs);
}

TEST(Corpus, DedupKeySeparatesMessageFromDiff)
{
    CommitRecord a{"1", ConcernLabel::fix, "ab", "c", true};
    CommitRecord b{"2", ConcernLabel::fix, "a", "bc", true};
    CommitRecord c{"3", ConcernLabel::feat, "ab", "c", false};
    EXPECT_NE(a.dedup_key(), b.dedup_key());
    EXPECT_EQ(a.dedup_key(), c.dedup_key());
}

TEST(Corpus, HeuristicAtomicity)
{
    EXPECT_TRUE(heuristic_atomicity(rec("1", ConcernLabel::fix, "fix(io): close handle")));
    EXPECT_FALSE(heuristic_atomicity(rec("2", ConcernLabel::fix, "feat: new api")));
    EXPECT_FALSE(heuristic_atomicity(rec("3", ConcernLabel::fix, "fix: close handle and also rename vars")));
    EXPECT_FALSE(heuristic_atomicity(rec("4", ConcernLabel::fix, "fix: a\n\ndocs: b")));
    EXPECT_FALSE(heuristic_atomicity(rec("5", ConcernLabel::fix, "no header")));
}

TEST(Corpus, PoolIsBalancedUniqueAndAtomic)
{
    auto recs = synthetic(20);
    recs[3].verified_atomic = false;
    recs.push_back(recs[5]);
    recs.back().id = "dup-of-5";
    PoolOptions opt;
    opt.quota = 15;
    opt.seed = 11;
    const auto pool = sample_atomic_pool(recs, opt);
    EXPECT_TRUE(pool.balanced());
    EXPECT_EQ(pool.size(), 105u);
    std::set<std::uint64_t> keys;
    for (const auto& r : pool.flatten()) {
        EXPECT_TRUE(r.verified_atomic);
        EXPECT_TRUE(keys.insert(r.dedup_key()).second) << r.id;
    }
}

TEST(Corpus, PoolFiltersByTokenLimit)
{
    std::vector<CommitRecord> recs;
    for (auto l : kAllLabels)
        for (std::size_t i = 0; i < 4; ++i)
            recs.push_back(rec(std::string(render(l)) + std::to_string(i), l, "m", i < 2 ? 1 : 50));
    PoolOptions opt;
    opt.quota = 2;
    opt.token_limit = 20;
    const auto pool = sample_atomic_pool(recs, opt);
    for (const auto& r : pool.flatten())
        EXPECT_LE(opt.counter.count(r.length_text()), 20u);
    opt.quota = 3;
    EXPECT_THROW(sample_atomic_pool(recs, opt), InsufficientCandidates);
}

TEST(Corpus, PoolIsDeterministicPerSeed)
{
    const auto recs = synthetic(30);
    PoolOptions opt;
    opt.quota = 10;
    opt.seed = 5;
    const auto a = sample_atomic_pool(recs, opt);
    auto shuffled = recs;
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(a.flatten(), sample_atomic_pool(shuffled, opt).flatten());
    opt.seed = 6;
    EXPECT_NE(a.flatten(), sample_atomic_pool(recs, opt).flatten());
}

TEST(Corpus, InsufficientCandidatesNamesLabel)
{
    auto recs = synthetic(5);
    std::erase_if(recs, [](const CommitRecord& r) { return r.label == ConcernLabel::ci && r.id != "ci-0"; });
    PoolOptions opt;
    opt.quota = 2;
    try {
        sample_atomic_pool(recs, opt);
        FAIL();
    } catch (const InsufficientCandidates& e) {
        EXPECT_NE(std::string(e.what()).find("ci"), std::string::npos);
    }
}

TEST(Corpus, SplitIsEightToTwoPerLabel)
{
    PoolOptions opt;
    opt.quota = 10;
    const auto pool = sample_atomic_pool(synthetic(12), opt);
    const auto split = split_pool(pool, 3);
    std::set<std::string> train_ids;
    for (auto l : kAllLabels) {
        EXPECT_EQ(split.train.of(l).size(), 8u);
        EXPECT_EQ(split.eval.of(l).size(), 2u);
        for (const auto& r : split.train.of(l))
            train_ids.insert(r.id);
    }
    for (const auto& r : split.eval.flatten())
        EXPECT_FALSE(train_ids.contains(r.id));
    EXPECT_EQ(train_ids.size() + split.eval.size(), pool.size());
}

TEST(Corpus, SplitRejectsQuotaNotDivisibleByFive)
{
    PoolOptions opt;
    opt.quota = 7;
    EXPECT_THROW(split_pool(sample_atomic_pool(synthetic(8), opt), 1), QuotaNotDivisible);
}

TEST(Corpus, SampleCorpusSupportsDefaultQuota)
{
    const auto c = load_corpus(testsupport::source_path("data/sample_corpus.jsonl"));
    std::array<std::size_t, kLabelCount> verified{};
    for (const auto& r : c.records)
        verified[static_cast<std::size_t>(r.label)] += r.verified_atomic;
    for (auto v : verified)
        EXPECT_GE(v, 450u);
    EXPECT_GT(c.stats.dropped_for(DropReason::ExcludedType), 0u);
}

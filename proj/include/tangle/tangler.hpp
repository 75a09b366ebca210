#pragma once

// Synthetic tangled-commit generation from a balanced atomic pool.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tangle/corpus.hpp"
#include "tangle/error.hpp"
#include "tangle/taxonomy.hpp"
#include "tangle/token_counter.hpp"
#include "tangle/util.hpp"

namespace tangle {

struct DiffSegment {
    std::string source_id;
    std::string diff;

    friend bool operator==(const DiffSegment&, const DiffSegment&) = default;
};

struct TangledCommit {
    std::string id;
    LabelSet labels;
    std::string merged_message;
    std::vector<DiffSegment> diff_segments; // sampled order
    std::size_t concern_count = 0;

    // Segments back to back, one blank line between them.
    std::string rendered_diff() const
    {
        std::string out;
        for (std::size_t i = 0; i < diff_segments.size(); ++i) {
            if (i > 0) {
                if (!out.empty() && out.back() != '\n')
                    out += '\n';
                out += '\n';
            }
            out += diff_segments[i].diff;
        }
        return out;
    }

    std::string length_text() const { return merged_message + "\n" + rendered_diff(); }

    std::uint64_t dedup_key() const
    {
        auto h = fnv1a64(merged_message);
        h = fnv1a64(std::string_view("\0", 1), h);
        for (const auto& s : diff_segments)
            h = fnv1a64(s.diff, h);
        return h;
    }

    friend bool operator==(const TangledCommit&, const TangledCommit&) = default;
};

// Merges 1..7 atomic commits with pairwise distinct labels. Messages are
// joined by '\n' and segments kept in the given order.
inline TangledCommit construct_tangled_commit(const std::vector<const CommitRecord*>& atomics)
{
    if (atomics.empty() || atomics.size() > kLabelCount)
        throw DuplicateLabels("need 1.." + std::to_string(kLabelCount) + " atomic commits, got "
                              + std::to_string(atomics.size()));
    TangledCommit t;
    for (const auto* a : atomics) {
        if (!t.labels.insert(a->label))
            throw DuplicateLabels("label '" + std::string(render(a->label)) + "' appears twice");
        if (!t.merged_message.empty())
            t.merged_message += '\n';
        t.merged_message += a->message;
        t.diff_segments.push_back({a->id, a->diff_text});
    }
    t.concern_count = atomics.size();
    return t;
}

inline TangledCommit construct_tangled_commit(const std::vector<CommitRecord>& atomics)
{
    std::vector<const CommitRecord*> ptrs;
    for (const auto& a : atomics)
        ptrs.push_back(&a);
    return construct_tangled_commit(ptrs);
}

struct TangledDataset {
    std::vector<TangledCommit> samples;
    std::size_t per_count_quota = 0;
    std::vector<std::size_t> counts;
    std::size_t token_limit = 0;

    std::map<std::size_t, std::size_t> histogram() const
    {
        std::map<std::size_t, std::size_t> h;
        for (const auto& s : samples)
            ++h[s.concern_count];
        return h;
    }
};

struct TangleOptions {
    std::vector<std::size_t> counts = {1, 2, 3, 4, 5};
    std::size_t per_count_quota = 350;
    std::size_t token_limit = 12288;
    std::uint64_t seed = 0;
    std::size_t retry_factor = 100; // attempts allowed per count = factor * quota
    TokenCounter counter;
};

inline TangledDataset generate_tangled(const AtomicPool& pool, const TangleOptions& opt)
{
    std::vector<std::size_t> counts = opt.counts;
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    for (auto n : counts)
        if (n < 1 || n > kLabelCount)
            throw ConfigError("concern count " + std::to_string(n) + " outside 1.." + std::to_string(kLabelCount));
    for (auto label : kAllLabels)
        if (pool.of(label).empty())
            throw InsufficientCandidates(std::string(render(label)) + ": pool has no records");

    TangledDataset ds;
    ds.per_count_quota = opt.per_count_quota;
    ds.counts = counts;
    ds.token_limit = opt.token_limit;

    Rng rng(opt.seed);
    std::unordered_set<std::uint64_t> seen;
    for (auto n : counts) {
        std::size_t made = 0, attempts = 0;
        const std::size_t budget = opt.retry_factor * std::max<std::size_t>(opt.per_count_quota, 1);
        while (made < opt.per_count_quota) {
            if (attempts++ >= budget)
                throw QuotaUnreachable("n=" + std::to_string(n) + ": " + std::to_string(made) + " of "
                                       + std::to_string(opt.per_count_quota) + " after " + std::to_string(budget)
                                       + " attempts");
            // n distinct labels by partial Fisher-Yates; sampled order is kept.
            std::array<ConcernLabel, kLabelCount> labels = kAllLabels;
            for (std::size_t i = 0; i < n; ++i)
                std::swap(labels[i], labels[i + rng.below(kLabelCount - i)]);
            std::vector<const CommitRecord*> picks;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& sub = pool.of(labels[i]);
                picks.push_back(&sub[rng.below(sub.size())]);
            }
            auto candidate = construct_tangled_commit(picks);
            const auto key = candidate.dedup_key();
            if (seen.contains(key))
                continue;
            if (opt.counter.count(candidate.length_text()) > opt.token_limit)
                continue;
            seen.insert(key);
            ++made;
            char id[32];
            std::snprintf(id, sizeof id, "n%zu-%04zu", n, made);
            candidate.id = id;
            ds.samples.push_back(std::move(candidate));
        }
    }
    return ds;
}

// --- serialization --------------------------------------------------------

inline nlohmann::ordered_json to_json(const TangledCommit& t)
{
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["labels"] = t.labels.names();
    j["message"] = t.merged_message;
    auto segs = nlohmann::ordered_json::array();
    for (const auto& s : t.diff_segments) {
        nlohmann::ordered_json sj;
        sj["source_id"] = s.source_id;
        sj["diff"] = s.diff;
        segs.push_back(std::move(sj));
    }
    j["diff_segments"] = std::move(segs);
    j["n"] = t.concern_count;
    return j;
}

inline std::string serialize_dataset(const TangledDataset& ds)
{
    std::string out;
    for (const auto& s : ds.samples) {
        out += to_json(s).dump();
        out += '\n';
    }
    return out;
}

inline std::vector<TangledCommit> parse_dataset(std::string_view content, const std::string& origin = "<memory>")
{
    std::vector<TangledCommit> out;
    std::size_t lineno = 0;
    for (auto line : split_lines(content)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        auto fail = [&](const std::string& why) {
            throw SchemaViolation(origin + ":" + std::to_string(lineno) + ": " + why);
        };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(e.what());
        }
        try {
            TangledCommit t;
            t.id = j.at("id").get<std::string>();
            t.merged_message = j.at("message").get<std::string>();
            for (const auto& l : j.at("labels"))
                if (!t.labels.insert(parse_label(l.get<std::string>())))
                    fail("duplicate label");
            for (const auto& s : j.at("diff_segments"))
                t.diff_segments.push_back({s.at("source_id").get<std::string>(), s.at("diff").get<std::string>()});
            t.concern_count = j.at("n").get<std::size_t>();
            if (t.labels.size() != t.concern_count || t.diff_segments.size() != t.concern_count)
                fail("n does not match labels/segments");
            out.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            fail(e.what());
        } catch (const Error& e) {
            if (dynamic_cast<const SchemaViolation*>(&e))
                throw;
            fail(e.what());
        }
    }
    return out;
}

// Per-sample structural check; returns an empty string when the sample is valid.
inline std::string check_sample(const TangledCommit& t, const TokenCounter& counter, std::size_t token_limit)
{
    if (t.labels.size() != t.concern_count)
        return "label count differs from n";
    if (t.diff_segments.size() != t.concern_count)
        return "segment count differs from n";
    if (counter.count(t.length_text()) > token_limit)
        return "over token limit";
    return {};
}

// Source ids used by the dataset that also occur in `other`.
inline std::set<std::string> shared_sources(const TangledDataset& ds, const AtomicPool& other)
{
    std::set<std::string> ids;
    for (const auto& r : other.flatten())
        ids.insert(r.id);
    std::set<std::string> hits;
    for (const auto& s : ds.samples)
        for (const auto& seg : s.diff_segments)
            if (ids.contains(seg.source_id))
                hits.insert(seg.source_id);
    return hits;
}

} // namespace tangle

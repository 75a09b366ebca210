#pragma once

// Corpus ingestion, balanced atomic pool sampling and the 8:2 split.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tangle/error.hpp"
#include "tangle/taxonomy.hpp"
#include "tangle/token_counter.hpp"
#include "tangle/util.hpp"

namespace tangle {

struct CommitRecord {
    std::string id;
    ConcernLabel label = ConcernLabel::feat;
    std::string message;
    std::string diff_text;
    bool verified_atomic = false;

    // Content identity: hash of message + NUL + diff.
    std::uint64_t dedup_key() const
    {
        return fnv1a64(diff_text, fnv1a64(std::string_view("\0", 1), fnv1a64(message)));
    }

    // Text whose token count is compared against length limits.
    std::string length_text() const { return message + "\n" + diff_text; }

    friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

enum class DropReason { ExcludedType, UnknownLabel, EmptyField };

inline constexpr std::string_view render(DropReason r) noexcept
{
    switch (r) {
    case DropReason::ExcludedType:
        return "ExcludedType";
    case DropReason::UnknownLabel:
        return "UnknownLabel";
    case DropReason::EmptyField:
        return "EmptyField";
    }
    return "?";
}

struct IngestionStats {
    std::size_t lines_read = 0;
    std::size_t accepted = 0;
    std::map<DropReason, std::size_t> dropped;
    std::size_t lossy_utf8 = 0;
    std::size_t duplicate_ids = 0;

    std::size_t dropped_total() const
    {
        std::size_t n = 0;
        for (auto& [_, c] : dropped)
            n += c;
        return n;
    }
    std::size_t dropped_for(DropReason r) const
    {
        auto it = dropped.find(r);
        return it == dropped.end() ? 0 : it->second;
    }
};

struct LoadedCorpus {
    std::vector<CommitRecord> records; // sorted by id
    IngestionStats stats;
};

inline nlohmann::ordered_json to_json(const CommitRecord& r)
{
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["label"] = render(r.label);
    j["message"] = r.message;
    j["diff"] = r.diff_text;
    j["verified_atomic"] = r.verified_atomic;
    return j;
}

// Parses JSON Lines content in the dataset format. `origin` only feeds
// diagnostics. Records come back sorted by id unless `keep_file_order`.
inline LoadedCorpus parse_corpus(std::string_view content, const std::string& origin = "<memory>", bool keep_file_order = false)
{
    LoadedCorpus out;
    std::size_t lineno = 0;
    for (auto raw : split_lines(content)) {
        ++lineno;
        if (trim(raw).empty())
            continue;
        ++out.stats.lines_read;
        std::string line(raw);
        if (sanitize_utf8(line))
            ++out.stats.lossy_utf8;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaViolation(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
        auto fail = [&](const std::string& why) {
            throw SchemaViolation(origin + ":" + std::to_string(lineno) + ": " + why);
        };
        if (!j.is_object())
            fail("record is not an object");
        for (auto field : {"id", "label", "message", "diff"})
            if (!j.contains(field) || !j[field].is_string())
                fail(std::string("missing or non-string field '") + field + "'");
        if (!j.contains("verified_atomic") || !j["verified_atomic"].is_boolean())
            fail("missing or non-boolean field 'verified_atomic'");

        CommitRecord r;
        r.id = j["id"].get<std::string>();
        r.message = j["message"].get<std::string>();
        r.diff_text = j["diff"].get<std::string>();
        r.verified_atomic = j["verified_atomic"].get<bool>();
        try {
            r.label = parse_label(j["label"].get<std::string>());
        } catch (const ExcludedType&) {
            ++out.stats.dropped[DropReason::ExcludedType];
            continue;
        } catch (const UnknownLabel&) {
            ++out.stats.dropped[DropReason::UnknownLabel];
            continue;
        }
        if (r.id.empty() || trim(r.message).empty() || trim(r.diff_text).empty()) {
            ++out.stats.dropped[DropReason::EmptyField];
            continue;
        }
        out.records.push_back(std::move(r));
    }
    std::vector<std::string> ids;
    for (const auto& r : out.records)
        ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 1; i < ids.size(); ++i)
        if (ids[i] == ids[i - 1])
            ++out.stats.duplicate_ids;
    if (!keep_file_order)
        std::stable_sort(out.records.begin(), out.records.end(),
                         [](const CommitRecord& a, const CommitRecord& b) { return a.id < b.id; });
    out.stats.accepted = out.records.size();
    return out;
}

inline LoadedCorpus load_corpus(const std::string& path) { return parse_corpus(read_file(path), path); }

inline std::string serialize_records(const std::vector<CommitRecord>& records)
{
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

// --- atomicity predicates -------------------------------------------------

using AtomicityPredicate = std::function<bool(const CommitRecord&)>;

// Default: trust the manual verification flag.
inline bool verified_only(const CommitRecord& r) { return r.verified_atomic; }

// Best-effort check for unverified corpora: the message header carries
// exactly one recognised type that matches the record label, and the
// message shows no obvious conjunction of several changes.
inline bool heuristic_atomicity(const CommitRecord& r)
{
    const auto lines = split_lines(r.message);
    if (lines.empty())
        return false;
    const auto header = lines.front();
    const auto colon = header.find(':');
    if (colon == std::string_view::npos)
        return false;
    const auto type = detail::normalize_label_text(header.substr(0, colon));
    const auto label = find_label(type);
    if (!label || *label != r.label)
        return false;
    std::string lower(r.message);
    for (auto& c : lower)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (std::string_view marker : {" and also ", "; also ", " as well as ", " plus ", " & "})
        if (lower.find(marker) != std::string::npos)
            return false;
    // A second CCS header line inside the body means a squashed message.
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto c = lines[i].find(':');
        if (c != std::string_view::npos && c < 20) {
            const auto t = detail::normalize_label_text(lines[i].substr(0, c));
            if (find_label(t) || is_excluded_type(t))
                return false;
        }
    }
    return true;
}

// --- atomic pool ----------------------------------------------------------

struct AtomicPool {
    std::array<std::vector<CommitRecord>, kLabelCount> subpools;
    std::size_t quota = 0;
    std::size_t token_limit = 0;

    std::vector<CommitRecord>& of(ConcernLabel l) { return subpools[static_cast<std::size_t>(l)]; }
    const std::vector<CommitRecord>& of(ConcernLabel l) const { return subpools[static_cast<std::size_t>(l)]; }

    std::size_t size() const
    {
        std::size_t n = 0;
        for (const auto& s : subpools)
            n += s.size();
        return n;
    }

    // Canonical label order, sampling order within a label.
    std::vector<CommitRecord> flatten() const
    {
        std::vector<CommitRecord> out;
        for (const auto& s : subpools)
            out.insert(out.end(), s.begin(), s.end());
        return out;
    }

    static AtomicPool from_records(const std::vector<CommitRecord>& records, std::size_t token_limit = 0)
    {
        AtomicPool p;
        for (const auto& r : records)
            p.of(r.label).push_back(r);
        p.quota = p.subpools[0].size();
        p.token_limit = token_limit;
        return p;
    }

    bool balanced() const
    {
        return std::all_of(subpools.begin(), subpools.end(), [&](const auto& s) { return s.size() == quota; });
    }
};

struct PoolOptions {
    std::size_t quota = 350;
    std::size_t token_limit = 4096;
    std::uint64_t seed = 0;
    AtomicityPredicate atomicity = verified_only;
    TokenCounter counter;
};

// Balanced per-label sampling without replacement. Candidates over the
// token limit are filtered up front; every drawn candidate leaves the
// candidate list whether it is accepted or not, so the loop terminates.
inline AtomicPool sample_atomic_pool(const std::vector<CommitRecord>& records, const PoolOptions& opt)
{
    AtomicPool pool;
    pool.quota = opt.quota;
    pool.token_limit = opt.token_limit;
    if (opt.quota == 0)
        return pool;

    std::vector<CommitRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const CommitRecord& a, const CommitRecord& b) { return a.id < b.id; });

    Rng rng(opt.seed);
    std::unordered_set<std::uint64_t> seen;
    for (auto label : kAllLabels) {
        std::vector<const CommitRecord*> candidates;
        for (const auto& r : sorted)
            if (r.label == label && opt.counter.count(r.length_text()) <= opt.token_limit)
                candidates.push_back(&r);

        auto& sub = pool.of(label);
        while (sub.size() < opt.quota) {
            if (candidates.empty())
                throw InsufficientCandidates(std::string(render(label)) + ": accepted " + std::to_string(sub.size())
                                             + " of quota " + std::to_string(opt.quota));
            const auto at = static_cast<std::size_t>(rng.below(candidates.size()));
            const CommitRecord* a = candidates[at];
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(at));
            if (seen.contains(a->dedup_key()))
                continue;
            if (!opt.atomicity(*a))
                continue;
            seen.insert(a->dedup_key());
            sub.push_back(*a);
        }
    }
    return pool;
}

struct PoolSplit {
    AtomicPool train;
    AtomicPool eval;
};

inline PoolSplit split_pool(const AtomicPool& pool, std::uint64_t seed)
{
    if (pool.quota % 5 != 0)
        throw QuotaNotDivisible("quota " + std::to_string(pool.quota) + " is not divisible by 5");
    if (!pool.balanced())
        throw QuotaNotDivisible("pool is not balanced at quota " + std::to_string(pool.quota));
    PoolSplit out;
    const std::size_t n_train = pool.quota / 5 * 4;
    out.train.quota = n_train;
    out.eval.quota = pool.quota - n_train;
    out.train.token_limit = out.eval.token_limit = pool.token_limit;
    Rng rng(seed);
    for (auto label : kAllLabels) {
        auto shuffled = pool.of(label);
        rng.shuffle(shuffled);
        auto mid = shuffled.begin() + static_cast<std::ptrdiff_t>(n_train);
        out.train.of(label).assign(shuffled.begin(), mid);
        out.eval.of(label).assign(mid, shuffled.end());
    }
    return out;
}

} // namespace tangle

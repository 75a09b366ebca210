#pragma once

// File-level pipeline steps behind the build-pool, split and tangle
// commands. Every output gets a sidecar manifest with its content hash and
// the parameters that produced it.

#include <string>

#include <json.hpp>

#include "tangle/corpus.hpp"
#include "tangle/runner.hpp"
#include "tangle/tangler.hpp"

namespace tangle {

struct BuildPoolResult {
    AtomicPool pool;
    IngestionStats stats;
};

inline BuildPoolResult build_pool_file(const std::string& corpus_path, const PoolOptions& opt, const std::string& atomicity_name,
                                       const std::string& out_path)
{
    const auto corpus_content = read_file(corpus_path);
    auto loaded = parse_corpus(corpus_content, corpus_path);
    BuildPoolResult res{sample_atomic_pool(loaded.records, opt), loaded.stats};
    const auto content = serialize_records(res.pool.flatten());
    write_file(out_path, content);

    nlohmann::ordered_json m;
    m["kind"] = "atomic-pool";
    m["records"] = res.pool.size();
    m["quota"] = opt.quota;
    m["token_limit"] = opt.token_limit;
    m["seed"] = opt.seed;
    m["rng"] = Rng::algorithm;
    m["counter"] = opt.counter.identity();
    m["atomicity"] = atomicity_name;
    m["corpus_hash"] = hex64(fnv1a64(corpus_content));
    m["content_hash"] = hex64(fnv1a64(content));
    nlohmann::ordered_json st;
    st["lines_read"] = loaded.stats.lines_read;
    st["accepted"] = loaded.stats.accepted;
    for (auto r : {DropReason::ExcludedType, DropReason::UnknownLabel, DropReason::EmptyField})
        st[std::string("dropped_") + std::string(render(r))] = loaded.stats.dropped_for(r);
    st["lossy_utf8"] = loaded.stats.lossy_utf8;
    st["duplicate_ids"] = loaded.stats.duplicate_ids;
    m["ingestion"] = st;
    write_manifest(out_path, m);
    return res;
}

// Reads a pool file (dataset format) back into a balanced pool.
inline AtomicPool load_pool_file(const std::string& path)
{
    const auto content = read_file(path);
    verify_manifest(path, content, false);
    // File order is the sampling order inside each label.
    auto loaded = parse_corpus(content, path, true);
    std::size_t limit = 0;
    if (auto m = read_manifest(path))
        limit = m->value("token_limit", std::size_t{0});
    auto pool = AtomicPool::from_records(loaded.records, limit);
    if (!pool.balanced())
        throw SchemaViolation(path + ": pool is not balanced across labels");
    return pool;
}

inline PoolSplit split_pool_file(const std::string& pool_path, std::uint64_t seed, const std::string& train_path,
                                 const std::string& eval_path)
{
    const auto pool = load_pool_file(pool_path);
    auto split = split_pool(pool, seed);
    const auto pool_hash = hex64(fnv1a64(read_file(pool_path)));
    for (auto [part, path, name] : {std::tuple{&split.train, &train_path, "train"}, std::tuple{&split.eval, &eval_path, "eval"}}) {
        const auto content = serialize_records(part->flatten());
        write_file(*path, content);
        nlohmann::ordered_json m;
        m["kind"] = std::string("atomic-pool-") + name;
        m["records"] = part->size();
        m["quota"] = part->quota;
        m["token_limit"] = part->token_limit;
        m["seed"] = seed;
        m["rng"] = Rng::algorithm;
        m["ratio"] = "8:2";
        m["pool_hash"] = pool_hash;
        m["content_hash"] = hex64(fnv1a64(content));
        write_manifest(*path, m);
    }
    return split;
}

inline TangledDataset tangle_file(const std::string& pool_path, const TangleOptions& opt, const std::string& out_path)
{
    const auto pool = load_pool_file(pool_path);
    auto ds = generate_tangled(pool, opt);
    const auto content = serialize_dataset(ds);
    write_file(out_path, content);

    nlohmann::ordered_json m;
    m["kind"] = "tangled-dataset";
    m["samples"] = ds.samples.size();
    m["counts"] = ds.counts;
    m["per_count_quota"] = ds.per_count_quota;
    m["token_limit"] = ds.token_limit;
    m["seed"] = opt.seed;
    m["rng"] = Rng::algorithm;
    m["retry_factor"] = opt.retry_factor;
    m["counter"] = opt.counter.identity();
    m["pool_hash"] = hex64(fnv1a64(read_file(pool_path)));
    m["content_hash"] = hex64(fnv1a64(content));
    write_manifest(out_path, m);
    return ds;
}

} // namespace tangle

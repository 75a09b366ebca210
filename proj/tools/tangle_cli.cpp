// tangle: command-line front end for pool building, tangling, experiment
// runs and reporting.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tangle/corpus.hpp"
#include "tangle/inference.hpp"
#include "tangle/mock_backend.hpp"
#include "tangle/pipeline.hpp"
#include "tangle/promptkit.hpp"
#include "tangle/runner.hpp"
#include "tangle/tangler.hpp"

namespace fs = std::filesystem;
using namespace tangle;

namespace {

TokenCounter make_counter(const std::string& scheme, const std::string& vocab)
{
    return CounterSpec{scheme, vocab}.make();
}

void print_ingestion(const IngestionStats& st)
{
    std::cerr << "ingested " << st.lines_read << " lines: " << st.accepted << " accepted";
    for (auto r : {DropReason::ExcludedType, DropReason::UnknownLabel, DropReason::EmptyField})
        std::cerr << ", " << render(r) << "=" << st.dropped_for(r);
    if (st.lossy_utf8)
        std::cerr << ", lossy-utf8=" << st.lossy_utf8;
    if (st.duplicate_ids)
        std::cerr << ", duplicate-ids=" << st.duplicate_ids;
    std::cerr << "\n";
}

void write_report(const std::string& log_path, const std::string& out_dir)
{
    const auto log = read_outcome_log(log_path);
    const auto rep = build_report(log);
    if (out_dir.empty()) {
        std::cout << report_markdown(rep);
        return;
    }
    fs::create_directories(out_dir);
    write_file((fs::path(out_dir) / "report.csv").string(), report_csv(rep));
    write_file((fs::path(out_dir) / "comparisons.csv").string(), comparisons_csv(rep));
    std::string md = report_markdown(rep);
    if (auto m = read_manifest(log_path)) {
        md += "\n## Manifest\n\n```json\n" + m->dump(2) + "\n```\n";
    }
    write_file((fs::path(out_dir) / "report.md").string(), md);
    std::cerr << "report: " << rep.cells.size() << " cell rows, " << rep.comparisons.size() << " comparisons -> " << out_dir
              << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Tangled-commit concern detection benchmark toolchain"};
    app.require_subcommand(1);

    // build-pool
    auto* bp = app.add_subcommand("build-pool", "Sample a balanced atomic pool from a labelled corpus");
    std::string bp_corpus, bp_out, bp_atomicity = "verified", counter_scheme = "whitespace", vocab_path;
    std::size_t bp_quota = 350, bp_limit = 4096;
    std::uint64_t bp_seed = 7;
    bp->add_option("--corpus", bp_corpus, "Corpus JSON Lines file")->required()->check(CLI::ExistingFile);
    bp->add_option("--out", bp_out, "Output pool file")->required();
    bp->add_option("--quota", bp_quota, "Records per label")->capture_default_str();
    bp->add_option("--token-limit", bp_limit, "Max tokens of message + diff")->capture_default_str();
    bp->add_option("--seed", bp_seed)->capture_default_str();
    bp->add_option("--atomicity", bp_atomicity, "verified | heuristic")
        ->check(CLI::IsMember({"verified", "heuristic"}))
        ->capture_default_str();
    bp->add_option("--counter", counter_scheme, "whitespace | bpe")->check(CLI::IsMember({"whitespace", "bpe"}));
    bp->add_option("--vocab", vocab_path, "Byte-pair merges file (with --counter bpe)");

    // split
    auto* sp = app.add_subcommand("split", "Split a pool 8:2 into train and eval pools");
    std::string sp_pool, sp_train, sp_eval;
    std::uint64_t sp_seed = 7;
    sp->add_option("--pool", sp_pool)->required()->check(CLI::ExistingFile);
    sp->add_option("--train", sp_train)->required();
    sp->add_option("--eval", sp_eval)->required();
    sp->add_option("--seed", sp_seed)->capture_default_str();

    // tangle
    auto* tg = app.add_subcommand("tangle", "Synthesize tangled commits from a pool");
    std::string tg_pool, tg_out, tg_counts = "1..5";
    std::size_t tg_quota = 350, tg_limit = 12288, tg_retry = 100;
    std::uint64_t tg_seed = 7;
    tg->add_option("--pool", tg_pool)->required()->check(CLI::ExistingFile);
    tg->add_option("--out", tg_out)->required();
    tg->add_option("--counts", tg_counts, "Concern counts, e.g. 1..5 or 1,3")->capture_default_str();
    tg->add_option("--quota", tg_quota, "Samples per concern count")->capture_default_str();
    tg->add_option("--token-limit", tg_limit)->capture_default_str();
    tg->add_option("--retry-factor", tg_retry, "Attempts allowed per count, as a multiple of the quota")->capture_default_str();
    tg->add_option("--seed", tg_seed)->capture_default_str();
    tg->add_option("--counter", counter_scheme)->check(CLI::IsMember({"whitespace", "bpe"}));
    tg->add_option("--vocab", vocab_path);

    // run
    auto* rn = app.add_subcommand("run", "Execute an experiment grid into an outcome log");
    std::string rn_config, rn_dataset, rn_log, rn_mock, rn_mock_labels, rn_report_dir;
    std::vector<std::string> rn_set;
    std::string rn_budgets, rn_messages, rn_counts;
    std::size_t rn_runs = 0, rn_in_flight = 0, rn_limit = 0;
    double rn_delay_ms = -1, rn_outlier_ms = -1;
    std::size_t rn_outlier_every = 0;
    rn->add_option("--config", rn_config, "Experiment config document")->check(CLI::ExistingFile);
    rn->add_option("--dataset", rn_dataset);
    rn->add_option("--log", rn_log);
    rn->add_option("--set", rn_set, "Override a config key: section.key=value");
    rn->add_option("--counts", rn_counts);
    rn->add_option("--budgets", rn_budgets, "e.g. full,1024,2048");
    rn->add_option("--messages", rn_messages, "e.g. on,off");
    rn->add_option("--runs", rn_runs);
    rn->add_option("--max-in-flight", rn_in_flight);
    rn->add_option("--sample-limit", rn_limit, "Use the first k samples per concern count");
    rn->add_option("--mock", rn_mock, "Serve answers from the in-process mock backend")
        ->check(CLI::IsMember({"echo-truth", "drop-one-label", "fixed-label", "inject-delay", "inject-noise"}));
    rn->add_option("--mock-labels", rn_mock_labels, "Labels for fixed-label mode");
    rn->add_option("--mock-delay-ms", rn_delay_ms);
    rn->add_option("--mock-outlier-every", rn_outlier_every);
    rn->add_option("--mock-outlier-delay-ms", rn_outlier_ms);
    rn->add_option("--report-dir", rn_report_dir, "Write the report after the run");

    // compare
    auto* cp = app.add_subcommand("compare", "Pairwise statistics between two outcome logs");
    std::string cp_a, cp_b, cp_out;
    cp->add_option("--a", cp_a)->required()->check(CLI::ExistingFile);
    cp->add_option("--b", cp_b)->required()->check(CLI::ExistingFile);
    cp->add_option("--out", cp_out, "Markdown output file (default stdout)");

    // report
    auto* rp = app.add_subcommand("report", "Aggregate an outcome log into CSV and Markdown");
    std::string rp_log, rp_out;
    rp->add_option("--log", rp_log)->required()->check(CLI::ExistingFile);
    rp->add_option("--out-dir", rp_out, "Directory for report.csv, comparisons.csv, report.md (default: Markdown to stdout)");

    // mock-server
    auto* ms = app.add_subcommand("mock-server", "Serve the mock chat-completions backend");
    std::string ms_mode = "echo-truth", ms_host = "127.0.0.1", ms_labels = "feat";
    int ms_port = 8080;
    double ms_delay = 0, ms_noise = 0.1;
    ms->add_option("--mode", ms_mode)->capture_default_str();
    ms->add_option("--host", ms_host)->capture_default_str();
    ms->add_option("--port", ms_port)->capture_default_str();
    ms->add_option("--labels", ms_labels)->capture_default_str();
    ms->add_option("--delay-ms", ms_delay);
    ms->add_option("--noise-rate", ms_noise);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bp) {
            PoolOptions opt;
            opt.quota = bp_quota;
            opt.token_limit = bp_limit;
            opt.seed = bp_seed;
            opt.atomicity = bp_atomicity == "heuristic" ? AtomicityPredicate(heuristic_atomicity) : AtomicityPredicate(verified_only);
            opt.counter = make_counter(counter_scheme, vocab_path);
            const auto res = build_pool_file(bp_corpus, opt, bp_atomicity, bp_out);
            print_ingestion(res.stats);
            std::cerr << "pool: " << res.pool.size() << " records (" << res.pool.quota << " per label) -> " << bp_out << "\n";
        } else if (*sp) {
            const auto split = split_pool_file(sp_pool, sp_seed, sp_train, sp_eval);
            std::cerr << "split: train " << split.train.size() << ", eval " << split.eval.size() << "\n";
        } else if (*tg) {
            TangleOptions opt;
            opt.counts = parse_count_list(tg_counts);
            opt.per_count_quota = tg_quota;
            opt.token_limit = tg_limit;
            opt.seed = tg_seed;
            opt.retry_factor = tg_retry;
            opt.counter = make_counter(counter_scheme, vocab_path);
            const auto ds = tangle_file(tg_pool, opt, tg_out);
            std::cerr << "tangle: " << ds.samples.size() << " samples";
            for (auto [n, c] : ds.histogram())
                std::cerr << " n" << n << "=" << c;
            std::cerr << " -> " << tg_out << "\n";
        } else if (*rn) {
            ExperimentConfig cfg = rn_config.empty() ? ExperimentConfig{} : load_config(rn_config);
            const fs::path cwd = fs::current_path();
            for (const auto& kv : rn_set) {
                auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("--set expects key=value, got '" + kv + "'");
                apply_setting(cfg, std::string(trim(std::string_view(kv).substr(0, eq))), std::string_view(kv).substr(eq + 1), cwd);
            }
            if (!rn_dataset.empty())
                apply_setting(cfg, "dataset", rn_dataset, cwd);
            if (!rn_log.empty())
                apply_setting(cfg, "log", rn_log, cwd);
            if (!rn_counts.empty())
                apply_setting(cfg, "grid.counts", rn_counts, cwd);
            if (!rn_budgets.empty())
                apply_setting(cfg, "grid.budgets", rn_budgets, cwd);
            if (!rn_messages.empty())
                apply_setting(cfg, "grid.include_message", rn_messages, cwd);
            if (rn_runs)
                cfg.runs = rn_runs;
            if (rn_in_flight)
                cfg.endpoint.max_in_flight = rn_in_flight;
            if (rn_limit)
                cfg.sample_limit = rn_limit;
            if (!rn_mock.empty())
                apply_setting(cfg, "mock.mode", rn_mock, cwd);
            if (!rn_mock_labels.empty())
                apply_setting(cfg, "mock.labels", rn_mock_labels, cwd);
            if (rn_delay_ms >= 0)
                apply_setting(cfg, "mock.delay_ms", std::to_string(rn_delay_ms), cwd);
            if (rn_outlier_every)
                apply_setting(cfg, "mock.outlier_every", std::to_string(rn_outlier_every), cwd);
            if (rn_outlier_ms >= 0)
                apply_setting(cfg, "mock.outlier_delay_ms", std::to_string(rn_outlier_ms), cwd);
            if (cfg.dataset_path.empty())
                throw ConfigError("no dataset given (config 'dataset' or --dataset)");

            std::unique_ptr<MockBackend> mock;
            if (cfg.mock) {
                mock = std::make_unique<MockBackend>(*cfg.mock);
                cfg.endpoint.base_url = mock->base_url();
                if (cfg.endpoint.model_name == "default")
                    cfg.endpoint.model_name = "mock-" + std::string(render(cfg.mock->mode));
            }
            cfg.validate();
            const auto counter = cfg.counter.make();
            const auto tpl = cfg.template_path.empty() ? PromptTemplate{} : PromptTemplate::from_file(cfg.template_path);
            const auto dataset = load_grid_dataset(cfg);
            ChatClient client(cfg.endpoint, cfg.decoding, counter);

            nlohmann::ordered_json m;
            m["kind"] = "outcome-log";
            m["model"] = cfg.endpoint.model_name;
            m["endpoint"] = cfg.mock ? std::string("mock:") + std::string(render(cfg.mock->mode)) : cfg.endpoint.base_url;
            m["temperature"] = cfg.decoding.temperature;
            m["decoding_seed"] = cfg.decoding.seed;
            m["seed"] = cfg.seed;
            m["runs"] = cfg.runs;
            m["prompt_version"] = tpl.version;
            m["prompt_hash"] = hex64(tpl.digest());
            m["counter"] = counter.identity();
            m["dataset_hash"] = hex64(fnv1a64(read_file(cfg.dataset_path)));
            if (auto dm = read_manifest(cfg.dataset_path))
                m["dataset_manifest"] = *dm;
            write_manifest(cfg.log_path, m);

            const auto summary = execute_grid(cfg, dataset, client, tpl, counter);
            std::cerr << "run: planned " << summary.planned << ", resumed-skip " << summary.skipped_existing << ", executed "
                      << summary.executed << ", failures " << summary.failures << " -> " << cfg.log_path << "\n";
            if (!rn_report_dir.empty())
                write_report(cfg.log_path, rn_report_dir);
        } else if (*cp) {
            const auto rows = compare_logs(read_outcome_log(cp_a), read_outcome_log(cp_b));
            const auto md = comparison_markdown(rows);
            if (cp_out.empty())
                std::cout << md;
            else
                write_file(cp_out, md);
        } else if (*rp) {
            write_report(rp_log, rp_out);
        } else if (*ms) {
            MockOptions opt;
            opt.mode = parse_mock_mode(ms_mode);
            opt.fixed_labels = parse_label_list(ms_labels);
            opt.delay_seconds = ms_delay / 1000.0;
            opt.noise_rate = ms_noise;
            MockBackend server(opt, ms_host, ms_port);
            std::cerr << "mock backend (" << ms_mode << ") at " << server.base_url() << "\n";
            server.wait();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

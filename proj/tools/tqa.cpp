#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tqa/pipeline.hpp"

namespace {

// exit 0: success; exit 1: stage failure; exit 2: bad usage/config.
constexpr int kExitStage = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
    std::string seed;
};

tqa::PipelineConfig effective_config(const CommonFlags& common) {
    tqa::PipelineConfig cfg;
    if (!common.config_path.empty()) cfg = tqa::load_config(common.config_path);
    if (!common.output_dir.empty()) cfg.output_dir = common.output_dir;
    if (!common.seed.empty()) cfg.seed = std::stoull(common.seed);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal QA dataset toolkit: synthesize, augment, refine and evaluate "
                 "multi-answer temporal questions over dated fact groups"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags (-c, --seed, ...) are valid after a subcommand

    CommonFlags common;
    app.add_option("-c,--config", common.config_path, "Pipeline config JSON file");
    app.add_option("--output-dir", common.output_dir, "Override the configured output directory");
    app.add_option("--seed", common.seed, "Override the master seed");

    std::string statements, snapshot_date;
    CLI::App* ingest = app.add_subcommand("ingest", "Read statements into a grouped, split KB");
    ingest->add_option("--statements", statements, "Statements TSV file");
    ingest->add_option("--snapshot-date", snapshot_date, "KB snapshot date (YYYY-MM), horizon for ongoing facts");

    std::string split = "train";
    std::vector<std::string> quota_overrides;
    CLI::App* generate = app.add_subcommand("generate", "Generate questions for one split");
    generate->add_option("--split", split, "train | dev | test")->capture_default_str();
    generate->add_option("--quota", quota_overrides,
                         "Per-form quota override, form=count (repeatable)");

    std::string pseudo_size, floor;
    CLI::App* augment = app.add_subcommand("augment", "Generate pseudo-instruction data");
    augment->add_option("--pseudo-size", pseudo_size, "Target pseudo dataset size");
    augment->add_option("--floor", floor, "Resampling probability floor in [0, 1]");

    std::string refine_dataset, k_flag, scorer_flag, endpoint_flag;
    CLI::App* refine = app.add_subcommand("refine", "Select top-k relevant paragraphs per question");
    refine->add_option("--dataset", refine_dataset, "Dataset whose questions get refined contexts");
    refine->add_option("--k", k_flag, "Paragraphs to keep per question");
    refine->add_option("--scorer", scorer_flag, "lexical | remote");
    refine->add_option("--endpoint", endpoint_flag, "Remote embedding service endpoint");

    std::string predictions, eval_dataset, cutoff_flag;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against gold answers");
    evaluate->add_option("--predictions", predictions, "Predictions JSONL ({id, prediction})");
    evaluate->add_option("--dataset", eval_dataset, "Dataset the predictions answer");
    evaluate->add_option("--cutoff", cutoff_flag, "In-domain/future boundary (YYYY-MM)");

    std::string stats_dataset;
    CLI::App* stats = app.add_subcommand("stats", "Summarize a dataset file");
    stats->add_option("--dataset", stats_dataset, "Dataset JSONL file");
    stats->add_option("--cutoff", cutoff_flag, "Cutoff used for the before/after counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    auto started = std::chrono::steady_clock::now();
    try {
        tqa::PipelineConfig cfg = effective_config(common);
        std::string summary;
        if (ingest->parsed()) {
            if (!statements.empty()) cfg.statements = statements;
            if (!snapshot_date.empty()) cfg.snapshot_date = tqa::parse_ym_string(snapshot_date);
            summary = tqa::run_ingest(cfg);
        } else if (generate->parsed()) {
            for (const std::string& q : quota_overrides) {
                std::size_t eq = q.find('=');
                if (eq == std::string::npos)
                    throw tqa::ConfigError("--quota expects form=count, got '" + q + "'");
                cfg.quotas[tqa::template_form_from_name(q.substr(0, eq))] =
                    std::stoi(q.substr(eq + 1));
            }
            summary = tqa::run_generate(cfg, split);
        } else if (augment->parsed()) {
            if (!pseudo_size.empty()) cfg.pseudo_size = std::stoull(pseudo_size);
            if (!floor.empty()) cfg.probability_floor = std::stod(floor);
            if (cfg.probability_floor < 0.0 || cfg.probability_floor > 1.0)
                throw tqa::ConfigError("--floor must be in [0, 1]");
            summary = tqa::run_augment(cfg);
        } else if (refine->parsed()) {
            if (!k_flag.empty()) cfg.refine_k = std::stoi(k_flag);
            if (!scorer_flag.empty()) cfg.scorer = scorer_flag;
            if (!endpoint_flag.empty()) cfg.scorer_endpoint = endpoint_flag;
            if (cfg.scorer != "lexical" && cfg.scorer != "remote")
                throw tqa::ConfigError("--scorer must be 'lexical' or 'remote'");
            std::string dataset = refine_dataset.empty()
                                      ? cfg.output_dir + "/dataset_test.jsonl"
                                      : refine_dataset;
            summary = tqa::run_refine(cfg, dataset);
        } else if (evaluate->parsed()) {
            if (!cutoff_flag.empty()) cfg.cutoff = tqa::parse_ym_string(cutoff_flag);
            std::string dataset = eval_dataset.empty() ? cfg.output_dir + "/dataset_test.jsonl"
                                                       : eval_dataset;
            summary = tqa::run_evaluate(cfg, predictions, dataset);
        } else if (stats->parsed()) {
            if (!cutoff_flag.empty()) cfg.cutoff = tqa::parse_ym_string(cutoff_flag);
            std::string json_text;
            summary = tqa::run_stats(cfg, stats_dataset, &json_text);
            std::cout << json_text;
        }
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
        std::cerr << summary << " [" << static_cast<double>(elapsed) / 1000.0 << "s]\n";
        return 0;
    } catch (const tqa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
}

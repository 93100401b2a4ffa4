#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tqa/augment.hpp"
#include "tqa/metrics.hpp"
#include "tqa/refine.hpp"

namespace tqa {

// Raised on bad configuration (maps to exit code 2 in the CLI, as opposed to
// stage failures which exit 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    // Paths; validated per stage at command start.
    std::string statements;
    std::string templates;  // empty = built-in bank
    std::string pools;
    std::string corpus_manifest;
    std::string corpus_dir;
    std::string output_dir = "out";

    std::uint64_t seed = 0;
    TimePoint snapshot_date{2023, 10, Granularity::month};
    TimePoint cutoff{2020, 1, Granularity::month};
    int ceiling_cap = 250;
    std::array<std::size_t, 3> split_sizes{1000, 500, 500};
    int min_group_size = 2;
    int refine_k = 100;
    std::string scorer = "lexical";  // lexical | remote
    std::string scorer_endpoint;
    double probability_floor = 0.0;
    std::size_t pseudo_size = 10000;
    int workers = 1;
    std::map<TemplateForm, int> quotas;
};

PipelineConfig load_config(const std::string& path);
PipelineConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const PipelineConfig& cfg);

// KB file: snapshot date, groups, and the train/dev/test subject partition.
struct StoredKb {
    KnowledgeBase kb;
    std::map<std::string, std::string> split_of_subject;  // subject id -> split name
};

void write_kb(const StoredKb& kb, const std::string& path);
StoredKb read_kb(const std::string& path);

std::vector<FactGroup> groups_of_split(const StoredKb& kb, const std::string& split);

std::vector<Prediction> read_predictions(const std::string& path);

void write_report_json(const Report& report, const std::string& path);
void write_report_tsv(const Report& report, const std::string& path);

struct StatsDocument {
    std::size_t total = 0;
    std::map<std::string, std::size_t> by_level_hops;  // "L2_1hop" ...
    double multi_answer_pct = 0.0;
    double avg_answers = 0.0;
    int min_reference_year = 0;
    int max_reference_year = 0;
    std::size_t before_cutoff = 0;
    std::size_t at_or_after_cutoff = 0;
};

StatsDocument compute_stats(const std::vector<QAItem>& items, const TimePoint& cutoff);
std::string stats_to_json_text(const StatsDocument& stats, const TimePoint& cutoff);

// Stage runners. Each writes its outputs under cfg.output_dir, echoes the
// effective config there, and returns a one-line human summary.
std::string run_ingest(const PipelineConfig& cfg);
std::string run_generate(const PipelineConfig& cfg, const std::string& split);
std::string run_augment(const PipelineConfig& cfg);
std::string run_refine(const PipelineConfig& cfg, const std::string& dataset_path);
std::string run_evaluate(const PipelineConfig& cfg, const std::string& predictions_path,
                         const std::string& dataset_path);
std::string run_stats(const PipelineConfig& cfg, const std::string& dataset_path,
                      std::string* json_out);

}  // namespace tqa

#include "tqa/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tqa/parallel.hpp"
#include "tqa/rng.hpp"

namespace tqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void require_path(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " path not configured");
    if (!fs::exists(path)) throw ConfigError(what + " path does not exist: " + path);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

void echo_config(const PipelineConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    std::ofstream out = open_out(cfg.output_dir + "/effective_config.json");
    out << config_to_json_text(cfg);
}

}  // namespace

PipelineConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig cfg;
    auto str = [&](const char* key, std::string& field) {
        if (j.contains(key) && !j[key].is_null()) field = j[key].get<std::string>();
    };
    str("statements", cfg.statements);
    str("templates", cfg.templates);
    str("pools", cfg.pools);
    str("corpus_manifest", cfg.corpus_manifest);
    str("corpus_dir", cfg.corpus_dir);
    str("output_dir", cfg.output_dir);
    str("scorer", cfg.scorer);
    str("scorer_endpoint", cfg.scorer_endpoint);
    try {
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("snapshot_date")) cfg.snapshot_date = parse_ym_string(j["snapshot_date"].get<std::string>());
        if (j.contains("cutoff")) cfg.cutoff = parse_ym_string(j["cutoff"].get<std::string>());
        if (j.contains("ceiling_cap")) cfg.ceiling_cap = j["ceiling_cap"].get<int>();
        if (j.contains("split_sizes")) {
            auto v = j["split_sizes"].get<std::vector<std::size_t>>();
            if (v.size() != 3) throw ConfigError("split_sizes must have 3 entries");
            std::copy(v.begin(), v.end(), cfg.split_sizes.begin());
        }
        if (j.contains("min_group_size")) cfg.min_group_size = j["min_group_size"].get<int>();
        if (j.contains("refine_k")) cfg.refine_k = j["refine_k"].get<int>();
        if (j.contains("probability_floor")) cfg.probability_floor = j["probability_floor"].get<double>();
        if (j.contains("pseudo_size")) cfg.pseudo_size = j["pseudo_size"].get<std::size_t>();
        if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
        if (j.contains("quotas"))
            for (auto it = j["quotas"].begin(); it != j["quotas"].end(); ++it)
                cfg.quotas[template_form_from_name(it.key())] = it.value().get<int>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    if (cfg.ceiling_cap < 1) throw ConfigError("ceiling_cap must be >= 1");
    if (cfg.refine_k < 1) throw ConfigError("refine_k must be >= 1");
    if (cfg.min_group_size < 1) throw ConfigError("min_group_size must be >= 1");
    if (cfg.probability_floor < 0.0 || cfg.probability_floor > 1.0)
        throw ConfigError("probability_floor must be in [0, 1]");
    if (cfg.scorer != "lexical" && cfg.scorer != "remote")
        throw ConfigError("scorer must be 'lexical' or 'remote'");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    for (const auto& [form, quota] : cfg.quotas)
        if (quota < 0) throw ConfigError("quota for " + template_form_name(form) + " must be >= 0");
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    require_path(path, "config");
    return config_from_json_text(slurp(path));
}

std::string config_to_json_text(const PipelineConfig& cfg) {
    json quotas = json::object();
    for (const auto& [form, quota] : cfg.quotas) quotas[template_form_name(form)] = quota;
    json j{{"statements", cfg.statements},
           {"templates", cfg.templates},
           {"pools", cfg.pools},
           {"corpus_manifest", cfg.corpus_manifest},
           {"corpus_dir", cfg.corpus_dir},
           {"output_dir", cfg.output_dir},
           {"seed", cfg.seed},
           {"snapshot_date", to_ym_string(cfg.snapshot_date)},
           {"cutoff", to_ym_string(cfg.cutoff)},
           {"ceiling_cap", cfg.ceiling_cap},
           {"split_sizes", cfg.split_sizes},
           {"min_group_size", cfg.min_group_size},
           {"refine_k", cfg.refine_k},
           {"scorer", cfg.scorer},
           {"scorer_endpoint", cfg.scorer_endpoint},
           {"probability_floor", cfg.probability_floor},
           {"pseudo_size", cfg.pseudo_size},
           {"workers", cfg.workers},
           {"quotas", quotas}};
    return j.dump(2) + "\n";
}

void write_kb(const StoredKb& kb, const std::string& path) {
    json groups = json::array();
    for (const FactGroup& g : kb.kb.groups) {
        json facts = json::array();
        for (const TemporalFact& f : g.facts) {
            json fact{{"relation_id", f.relation.id},
                      {"relation_label", f.relation.label},
                      {"object_id", f.object.id},
                      {"object_label", f.object.label},
                      {"start", to_ym_string(f.interval.start)}};
            fact["end"] = f.interval.end ? json(to_ym_string(*f.interval.end)) : json(nullptr);
            facts.push_back(std::move(fact));
        }
        json group{{"subject_id", g.subject.id},
                   {"subject_label", g.subject.label},
                   {"representative_relation", g.representative_relation},
                   {"facts", std::move(facts)}};
        auto split = kb.split_of_subject.find(g.subject.id);
        group["split"] = split == kb.split_of_subject.end() ? json(nullptr) : json(split->second);
        groups.push_back(std::move(group));
    }
    json j{{"snapshot_date", to_ym_string(kb.kb.snapshot_date)}, {"groups", std::move(groups)}};
    open_out(path) << j.dump(2) << "\n";
}

StoredKb read_kb(const std::string& path) {
    json j = json::parse(slurp(path));
    StoredKb out;
    out.kb.snapshot_date = parse_ym_string(j.at("snapshot_date").get<std::string>());
    for (const json& group : j.at("groups")) {
        FactGroup g;
        g.subject = {group.at("subject_id").get<std::string>(),
                     group.at("subject_label").get<std::string>()};
        g.representative_relation = group.at("representative_relation").get<std::string>();
        for (const json& fact : group.at("facts")) {
            TemporalFact f;
            f.subject = g.subject;
            f.relation = {fact.at("relation_id").get<std::string>(),
                          fact.at("relation_label").get<std::string>()};
            f.object = {fact.at("object_id").get<std::string>(),
                        fact.at("object_label").get<std::string>()};
            f.interval.start = parse_ym_string(fact.at("start").get<std::string>());
            if (!fact.at("end").is_null())
                f.interval.end = parse_ym_string(fact.at("end").get<std::string>());
            g.facts.push_back(std::move(f));
        }
        if (group.contains("split") && !group["split"].is_null())
            out.split_of_subject[g.subject.id] = group["split"].get<std::string>();
        out.kb.groups.push_back(std::move(g));
    }
    return out;
}

std::vector<FactGroup> groups_of_split(const StoredKb& kb, const std::string& split) {
    std::vector<FactGroup> out;
    for (const FactGroup& g : kb.kb.groups) {
        auto it = kb.split_of_subject.find(g.subject.id);
        if (it != kb.split_of_subject.end() && it->second == split) out.push_back(g);
    }
    return out;
}

std::vector<Prediction> read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open predictions file " + path);
    std::vector<Prediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("predictions line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(Prediction{j.at("id").get<std::string>(), j.at("prediction").get<std::string>()});
    }
    return out;
}

namespace {

json report_to_json(const Report& report) {
    json slices = json::object();
    for (const char* name : kReportSliceNames) {
        const SliceStats& s = report.slices.at(name);
        slices[name] = json{{"n", s.n},
                            {"set_acc", s.set_acc},
                            {"ans_f1", s.ans_f1},
                            {"em", s.em},
                            {"tok_f1", s.tok_f1}};
    }
    return json{{"cutoff", to_ym_string(report.cutoff)},
                {"token_f1_mode", "prediction split on \" and \", max over answer pairs"},
                {"slices", std::move(slices)}};
}

}  // namespace

void write_report_json(const Report& report, const std::string& path) {
    open_out(path) << report_to_json(report).dump(2) << "\n";
}

void write_report_tsv(const Report& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "slice\tn\tset_acc\tans_f1\tem\ttok_f1\n";
    char buf[64];
    for (const char* name : kReportSliceNames) {
        const SliceStats& s = report.slices.at(name);
        std::snprintf(buf, sizeof(buf), "%.4f\t%.4f\t%.4f\t%.4f", s.set_acc, s.ans_f1, s.em, s.tok_f1);
        out << name << '\t' << s.n << '\t' << buf << '\n';
    }
}

StatsDocument compute_stats(const std::vector<QAItem>& items, const TimePoint& cutoff) {
    StatsDocument stats;
    stats.total = items.size();
    for (const char* name : {"L2_1hop", "L2_Mhop", "L3_1hop", "L3_Mhop"})
        stats.by_level_hops[name] = 0;
    std::size_t multi = 0;
    std::size_t answers = 0;
    bool first = true;
    for (const QAItem& item : items) {
        std::string key = std::string(item.level == Level::L2 ? "L2" : "L3") +
                          (item.multi_hop ? "_Mhop" : "_1hop");
        ++stats.by_level_hops[key];
        if (item.n_answers >= 2) ++multi;
        answers += static_cast<std::size_t>(item.n_answers);
        int year = item.reference_time.year;
        if (first) {
            stats.min_reference_year = stats.max_reference_year = year;
            first = false;
        } else {
            stats.min_reference_year = std::min(stats.min_reference_year, year);
            stats.max_reference_year = std::max(stats.max_reference_year, year);
        }
        if (month_index(item.reference_time) < month_index(cutoff)) ++stats.before_cutoff;
        else ++stats.at_or_after_cutoff;
    }
    if (!items.empty()) {
        stats.multi_answer_pct = 100.0 * static_cast<double>(multi) / static_cast<double>(items.size());
        stats.avg_answers = static_cast<double>(answers) / static_cast<double>(items.size());
    }
    return stats;
}

std::string stats_to_json_text(const StatsDocument& stats, const TimePoint& cutoff) {
    json by_level = json::object();
    for (const auto& [k, v] : stats.by_level_hops) by_level[k] = v;
    json j{{"total", stats.total},
           {"by_level_hops", std::move(by_level)},
           {"multi_answer_pct", stats.multi_answer_pct},
           {"avg_answers", stats.avg_answers},
           {"min_reference_year", stats.min_reference_year},
           {"max_reference_year", stats.max_reference_year},
           {"cutoff", to_ym_string(cutoff)},
           {"before_cutoff", stats.before_cutoff},
           {"at_or_after_cutoff", stats.at_or_after_cutoff}};
    return j.dump(2) + "\n";
}

namespace {

std::vector<QuestionTemplate> templates_for(const PipelineConfig& cfg) {
    if (cfg.templates.empty()) return default_templates();
    require_path(cfg.templates, "templates");
    std::ifstream in(cfg.templates);
    return load_templates(in);
}

GenerationConfig generation_config_for(const PipelineConfig& cfg, bool training_split) {
    GenerationConfig gen;
    gen.quotas = cfg.quotas;
    gen.seed = derive_seed(cfg.seed, "generate");
    gen.cutoff = cfg.cutoff;
    gen.apply_cutoff = training_split;
    gen.min_group_size = cfg.min_group_size;
    return gen;
}

}  // namespace

std::string run_ingest(const PipelineConfig& cfg) {
    require_path(cfg.statements, "statements");
    echo_config(cfg);
    std::ifstream in(cfg.statements);
    IngestStats stats;
    KnowledgeBase kb = ingest_statements(in, cfg.snapshot_date, &stats);

    std::vector<FactGroup> capped = apply_relation_ceiling(kb.groups, cfg.ceiling_cap,
                                                           derive_seed(cfg.seed, "ceiling"));
    GroupSplits splits = split_groups(capped, cfg.split_sizes[0], cfg.split_sizes[1],
                                      cfg.split_sizes[2], derive_seed(cfg.seed, "split"));
    StoredKb stored;
    stored.kb.snapshot_date = kb.snapshot_date;
    stored.kb.groups = std::move(capped);
    for (const FactGroup& g : splits.train) stored.split_of_subject[g.subject.id] = "train";
    for (const FactGroup& g : splits.dev) stored.split_of_subject[g.subject.id] = "dev";
    for (const FactGroup& g : splits.test) stored.split_of_subject[g.subject.id] = "test";
    write_kb(stored, cfg.output_dir + "/kb.json");

    std::ostringstream msg;
    msg << "ingest: " << stats.facts << " facts in " << stored.kb.groups.size() << " groups ("
        << stats.skipped_no_temporal + stats.skipped_no_start << " records skipped) -> "
        << cfg.output_dir << "/kb.json";
    return msg.str();
}

std::string run_generate(const PipelineConfig& cfg, const std::string& split) {
    if (split != "train" && split != "dev" && split != "test")
        throw ConfigError("split must be train, dev or test, got '" + split + "'");
    require_path(cfg.output_dir + "/kb.json", "kb (run ingest first)");
    echo_config(cfg);
    StoredKb stored = read_kb(cfg.output_dir + "/kb.json");
    std::vector<FactGroup> groups = groups_of_split(stored, split);
    std::vector<QuestionTemplate> templates = templates_for(cfg);
    GenerationConfig gen = generation_config_for(cfg, split == "train");

    std::vector<std::vector<QAItem>> per_group(groups.size());
    std::optional<TimePoint> horizon = stored.kb.snapshot_date;
    parallel_for(groups.size(), cfg.workers, [&](std::size_t i) {
        per_group[i] = generate_questions(groups[i], templates, gen, horizon);
    });

    std::vector<QAItem> items;
    for (std::vector<QAItem>& chunk : per_group)
        for (QAItem& item : chunk) items.push_back(std::move(item));

    std::string path = cfg.output_dir + "/dataset_" + split + ".jsonl";
    std::ofstream out = open_out(path);
    std::size_t n = write_dataset(items, out);
    std::ostringstream msg;
    msg << "generate: " << n << " questions from " << groups.size() << " " << split
        << " groups -> " << path;
    return msg.str();
}

std::string run_augment(const PipelineConfig& cfg) {
    require_path(cfg.pools, "pools");
    require_path(cfg.output_dir + "/kb.json", "kb (run ingest first)");
    require_path(cfg.output_dir + "/dataset_train.jsonl", "training dataset (run generate first)");
    echo_config(cfg);

    StoredKb stored = read_kb(cfg.output_dir + "/kb.json");
    std::vector<FactGroup> groups = groups_of_split(stored, "train");
    std::ifstream pool_in(cfg.pools);
    PoolSet pools = load_pools(pool_in);
    KindTable kinds = default_kind_table();

    std::ifstream train_in(cfg.output_dir + "/dataset_train.jsonl");
    std::vector<QAItem> training = read_dataset(train_in);
    if (training.empty()) throw std::runtime_error("training dataset is empty; cannot build histogram");
    ResamplingHistogram hist = build_histogram(training);

    std::vector<QuestionTemplate> templates = templates_for(cfg);
    GenerationConfig gen = generation_config_for(cfg, false);
    PseudoConfig pseudo;
    pseudo.target_size = cfg.pseudo_size;
    pseudo.probability_floor = cfg.probability_floor;
    pseudo.workers = cfg.workers;

    std::vector<EntityMapRecord> maps;
    std::vector<QAItem> items =
        sample_pseudo_dataset(groups, hist, templates, gen, pools, kinds, pseudo,
                              derive_seed(cfg.seed, "augment"), stored.kb.snapshot_date, &maps);

    std::string dataset_path = cfg.output_dir + "/pseudo.jsonl";
    {
        std::ofstream out = open_out(dataset_path);
        write_dataset(items, out);
    }
    {
        std::ofstream out = open_out(cfg.output_dir + "/entity_maps.jsonl");
        for (const EntityMapRecord& rec : maps) {
            json m = json::object();
            for (const auto& [real, fictional] : rec.map) m[real] = fictional;
            out << json{{"entity_map_id", rec.entity_map_id}, {"map", std::move(m)}}.dump() << '\n';
        }
    }
    {
        // Instruction-formatted copies; the context is the shifted, anonymized
        // group rendered as fact statements.
        std::map<std::string, FactGroup> shifted_groups;
        std::map<std::string, const EntityMapRecord*> map_by_id;
        for (const EntityMapRecord& rec : maps) map_by_id[rec.entity_map_id] = &rec;
        std::ofstream out = open_out(cfg.output_dir + "/instructions.jsonl");
        std::map<std::string, FactGroup> group_by_subject;
        for (const FactGroup& g : groups) group_by_subject[g.subject.id] = g;
        for (const QAItem& item : items) {
            // Rebuild the pseudo-group this item was generated from.
            const EntityMapRecord* rec = map_by_id.at(item.entity_map_id);
            std::string source_subject;
            for (const auto& [real, fictional] : rec->map)
                if (fictional == item.subject_label) source_subject = real;
            FactGroup pseudo_group = group_by_subject.at(source_subject);
            pseudo_group = shift_group(pseudo_group, ShiftSpec{SignedDuration{item.shift_months}});
            pseudo_group.subject = Entity{item.subject_label, item.subject_label};
            for (TemporalFact& f : pseudo_group.facts) {
                f.subject = pseudo_group.subject;
                const std::string& fictional = rec->map.at(f.object.id);
                f.object = Entity{fictional, fictional};
            }
            TimePoint horizon = add_duration(stored.kb.snapshot_date,
                                             SignedDuration{item.shift_months});
            InstructionExample ex =
                to_instruction_example(item, render_group_context(pseudo_group, horizon));
            out << json{{"instruction", ex.instruction},
                        {"context", ex.context},
                        {"question", ex.question},
                        {"target", ex.target}}
                       .dump()
                << '\n';
        }
    }

    std::ostringstream msg;
    msg << "augment: " << items.size() << " pseudo questions (" << maps.size()
        << " entity maps) -> " << dataset_path;
    return msg.str();
}

std::string run_refine(const PipelineConfig& cfg, const std::string& dataset_path) {
    require_path(dataset_path, "dataset");
    require_path(cfg.corpus_manifest, "corpus manifest");
    require_path(cfg.corpus_dir, "corpus directory");
    echo_config(cfg);

    std::ifstream dataset_in(dataset_path);
    std::vector<QAItem> items = read_dataset(dataset_in);
    FileSearchProvider search(cfg.corpus_manifest, cfg.corpus_dir);

    std::unique_ptr<ScorerProvider> provider;
    if (cfg.scorer == "remote") {
        std::string endpoint = cfg.scorer_endpoint;
        if (const char* env = std::getenv("TQA_SCORER_ENDPOINT")) endpoint = env;
        if (endpoint.empty()) throw ConfigError("remote scorer selected but no endpoint configured");
        provider = std::make_unique<RemoteScorerProvider>(endpoint);
    } else {
        provider = std::make_unique<LexicalScorerProvider>();
    }

    RefinementConfig rcfg{cfg.refine_k};
    std::string path = cfg.output_dir + "/refined.jsonl";
    std::ofstream out = open_out(path);
    std::size_t refined = 0;
    for (const QAItem& item : items) {
        std::vector<ArticleRef> refs = search.search(item.id, -1);
        if (refs.empty()) continue;
        std::vector<std::pair<std::string, std::string>> articles;
        for (const ArticleRef& ref : refs) articles.emplace_back(ref.id, slurp(ref.path));
        std::vector<ScoredParagraph> top = refine_context(item.question, articles, rcfg, *provider);
        json paragraphs = json::array();
        for (const ScoredParagraph& sp : top)
            paragraphs.push_back(json{{"article", sp.paragraph.id.article},
                                      {"ordinal", sp.paragraph.id.ordinal},
                                      {"score", sp.score},
                                      {"text", sp.paragraph.text}});
        out << json{{"id", item.id}, {"paragraphs", std::move(paragraphs)}}.dump() << '\n';
        ++refined;
    }
    std::ostringstream msg;
    msg << "refine: contexts for " << refined << " of " << items.size() << " questions -> " << path;
    return msg.str();
}

std::string run_evaluate(const PipelineConfig& cfg, const std::string& predictions_path,
                         const std::string& dataset_path) {
    require_path(predictions_path, "predictions");
    require_path(dataset_path, "dataset");
    echo_config(cfg);

    std::ifstream dataset_in(dataset_path);
    std::vector<QAItem> dataset = read_dataset(dataset_in);
    std::map<std::string, QAItem> metadata;
    for (QAItem& item : dataset) metadata.emplace(item.id, std::move(item));

    std::vector<Prediction> predictions = read_predictions(predictions_path);
    std::vector<EvalItem> evals;
    evals.reserve(predictions.size());
    for (const Prediction& p : predictions) {
        auto it = metadata.find(p.id);
        if (it == metadata.end())
            throw std::runtime_error("prediction id '" + p.id + "' not found in dataset");
        evals.push_back(evaluate_prediction(p, it->second.answers));
    }
    Report report = aggregate(evals, metadata, cfg.cutoff);
    write_report_json(report, cfg.output_dir + "/report.json");
    write_report_tsv(report, cfg.output_dir + "/report.tsv");

    const SliceStats& overall = report.slices.at("overall");
    std::ostringstream msg;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "set_acc %.4f ans_f1 %.4f em %.4f tok_f1 %.4f",
                  overall.set_acc, overall.ans_f1, overall.em, overall.tok_f1);
    msg << "evaluate: " << evals.size() << " predictions, overall " << buf << " -> "
        << cfg.output_dir << "/report.json";
    return msg.str();
}

std::string run_stats(const PipelineConfig& cfg, const std::string& dataset_path,
                      std::string* json_out) {
    require_path(dataset_path, "dataset");
    std::ifstream in(dataset_path);
    std::vector<QAItem> items = read_dataset(in);
    StatsDocument stats = compute_stats(items, cfg.cutoff);
    if (json_out) *json_out = stats_to_json_text(stats, cfg.cutoff);
    std::ostringstream msg;
    msg << "stats: " << stats.total << " items, " << stats.multi_answer_pct << "% multi-answer, "
        << stats.at_or_after_cutoff << " at/after cutoff " << to_ym_string(cfg.cutoff);
    return msg.str();
}

}  // namespace tqa

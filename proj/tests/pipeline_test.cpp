#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tqa/pipeline.hpp"

using namespace tqa;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("pipeline_test_tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all("pipeline_test_tmp"); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("config parses with defaults and validates") {
    PipelineConfig cfg = config_from_json_text(R"({"seed": 7, "output_dir": "x"})");
    CHECK(cfg.seed == 7);
    CHECK(cfg.output_dir == "x");
    CHECK(cfg.ceiling_cap == 250);
    CHECK(cfg.split_sizes == std::array<std::size_t, 3>{1000, 500, 500});
    CHECK(cfg.refine_k == 100);
    CHECK(cfg.cutoff == TimePoint{2020, 1, Granularity::month});
    CHECK(cfg.scorer == "lexical");
    CHECK(cfg.probability_floor == 0.0);

    CHECK_THROWS_AS(config_from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"ceiling_cap": 0})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"scorer": "psychic"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"probability_floor": 1.5})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"split_sizes": [1, 2]})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"quotas": {"point_l2": -1}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"quotas": {"bogus_form": 1}})"), ConfigError);

    PipelineConfig quotas = config_from_json_text(R"({"quotas": {"point_l2": 3}})");
    CHECK(quota_for(GenerationConfig{quotas.quotas}, TemplateForm::point_l2) == 3);
    CHECK(quota_for(GenerationConfig{quotas.quotas}, TemplateForm::interval_l2) == 1);

    // round trip
    PipelineConfig again = config_from_json_text(config_to_json_text(quotas));
    CHECK(config_to_json_text(again) == config_to_json_text(quotas));
}

TEST_CASE("kb file round-trips groups and splits") {
    TempDir tmp("kb");
    StoredKb kb;
    kb.kb.snapshot_date = TimePoint{2023, 10, Granularity::month};
    FactGroup g;
    g.subject = {"Q1", "Subject One"};
    TemporalFact f;
    f.subject = g.subject;
    f.relation = {"P69", "educated at"};
    f.object = {"Q2", "Some College"};
    f.interval = {TimePoint{2000, 9}, TimePoint{2003, 8}};
    g.facts.push_back(f);
    f.object = {"Q3", "Other College"};
    f.interval = {TimePoint{2004, 1}, std::nullopt};
    g.facts.push_back(f);
    g.representative_relation = "P69";
    kb.kb.groups.push_back(g);
    kb.split_of_subject["Q1"] = "train";

    write_kb(kb, tmp.file("kb.json"));
    StoredKb reread = read_kb(tmp.file("kb.json"));
    REQUIRE(reread.kb.groups.size() == 1);
    CHECK(reread.kb.snapshot_date == kb.kb.snapshot_date);
    CHECK(reread.kb.groups[0].subject.label == "Subject One");
    CHECK(reread.kb.groups[0].facts.size() == 2);
    CHECK(reread.kb.groups[0].facts[0].interval.end.has_value());
    CHECK_FALSE(reread.kb.groups[0].facts[1].interval.end.has_value());
    CHECK(reread.split_of_subject.at("Q1") == "train");
    CHECK(groups_of_split(reread, "train").size() == 1);
    CHECK(groups_of_split(reread, "dev").empty());
}

TEST_CASE("stats count slices, answers and the cutoff") {
    std::vector<QAItem> items;
    auto add = [&](Level level, bool multi_hop, int n_answers, int year) {
        QAItem item;
        item.level = level;
        item.multi_hop = multi_hop;
        item.n_answers = n_answers;
        item.reference_time = TimePoint{year, 5, Granularity::month};
        items.push_back(item);
    };
    add(Level::L2, false, 1, 2001);
    add(Level::L2, true, 2, 2005);
    add(Level::L3, false, 1, 2019);
    add(Level::L3, true, 3, 2021);

    StatsDocument stats = compute_stats(items, TimePoint{2020, 1, Granularity::month});
    CHECK(stats.total == 4);
    CHECK(stats.by_level_hops.at("L2_1hop") == 1);
    CHECK(stats.by_level_hops.at("L2_Mhop") == 1);
    CHECK(stats.by_level_hops.at("L3_1hop") == 1);
    CHECK(stats.by_level_hops.at("L3_Mhop") == 1);
    CHECK(stats.multi_answer_pct == 50.0);
    CHECK(stats.avg_answers == doctest::Approx(7.0 / 4.0));
    CHECK(stats.min_reference_year == 2001);
    CHECK(stats.max_reference_year == 2021);
    CHECK(stats.before_cutoff == 3);
    CHECK(stats.at_or_after_cutoff == 1);

    StatsDocument empty = compute_stats({}, TimePoint{2020, 1, Granularity::month});
    CHECK(empty.total == 0);
    CHECK(empty.multi_answer_pct == 0.0);
}

TEST_CASE("reports write both formats") {
    TempDir tmp("report");
    std::map<std::string, QAItem> metadata;
    QAItem meta;
    meta.id = "x";
    meta.level = Level::L2;
    meta.n_answers = 1;
    meta.reference_time = TimePoint{2001, 1};
    metadata["x"] = meta;
    Report report = aggregate({evaluate_prediction({"x", "a"}, make_answer_set({"a"}))}, metadata,
                              TimePoint{2020, 1, Granularity::month});
    write_report_json(report, tmp.file("report.json"));
    write_report_tsv(report, tmp.file("report.tsv"));

    std::ifstream json_in(tmp.file("report.json"));
    std::string json_text((std::istreambuf_iterator<char>(json_in)), {});
    CHECK(json_text.find("\"overall\"") != std::string::npos);
    CHECK(json_text.find("token_f1_mode") != std::string::npos);

    std::ifstream tsv_in(tmp.file("report.tsv"));
    std::string header;
    std::getline(tsv_in, header);
    CHECK(header == "slice\tn\tset_acc\tans_f1\tem\ttok_f1");
    std::string line;
    int rows = 0;
    while (std::getline(tsv_in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 9);
}

TEST_CASE("stage runners compose end to end in process") {
    TempDir tmp("e2e");
    {
        std::ofstream statements(tmp.file("statements.tsv"));
        auto row = [&](const std::string& subj, const std::string& rel,
                       const std::string& rel_label, const std::string& obj,
                       const std::string& start, const std::string& end) {
            statements << subj << '\t' << "Person " << subj << '\t' << rel << '\t' << rel_label
                       << '\t' << obj << '\t' << obj << " label" << '\t' << start << '\t' << end
                       << '\n';
        };
        row("s1", "P69", "educated at", "school-a", "1990-09", "1994-06");
        row("s1", "P69", "educated at", "school-b", "1995-09", "1999-06");
        row("s1", "P108", "employer", "firm-a", "1999-08", "2008-02");
        row("s2", "P108", "employer", "firm-b", "2001-01", "2010-12");
        row("s2", "P108", "employer", "firm-c", "2009-05", "");
        row("s3", "P54", "member of sports team", "team-a", "1985-03", "1994-10");
        row("s3", "P54", "member of sports team", "team-b", "1994-11", "2002-06");
        row("s4", "P69", "educated at", "school-c", "1940-09", "1944-06");
        row("s4", "P69", "educated at", "school-d", "1950-01", "1952-12");
    }
    {
        std::ofstream pools(tmp.file("pools.json"));
        pools << R"({"people": ["Pa", "Pb", "Pc", "Pd", "Pe", "Pf"],
                     "schools": ["Sa", "Sb", "Sc", "Sd", "Se"],
                     "companies": ["Ca", "Cb", "Cc", "Cd", "Ce"],
                     "teams": ["Ta", "Tb", "Tc", "Td"],
                     "countries": ["Na"], "towns": ["Wa"], "awards": ["Aa"]})";
    }

    PipelineConfig cfg;
    cfg.statements = tmp.file("statements.tsv");
    cfg.pools = tmp.file("pools.json");
    cfg.output_dir = tmp.file("out");
    cfg.seed = 99;
    cfg.snapshot_date = TimePoint{2023, 10};
    cfg.split_sizes = {2, 1, 1};
    cfg.pseudo_size = 15;
    cfg.workers = 2;

    run_ingest(cfg);
    CHECK(fs::exists(tmp.file("out/kb.json")));
    CHECK(fs::exists(tmp.file("out/effective_config.json")));

    for (const char* split : {"train", "dev", "test"}) run_generate(cfg, split);
    std::ifstream train_in(tmp.file("out/dataset_train.jsonl"));
    std::vector<QAItem> train = read_dataset(train_in);
    REQUIRE_FALSE(train.empty());

    run_augment(cfg);
    std::ifstream pseudo_in(tmp.file("out/pseudo.jsonl"));
    std::vector<QAItem> pseudo = read_dataset(pseudo_in);
    CHECK_FALSE(pseudo.empty());
    CHECK(pseudo.size() <= 15);
    CHECK(fs::exists(tmp.file("out/entity_maps.jsonl")));
    CHECK(fs::exists(tmp.file("out/instructions.jsonl")));

    {
        std::ifstream test_in(tmp.file("out/dataset_test.jsonl"));
        std::vector<QAItem> test_items = read_dataset(test_in);
        REQUIRE_FALSE(test_items.empty());
        std::ofstream preds(tmp.file("preds.jsonl"));
        for (const QAItem& item : test_items) {
            std::string joined;
            for (const std::string& a : item.answers.labels) {
                if (!joined.empty()) joined += " and ";
                joined += a;
            }
            preds << R"({"id": )" << nlohmann::json(item.id) << R"(, "prediction": )"
                  << nlohmann::json(joined) << "}\n";
        }
    }
    run_evaluate(cfg, tmp.file("preds.jsonl"), tmp.file("out/dataset_test.jsonl"));
    std::ifstream report_in(tmp.file("out/report.json"));
    nlohmann::json report = nlohmann::json::parse(report_in);
    CHECK(report.at("slices").at("overall").at("set_acc").get<double>() == 1.0);

    std::string stats_json;
    run_stats(cfg, tmp.file("out/dataset_train.jsonl"), &stats_json);
    nlohmann::json stats = nlohmann::json::parse(stats_json);
    CHECK(stats.at("at_or_after_cutoff").get<std::size_t>() == 0);

    // a second generate pass writes identical bytes
    std::string first = [&] {
        std::ifstream in(tmp.file("out/dataset_train.jsonl"), std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), {});
    }();
    run_generate(cfg, "train");
    std::ifstream again_in(tmp.file("out/dataset_train.jsonl"), std::ios::binary);
    std::string second((std::istreambuf_iterator<char>(again_in)), {});
    CHECK(first == second);
}

TEST_CASE("refine stage reaches a remote scorer via the endpoint env override") {
    TempDir tmp("remote");

    httplib::Server server;
    server.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body = nlohmann::json::parse(req.body);
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& text : body.at("texts")) {
            // one fixed direction per distinct text length: deterministic and unit
            std::size_t len = text.get<std::string>().size();
            std::vector<double> v{len % 2 ? 1.0 : 0.0, len % 2 ? 0.0 : 1.0};
            vectors.push_back(v);
        }
        res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    {
        std::ofstream(tmp.file("article.txt")) << "alpha beta gamma delta epsilon";
        std::ofstream dataset(tmp.file("dataset.jsonl"));
        QAItem item;
        item.id = "q1";
        item.question = "which things happened?";
        item.answers = make_answer_set({"alpha"});
        item.n_answers = 1;
        item.reference_time = TimePoint{2001, 1};
        item.subject_id = "s";
        item.subject_label = "s";
        item.relation_id = "P69";
        item.query.subject_id = "s";
        item.query.relation_id = "P69";
        item.query.form = QueryForm::point_l2;
        item.query.t_r = TimePoint{2001, 1};
        dataset << qa_item_to_json_line(item) << "\n";
        std::ofstream(tmp.file("manifest.json")) << R"({"q1": ["article.txt"]})";
    }

    PipelineConfig cfg;
    cfg.corpus_manifest = tmp.file("manifest.json");
    cfg.corpus_dir = tmp.path.string();
    cfg.output_dir = tmp.file("out");
    cfg.scorer = "remote";
    cfg.scorer_endpoint = "http://127.0.0.1:1/embed";  // dead address; env must win
    cfg.refine_k = 3;

    setenv("TQA_SCORER_ENDPOINT",
           ("http://127.0.0.1:" + std::to_string(port) + "/embed").c_str(), 1);
    run_refine(cfg, tmp.file("dataset.jsonl"));
    unsetenv("TQA_SCORER_ENDPOINT");

    std::ifstream refined_in(tmp.file("out/refined.jsonl"));
    nlohmann::json refined = nlohmann::json::parse(refined_in);
    CHECK(refined.at("id") == "q1");
    CHECK(refined.at("paragraphs").size() == 1);

    // without the env override the dead endpoint is a stage error
    CHECK_THROWS_AS(run_refine(cfg, tmp.file("dataset.jsonl")), std::runtime_error);

    server.stop();
    server_thread.join();
}

TEST_CASE("missing paths are config errors") {
    PipelineConfig cfg;
    cfg.statements = "does/not/exist.tsv";
    cfg.output_dir = "pipeline_test_tmp/none";
    CHECK_THROWS_AS(run_ingest(cfg), ConfigError);
    CHECK_THROWS_AS(run_generate(cfg, "nope"), ConfigError);
    CHECK_THROWS_AS(run_stats(cfg, "missing.jsonl", nullptr), ConfigError);
    fs::remove_all("pipeline_test_tmp");
}

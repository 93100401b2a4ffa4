#include <doctest.h>

#include <set>
#include <sstream>

#include "generators.hpp"
#include "tqa/qgen.hpp"

using namespace tqa;

namespace {

TimePoint ym(int y, int m) { return TimePoint{y, m, Granularity::month}; }

TemporalFact fact(const Entity& subject, const std::string& rel, const std::string& obj,
                  TimePoint start, std::optional<TimePoint> end) {
    TemporalFact f;
    f.subject = subject;
    f.relation = {rel, rel};
    f.object = {obj, obj};
    f.interval = {start, end};
    return f;
}

FactGroup moran_group() {
    Entity s{"moran", "Layla Moran"};
    FactGroup g;
    g.subject = s;
    g.facts = {
        fact(s, "P39", "Member of the 57th Parliament of the United Kingdom", ym(2017, 6), ym(2019, 11)),
        fact(s, "P69", "UCL Institute of Education", ym(2007, 9), ym(2008, 9)),
        fact(s, "P39", "Member of the 58th Parliament of the United Kingdom", ym(2019, 12), ym(2023, 5)),
        fact(s, "P69", "Brunel University", ym(2005, 9), ym(2007, 3)),
        fact(s, "P69", "Imperial College London", ym(2000, 9), ym(2003, 8)),
    };
    g.representative_relation = "P69";
    return g;
}

const std::optional<TimePoint> kHorizon = ym(2023, 10);

}  // namespace

TEST_CASE("render_template fills slots") {
    QuestionTemplate chairs{"P488", TemplateForm::interval_l2,
                            "Who were the chairs of {subject} from {t1} to {t2}?", ""};
    CHECK(render_template(chairs, {{"subject", "FC Barcelona"},
                                   {"t1", format_time_point(ym(1984, 3))},
                                   {"t2", format_time_point(ym(2003, 3))}}) ==
          "Who were the chairs of FC Barcelona from March 1984 to March 2003?");

    QuestionTemplate educated{"P69", TemplateForm::offset_l2_before,
                              "Where was {subject} educated {dt} before {t1}?", ""};
    CHECK(render_template(educated, {{"subject", "Lynne Bowker"},
                                     {"dt", format_duration(SignedDuration{180})},
                                     {"t1", format_time_point(ym(2005, 6))}}) ==
          "Where was Lynne Bowker educated 15 years before June 2005?");

    CHECK_THROWS_WITH_AS(render_template(chairs, {{"subject", "FC Barcelona"},
                                                  {"t1", "March 1984"}}),
                         "unbound template slot {t2}", std::invalid_argument);
}

TEST_CASE("template validation checks slots per form") {
    CHECK_THROWS_AS(validate_template(QuestionTemplate{
                        "P69", TemplateForm::point_l2, "Where was {subject} educated?", ""}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate_template(QuestionTemplate{
                        "P69", TemplateForm::point_l2,
                        "Where was {subject} educated in {t1} or {t2}?", ""}),
                    std::invalid_argument);
    // during templates need a distinct ref relation
    CHECK_THROWS_AS(validate_template(QuestionTemplate{
                        "P69", TemplateForm::during_l3,
                        "Where was {subject} educated when he/she was living in {object}?", ""}),
                    std::invalid_argument);
    CHECK_NOTHROW(validate_template(QuestionTemplate{
        "P69", TemplateForm::during_l3,
        "Where was {subject} educated when he/she was living in {object}?", "P551"}));
}

TEST_CASE("default template bank is internally consistent") {
    std::vector<QuestionTemplate> bank = default_templates();
    CHECK(bank.size() > 80);
    std::set<std::pair<std::string, TemplateForm>> seen;
    for (const QuestionTemplate& tpl : bank) {
        CHECK_NOTHROW(validate_template(tpl));
        CHECK(seen.emplace(tpl.relation, tpl.form).second);  // one pattern per (relation, form)
    }
}

TEST_CASE("templates load from JSON") {
    std::stringstream in(R"([
      {"relation": "P69", "form": "point_l2", "pattern": "Where was {subject} educated in {t1}?"},
      {"relation": "P69", "form": "during_l3",
       "pattern": "Where was {subject} educated when he/she was living in {object}?",
       "ref_relation": "P551"}
    ])");
    std::vector<QuestionTemplate> loaded = load_templates(in);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].form == TemplateForm::point_l2);
    CHECK(loaded[1].ref_relation == "P551");

    std::stringstream bad(R"([{"relation": "P69", "form": "point_l2", "pattern": "no slots"}])");
    CHECK_THROWS_AS(load_templates(bad), std::invalid_argument);
}

TEST_CASE("hops and level classification per form") {
    CHECK_FALSE(is_multi_hop(TemplateForm::point_l2));
    CHECK_FALSE(is_multi_hop(TemplateForm::before_l3));
    CHECK_FALSE(is_multi_hop(TemplateForm::after_l3));
    CHECK(is_multi_hop(TemplateForm::interval_l2));
    CHECK(is_multi_hop(TemplateForm::offset_l2_before));
    CHECK(is_multi_hop(TemplateForm::offset_l2_after));
    CHECK(is_multi_hop(TemplateForm::during_l3));
    CHECK(is_multi_hop(TemplateForm::offset_l3_before));
    CHECK(level_of(TemplateForm::offset_l2_after) == Level::L2);
    CHECK(level_of(TemplateForm::during_l3) == Level::L3);
}

TEST_CASE("generated gold answers match the solver") {
    FactGroup g = moran_group();
    GenerationConfig cfg;
    cfg.seed = 11;
    std::vector<QAItem> items = generate_questions(g, default_templates(), cfg, kHorizon);
    CHECK(items.size() >= 6);
    for (const QAItem& item : items) {
        CHECK_FALSE(item.answers.empty());
        CHECK(item.n_answers == static_cast<int>(item.answers.size()));
        CHECK(answer(g, item.query, kHorizon) == item.answers);
        CHECK(brute_force_answer(g, item.query, kHorizon) == item.answers);
    }
}

TEST_CASE("generation is deterministic") {
    FactGroup g = moran_group();
    GenerationConfig cfg;
    cfg.seed = 23;
    std::vector<QAItem> a = generate_questions(g, default_templates(), cfg, kHorizon);
    std::vector<QAItem> b = generate_questions(g, default_templates(), cfg, kHorizon);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].question == b[i].question);
        CHECK(a[i].answers == b[i].answers);
    }
    cfg.seed = 24;
    std::vector<QAItem> c = generate_questions(g, default_templates(), cfg, kHorizon);
    bool all_same = a.size() == c.size();
    if (all_same)
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].question != c[i].question) all_same = false;
    CHECK_FALSE(all_same);
}

TEST_CASE("groups below the minimum size produce nothing") {
    Entity s{"tiny", "Tiny Subject"};
    FactGroup g;
    g.subject = s;
    g.facts = {fact(s, "P69", "Solo College", ym(2000, 9), ym(2004, 6))};
    g.representative_relation = "P69";
    GenerationConfig cfg;
    CHECK(generate_questions(g, default_templates(), cfg, kHorizon).empty());
    cfg.min_group_size = 1;
    std::vector<QAItem> items = generate_questions(g, default_templates(), cfg, kHorizon);
    CHECK_FALSE(items.empty());
    for (const QAItem& item : items) CHECK(item.level == Level::L2);  // no L3 from one fact
}

TEST_CASE("training cutoff drops late reference times") {
    FactGroup g = moran_group();
    GenerationConfig cfg;
    cfg.seed = 5;
    cfg.apply_cutoff = true;
    cfg.cutoff = ym(2020, 1);
    for (const auto& f : {TemplateForm::point_l2, TemplateForm::interval_l2,
                          TemplateForm::offset_l2_before, TemplateForm::offset_l2_after,
                          TemplateForm::before_l3, TemplateForm::after_l3,
                          TemplateForm::during_l3, TemplateForm::offset_l3_before,
                          TemplateForm::offset_l3_after})
        cfg.quotas[f] = 4;
    std::vector<QAItem> items = generate_questions(g, default_templates(), cfg, kHorizon);
    CHECK_FALSE(items.empty());
    for (const QAItem& item : items) {
        CHECK(month_index(item.reference_time) < month_index(cfg.cutoff));
        // no training question may name a post-cutoff date
        if (item.query.form == QueryForm::interval_l2)
            CHECK(month_index(item.query.t_re) < month_index(cfg.cutoff));
        for (const char* year : {"2020", "2021", "2022", "2023"})
            CHECK(item.question.find(year) == std::string::npos);
    }
}

TEST_CASE("queries are deduplicated and ids unique") {
    FactGroup g = moran_group();
    GenerationConfig cfg;
    cfg.seed = 7;
    cfg.quotas[TemplateForm::before_l3] = 10;  // only 3 distinct refs exist
    for (TemplateForm f : {TemplateForm::point_l2, TemplateForm::interval_l2,
                           TemplateForm::offset_l2_before, TemplateForm::offset_l2_after,
                           TemplateForm::after_l3, TemplateForm::during_l3,
                           TemplateForm::offset_l3_before, TemplateForm::offset_l3_after})
        cfg.quotas[f] = 0;
    std::vector<QAItem> items = generate_questions(g, default_templates(), cfg, kHorizon);
    std::set<std::string> ids, questions;
    for (const QAItem& item : items) {
        CHECK(ids.insert(item.id).second);
        questions.insert(item.question);
    }
    CHECK(items.size() <= 3);
    CHECK(items.size() == questions.size());
}

TEST_CASE("offset questions mention the anchor, not the target") {
    FactGroup g = moran_group();
    GenerationConfig cfg;
    cfg.seed = 31;
    cfg.quotas[TemplateForm::offset_l2_after] = 3;
    for (TemplateForm f : {TemplateForm::point_l2, TemplateForm::interval_l2,
                           TemplateForm::offset_l2_before, TemplateForm::before_l3,
                           TemplateForm::after_l3, TemplateForm::during_l3,
                           TemplateForm::offset_l3_before, TemplateForm::offset_l3_after})
        cfg.quotas[f] = 0;
    std::vector<QAItem> items = generate_questions(g, default_templates(), cfg, kHorizon);
    CHECK_FALSE(items.empty());
    for (const QAItem& item : items) {
        CHECK(item.query.form == QueryForm::offset_l2);
        CHECK(item.query.delta.months > 0);
        CHECK(item.reference_time == item.query.t_r);
        std::string anchor = format_time_point(item.query.t_r);
        CHECK(item.question.find(anchor) != std::string::npos);
        CHECK(item.question.find(format_duration(item.query.delta)) != std::string::npos);
    }
}

TEST_CASE("dataset writes round-trip losslessly") {
    Rng rng(211);
    FactGroup g = testgen::random_group(rng);
    GenerationConfig cfg;
    cfg.seed = 3;
    std::vector<QuestionTemplate> bank = {
        {"R1", TemplateForm::point_l2, "What did {subject} hold in {t1}?", ""},
        {"R1", TemplateForm::interval_l2, "What did {subject} hold from {t1} to {t2}?", ""},
        {"R1", TemplateForm::offset_l2_before, "What did {subject} hold {dt} before {t1}?", ""},
        {"R1", TemplateForm::before_l3, "What did {subject} hold before {object}?", ""},
        {"R1", TemplateForm::after_l3, "What did {subject} hold after {object}?", ""},
        {"R1", TemplateForm::offset_l3_after, "What did {subject} hold {dt} after {object}?", ""},
    };
    std::vector<QAItem> items = generate_questions(g, bank, cfg, testgen::kHorizon);
    REQUIRE_FALSE(items.empty());
    items[0].shift_months = -283;
    items[0].entity_map_id = "pit-r0-S0";

    std::stringstream buffer;
    CHECK(write_dataset(items, buffer) == items.size());
    std::vector<QAItem> reread = read_dataset(buffer);
    REQUIRE(reread.size() == items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const QAItem& a = items[i];
        const QAItem& b = reread[i];
        CHECK(a.id == b.id);
        CHECK(a.question == b.question);
        CHECK(a.answers == b.answers);
        CHECK(a.reference_time == b.reference_time);
        CHECK(a.level == b.level);
        CHECK(a.multi_hop == b.multi_hop);
        CHECK(a.n_answers == b.n_answers);
        CHECK(a.subject_id == b.subject_id);
        CHECK(a.relation_id == b.relation_id);
        CHECK(a.shift_months == b.shift_months);
        CHECK(a.entity_map_id == b.entity_map_id);
        CHECK(qa_item_to_json_line(a) == qa_item_to_json_line(b));
        // the stored query re-solves to the stored answers
        CHECK(answer(g, b.query, testgen::kHorizon) == b.answers);
    }

    std::stringstream empty;
    CHECK(write_dataset({}, empty) == 0);
    CHECK(read_dataset(empty).empty());
}

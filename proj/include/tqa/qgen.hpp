#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tqa/solver.hpp"

namespace tqa {

enum class Level { L2, L3 };

// Template-level form tags. Offset forms are split by direction because the
// direction word lives in the pattern text, not in a slot.
enum class TemplateForm {
    point_l2,
    interval_l2,
    offset_l2_before,
    offset_l2_after,
    before_l3,
    after_l3,
    during_l3,
    offset_l3_before,
    offset_l3_after
};

QueryForm query_form_of(TemplateForm f);
Level level_of(TemplateForm f);
// A temporal hop is one temporal expression in the question; multi-hop
// questions contain two or more.
bool is_multi_hop(TemplateForm f);

std::string template_form_name(TemplateForm f);
TemplateForm template_form_from_name(const std::string& name);
std::string query_form_name(QueryForm f);
QueryForm query_form_from_name(const std::string& name);

// Surface pattern for one (relation, form). Slots: {subject}, {object},
// {t1}, {t2}, {dt}; each form requires a fixed slot set, validated on load.
// ref_relation names the relation of the reference fact for L3 forms; empty
// means "same relation as the target" (the usual before/after case).
struct QuestionTemplate {
    std::string relation;
    TemplateForm form = TemplateForm::point_l2;
    std::string pattern;
    std::string ref_relation;
};

// One generated question with its machine-checkable query and gold answers.
struct QAItem {
    std::string id;
    std::string question;
    Query query;
    AnswerSet answers;
    TimePoint reference_time;
    Level level = Level::L2;
    bool multi_hop = false;
    int n_answers = 0;
    std::string subject_id;
    std::string subject_label;
    std::string relation_id;
    // Pseudo-data provenance; zero/empty for organic items.
    int shift_months = 0;
    std::string entity_map_id;
};

struct GenerationConfig {
    // Max items per (group, template). Forms absent from the map get 1.
    std::map<TemplateForm, int> quotas;
    std::uint64_t seed = 0;
    TimePoint cutoff{2020, 1, Granularity::month};
    bool apply_cutoff = false;  // true for training splits
    int min_group_size = 2;
    int max_offset_months = 360;  // offset questions reach at most 30 years
    int sample_attempts = 64;     // rejection bound per drawn item
};

int quota_for(const GenerationConfig& cfg, TemplateForm f);

// Fills the pattern's slots. Throws std::invalid_argument when the pattern
// references a slot missing from the bindings.
std::string render_template(const QuestionTemplate& tpl,
                            const std::map<std::string, std::string>& bindings);

// All questions for one group. Gold answers come from the solver and are
// never empty; queries are deduplicated; the cutoff filter applies when the
// config marks the split as training. Deterministic for a fixed
// (group, templates, config) regardless of scheduling.
std::vector<QAItem> generate_questions(const FactGroup& group,
                                       const std::vector<QuestionTemplate>& templates,
                                       const GenerationConfig& cfg,
                                       const std::optional<TimePoint>& horizon);

// Line-delimited JSON dataset records; write i/o round-trips losslessly.
std::size_t write_dataset(const std::vector<QAItem>& items, std::ostream& out);
std::vector<QAItem> read_dataset(std::istream& in);
std::string qa_item_to_json_line(const QAItem& item);
QAItem qa_item_from_json_line(const std::string& line, std::size_t line_no = 0);

// Bundled template bank covering the stock relations; a JSON template file
// can replace or extend it.
std::vector<QuestionTemplate> default_templates();
std::vector<QuestionTemplate> load_templates(std::istream& in);
void validate_template(const QuestionTemplate& tpl);

}  // namespace tqa

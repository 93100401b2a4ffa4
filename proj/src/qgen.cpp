#include "tqa/qgen.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tqa/rng.hpp"

namespace tqa {

using nlohmann::json;

QueryForm query_form_of(TemplateForm f) {
    switch (f) {
        case TemplateForm::point_l2: return QueryForm::point_l2;
        case TemplateForm::interval_l2: return QueryForm::interval_l2;
        case TemplateForm::offset_l2_before:
        case TemplateForm::offset_l2_after: return QueryForm::offset_l2;
        case TemplateForm::before_l3: return QueryForm::before_l3;
        case TemplateForm::after_l3: return QueryForm::after_l3;
        case TemplateForm::during_l3: return QueryForm::during_l3;
        case TemplateForm::offset_l3_before:
        case TemplateForm::offset_l3_after: return QueryForm::offset_l3;
    }
    throw std::logic_error("unreachable template form");
}

Level level_of(TemplateForm f) {
    switch (query_form_of(f)) {
        case QueryForm::point_l2:
        case QueryForm::interval_l2:
        case QueryForm::offset_l2: return Level::L2;
        default: return Level::L3;
    }
}

bool is_multi_hop(TemplateForm f) {
    switch (query_form_of(f)) {
        case QueryForm::point_l2:
        case QueryForm::before_l3:
        case QueryForm::after_l3: return false;
        default: return true;
    }
}

namespace {

struct FormName {
    TemplateForm form;
    const char* name;
};

constexpr FormName kTemplateFormNames[] = {
    {TemplateForm::point_l2, "point_l2"},
    {TemplateForm::interval_l2, "interval_l2"},
    {TemplateForm::offset_l2_before, "offset_l2_before"},
    {TemplateForm::offset_l2_after, "offset_l2_after"},
    {TemplateForm::before_l3, "before_l3"},
    {TemplateForm::after_l3, "after_l3"},
    {TemplateForm::during_l3, "during_l3"},
    {TemplateForm::offset_l3_before, "offset_l3_before"},
    {TemplateForm::offset_l3_after, "offset_l3_after"},
};

}  // namespace

std::string template_form_name(TemplateForm f) {
    for (const auto& e : kTemplateFormNames)
        if (e.form == f) return e.name;
    throw std::logic_error("unreachable template form");
}

TemplateForm template_form_from_name(const std::string& name) {
    for (const auto& e : kTemplateFormNames)
        if (name == e.name) return e.form;
    throw std::invalid_argument("unknown template form '" + name + "'");
}

std::string query_form_name(QueryForm f) {
    switch (f) {
        case QueryForm::point_l2: return "point_l2";
        case QueryForm::interval_l2: return "interval_l2";
        case QueryForm::offset_l2: return "offset_l2";
        case QueryForm::before_l3: return "before_l3";
        case QueryForm::after_l3: return "after_l3";
        case QueryForm::during_l3: return "during_l3";
        case QueryForm::offset_l3: return "offset_l3";
    }
    throw std::logic_error("unreachable query form");
}

QueryForm query_form_from_name(const std::string& name) {
    for (QueryForm f : {QueryForm::point_l2, QueryForm::interval_l2, QueryForm::offset_l2,
                        QueryForm::before_l3, QueryForm::after_l3, QueryForm::during_l3,
                        QueryForm::offset_l3})
        if (query_form_name(f) == name) return f;
    throw std::invalid_argument("unknown query form '" + name + "'");
}

int quota_for(const GenerationConfig& cfg, TemplateForm f) {
    auto it = cfg.quotas.find(f);
    return it == cfg.quotas.end() ? 1 : it->second;
}

namespace {

std::vector<std::string> slots_in_pattern(const std::string& pattern) {
    std::vector<std::string> slots;
    std::size_t pos = 0;
    while ((pos = pattern.find('{', pos)) != std::string::npos) {
        std::size_t close = pattern.find('}', pos);
        if (close == std::string::npos) break;
        slots.push_back(pattern.substr(pos + 1, close - pos - 1));
        pos = close + 1;
    }
    return slots;
}

std::set<std::string> required_slots(TemplateForm f) {
    switch (f) {
        case TemplateForm::point_l2: return {"subject", "t1"};
        case TemplateForm::interval_l2: return {"subject", "t1", "t2"};
        case TemplateForm::offset_l2_before:
        case TemplateForm::offset_l2_after: return {"subject", "dt", "t1"};
        case TemplateForm::before_l3:
        case TemplateForm::after_l3:
        case TemplateForm::during_l3: return {"subject", "object"};
        case TemplateForm::offset_l3_before:
        case TemplateForm::offset_l3_after: return {"subject", "dt", "object"};
    }
    throw std::logic_error("unreachable template form");
}

}  // namespace

void validate_template(const QuestionTemplate& tpl) {
    if (tpl.relation.empty()) throw std::invalid_argument("template without relation id");
    std::set<std::string> want = required_slots(tpl.form);
    std::set<std::string> have;
    for (const std::string& s : slots_in_pattern(tpl.pattern)) have.insert(s);
    if (want != have) {
        std::string msg = "template for " + tpl.relation + " (" + template_form_name(tpl.form) +
                          ") must use exactly the slots:";
        for (const std::string& s : want) msg += " {" + s + "}";
        throw std::invalid_argument(msg);
    }
    if (tpl.form == TemplateForm::during_l3 && tpl.ref_relation.empty())
        throw std::invalid_argument("during_l3 template for " + tpl.relation +
                                    " needs a ref_relation distinct from the target");
    if (tpl.form == TemplateForm::during_l3 && tpl.ref_relation == tpl.relation)
        throw std::invalid_argument("during_l3 template for " + tpl.relation +
                                    " must reference a different relation");
}

std::string render_template(const QuestionTemplate& tpl,
                            const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(tpl.pattern.size() + 32);
    std::size_t pos = 0;
    while (pos < tpl.pattern.size()) {
        std::size_t open = tpl.pattern.find('{', pos);
        if (open == std::string::npos) {
            out.append(tpl.pattern, pos, std::string::npos);
            break;
        }
        out.append(tpl.pattern, pos, open - pos);
        std::size_t close = tpl.pattern.find('}', open);
        if (close == std::string::npos) {
            out.append(tpl.pattern, open, std::string::npos);
            break;
        }
        std::string slot = tpl.pattern.substr(open + 1, close - open - 1);
        auto it = bindings.find(slot);
        if (it == bindings.end())
            throw std::invalid_argument("unbound template slot {" + slot + "}");
        out += it->second;
        pos = close + 1;
    }
    return out;
}

namespace {

struct RelationPhrases {
    const char* relation;
    const char* stem;          // "Where was {subject} educated"
    const char* ref_past;      // "studied at {object}" (empty: org-style "{object}" ref)
    const char* during_stem;   // overrides stem for during_l3 when set
};

// Question stems for the stock Wikidata relations. Relations whose subject is
// an organization phrase their before/after questions directly on the object.
constexpr RelationPhrases kRelationPhrases[] = {
    {"P54", "Which team did {subject} play for", "played for {object}", nullptr},
    {"P39", "Which position did {subject} hold", "held the position of {object}", nullptr},
    {"P108", "Which employer did {subject} work for", "worked for {object}", nullptr},
    {"P102", "Which political party did {subject} belong to", "was a member of {object}", nullptr},
    {"P286", "Who was the head coach of {subject}", "", nullptr},
    {"P69", "Where was {subject} educated", "studied at {object}", nullptr},
    {"P488", "Who was the chair of {subject}", "", "Who were the chairs of {subject}"},
    {"P6", "Who was the head of {subject}", "", nullptr},
    {"P35", "Who was the head of state of {subject}", "", nullptr},
    {"P127", "Who was the owner of {subject}", "", "Who were the owners of {subject}"},
    {"P26", "Who was {subject} married to", "was married to {object}", nullptr},
    {"P166", "Which award did {subject} receive", "received {object}", nullptr},
    {"P937", "Where did {subject} work", "worked in {object}", nullptr},
    {"P551", "What was the residence of {subject}", "lived in {object}", nullptr},
};

struct DuringPair {
    const char* relation;
    const char* ref_relation;
    const char* ref_phrase;  // "he/she was living in {object}" / "{object} was the head coach"
};

constexpr DuringPair kDuringPairs[] = {
    {"P69", "P551", "he/she was living in {object}"},
    {"P166", "P108", "he/she was working for {object}"},
    {"P937", "P26", "he/she was married to {object}"},
    {"P54", "P26", "he/she was married to {object}"},
    {"P127", "P286", "{object} was the head coach"},
};

struct OffsetL3Entry {
    const char* relation;
    const char* ref_relation;
    const char* ref_phrase;  // "he/she studied at {object}"
};

constexpr OffsetL3Entry kOffsetL3Entries[] = {
    {"P108", "P69", "he/she studied at {object}"},
    {"P69", "P69", "he/she studied at {object}"},
};

}  // namespace

std::vector<QuestionTemplate> default_templates() {
    std::vector<QuestionTemplate> out;
    for (const RelationPhrases& rp : kRelationPhrases) {
        std::string stem = rp.stem;
        out.push_back({rp.relation, TemplateForm::point_l2, stem + " in {t1}?", ""});
        std::string interval_stem = rp.during_stem ? rp.during_stem : stem;
        out.push_back({rp.relation, TemplateForm::interval_l2, interval_stem + " from {t1} to {t2}?", ""});
        out.push_back({rp.relation, TemplateForm::offset_l2_before, stem + " {dt} before {t1}?", ""});
        out.push_back({rp.relation, TemplateForm::offset_l2_after, stem + " {dt} after {t1}?", ""});
        std::string ref_past = rp.ref_past;
        if (ref_past.empty()) {
            out.push_back({rp.relation, TemplateForm::before_l3, stem + " before {object}?", ""});
            out.push_back({rp.relation, TemplateForm::after_l3, stem + " after {object}?", ""});
        } else {
            out.push_back({rp.relation, TemplateForm::before_l3, stem + " before he/she " + ref_past + "?", ""});
            out.push_back({rp.relation, TemplateForm::after_l3, stem + " after he/she " + ref_past + "?", ""});
        }
    }
    auto stem_of = [](const std::string& relation) -> std::string {
        for (const RelationPhrases& rp : kRelationPhrases)
            if (relation == rp.relation) return rp.stem;
        throw std::logic_error("no stem for relation " + relation);
    };
    for (const DuringPair& dp : kDuringPairs) {
        std::string stem = stem_of(dp.relation);
        for (const RelationPhrases& rp : kRelationPhrases)
            if (dp.relation == std::string(rp.relation) && rp.during_stem) stem = rp.during_stem;
        out.push_back({dp.relation, TemplateForm::during_l3,
                       stem + " when " + dp.ref_phrase + "?", dp.ref_relation});
    }
    for (const OffsetL3Entry& oe : kOffsetL3Entries) {
        std::string stem = stem_of(oe.relation);
        out.push_back({oe.relation, TemplateForm::offset_l3_before,
                       stem + " {dt} before " + oe.ref_phrase + "?", oe.ref_relation});
        out.push_back({oe.relation, TemplateForm::offset_l3_after,
                       stem + " {dt} after " + oe.ref_phrase + "?", oe.ref_relation});
    }
    for (const QuestionTemplate& tpl : out) validate_template(tpl);
    return out;
}

std::vector<QuestionTemplate> load_templates(std::istream& in) {
    json j;
    in >> j;
    if (!j.is_array()) throw std::invalid_argument("template file must be a JSON array");
    std::vector<QuestionTemplate> out;
    for (const json& e : j) {
        QuestionTemplate tpl;
        tpl.relation = e.at("relation").get<std::string>();
        tpl.form = template_form_from_name(e.at("form").get<std::string>());
        tpl.pattern = e.at("pattern").get<std::string>();
        if (e.contains("ref_relation") && !e["ref_relation"].is_null())
            tpl.ref_relation = e["ref_relation"].get<std::string>();
        validate_template(tpl);
        out.push_back(std::move(tpl));
    }
    return out;
}

namespace {

// All months covered by at least one fact of the relation, ascending.
std::vector<std::int64_t> covered_months(const FactGroup& group, const std::string& relation,
                                         const std::optional<TimePoint>& horizon) {
    std::vector<std::int64_t> months;
    for (const TemporalFact& f : group.facts) {
        if (f.relation.id != relation) continue;
        std::int64_t lo = month_index(f.interval.start);
        std::int64_t hi = month_index(resolve_end(f.interval, horizon));
        for (std::int64_t m = lo; m <= hi; ++m) months.push_back(m);
    }
    std::sort(months.begin(), months.end());
    months.erase(std::unique(months.begin(), months.end()), months.end());
    return months;
}

// Facts of the relation usable as unambiguous references: their
// (relation, object) pair occurs in exactly one episode of the group.
std::vector<std::size_t> unambiguous_refs(const FactGroup& group, const std::string& relation) {
    std::map<std::pair<std::string, std::string>, int> episode_counts;
    for (const TemporalFact& f : group.facts)
        ++episode_counts[{f.relation.id, f.object.id}];
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < group.facts.size(); ++i) {
        const TemporalFact& f = group.facts[i];
        if (f.relation.id == relation && episode_counts[{f.relation.id, f.object.id}] == 1)
            out.push_back(i);
    }
    return out;
}

std::string query_key(const Query& q);  // forward; defined with the JSON code below

struct GroupGenerator {
    const FactGroup& group;
    const GenerationConfig& cfg;
    const std::optional<TimePoint>& horizon;
    Rng rng;
    std::set<std::string> seen_queries;
    std::map<std::string, int> id_counters;  // per (relation, form)
    std::vector<QAItem> items;

    GroupGenerator(const FactGroup& g, const GenerationConfig& c, const std::optional<TimePoint>& h)
        : group(g), cfg(c), horizon(h), rng(derive_seed(c.seed, "qgen:" + g.subject.id)) {}

    TimePoint reference_time_of(const Query& q) const {
        switch (q.form) {
            case QueryForm::point_l2:
            case QueryForm::offset_l2: return q.t_r;
            case QueryForm::interval_l2: return q.t_rs;
            default: return q.ref->interval.start;
        }
    }

    // Builds, filters and records one candidate. Returns true when emitted.
    bool try_emit(const QuestionTemplate& tpl, Query q,
                  const std::map<std::string, std::string>& extra_bindings) {
        std::string key = query_key(q);
        if (seen_queries.count(key)) return false;
        TimePoint rt = reference_time_of(q);
        if (cfg.apply_cutoff) {
            if (month_index(rt) >= month_index(cfg.cutoff)) return false;
            // An interval question mentions its end date too; training text
            // may not name any post-cutoff date.
            if (q.form == QueryForm::interval_l2 &&
                month_index(q.t_re) >= month_index(cfg.cutoff))
                return false;
        }
        AnswerSet answers = answer(group, q, horizon);
        if (answers.empty()) return false;
        seen_queries.insert(key);

        std::map<std::string, std::string> bindings = extra_bindings;
        bindings["subject"] = group.subject.label;

        QAItem item;
        item.question = render_template(tpl, bindings);
        item.query = std::move(q);
        item.answers = std::move(answers);
        item.reference_time = rt;
        item.level = level_of(tpl.form);
        item.multi_hop = is_multi_hop(tpl.form);
        item.n_answers = static_cast<int>(item.answers.size());
        item.subject_id = group.subject.id;
        item.subject_label = group.subject.label;
        item.relation_id = tpl.relation;
        std::string counter_key = tpl.relation + ":" + template_form_name(tpl.form);
        int n = id_counters[counter_key]++;
        item.id = group.subject.id + ":" + counter_key + ":" + std::to_string(n);
        items.push_back(std::move(item));
        return true;
    }

    Query base_query(const QuestionTemplate& tpl) const {
        Query q;
        q.subject_id = group.subject.id;
        q.relation_id = tpl.relation;
        q.form = query_form_of(tpl.form);
        return q;
    }

    void run_template(const QuestionTemplate& tpl) {
        int quota = quota_for(cfg, tpl.form);
        if (quota <= 0) return;
        bool has_relation = false;
        for (const TemporalFact& f : group.facts)
            if (f.relation.id == tpl.relation) has_relation = true;
        if (!has_relation) return;

        switch (tpl.form) {
            case TemplateForm::point_l2: return sample_point(tpl, quota);
            case TemplateForm::interval_l2: return sample_interval(tpl, quota);
            case TemplateForm::offset_l2_before: return sample_offset_l2(tpl, quota, Direction::before);
            case TemplateForm::offset_l2_after: return sample_offset_l2(tpl, quota, Direction::after);
            case TemplateForm::before_l3: return sample_adjacent(tpl, quota);
            case TemplateForm::after_l3: return sample_adjacent(tpl, quota);
            case TemplateForm::during_l3: return sample_during(tpl, quota);
            case TemplateForm::offset_l3_before: return sample_offset_l3(tpl, quota, Direction::before);
            case TemplateForm::offset_l3_after: return sample_offset_l3(tpl, quota, Direction::after);
        }
    }

    void sample_point(const QuestionTemplate& tpl, int quota) {
        std::vector<std::int64_t> months = covered_months(group, tpl.relation, horizon);
        if (months.empty()) return;
        int emitted = 0;
        for (int attempt = 0; emitted < quota && attempt < cfg.sample_attempts; ++attempt) {
            std::int64_t m = months[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(months.size()) - 1))];
            Query q = base_query(tpl);
            q.t_r = time_point_from_index(m);
            if (try_emit(tpl, q, {{"t1", format_time_point(q.t_r)}})) ++emitted;
        }
    }

    void sample_interval(const QuestionTemplate& tpl, int quota) {
        std::vector<std::int64_t> months = covered_months(group, tpl.relation, horizon);
        if (months.empty()) return;
        int emitted = 0;
        for (int attempt = 0; emitted < quota && attempt < cfg.sample_attempts; ++attempt) {
            std::int64_t a = months[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(months.size()) - 1))];
            std::int64_t b = months[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(months.size()) - 1))];
            if (a == b && months.size() > 1) continue;
            Query q = base_query(tpl);
            q.t_rs = time_point_from_index(std::min(a, b));
            q.t_re = time_point_from_index(std::max(a, b));
            if (try_emit(tpl, q,
                         {{"t1", format_time_point(q.t_rs)}, {"t2", format_time_point(q.t_re)}}))
                ++emitted;
        }
    }

    void sample_offset_l2(const QuestionTemplate& tpl, int quota, Direction dir) {
        std::vector<std::int64_t> months = covered_months(group, tpl.relation, horizon);
        if (months.empty()) return;
        int emitted = 0;
        for (int attempt = 0; emitted < quota && attempt < cfg.sample_attempts; ++attempt) {
            std::int64_t target = months[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(months.size()) - 1))];
            std::int64_t magnitude = rng.uniform_int(1, cfg.max_offset_months);
            Query q = base_query(tpl);
            // The anchor is the mentioned timestamp; the target month is
            // anchor + delta, so "before" carries a negative delta.
            if (dir == Direction::after) {
                q.t_r = time_point_from_index(target - magnitude);
                q.delta = SignedDuration{magnitude};
            } else {
                q.t_r = time_point_from_index(target + magnitude);
                q.delta = SignedDuration{-magnitude};
            }
            if (try_emit(tpl, q,
                         {{"t1", format_time_point(q.t_r)},
                          {"dt", format_duration(SignedDuration{magnitude})}}))
                ++emitted;
        }
    }

    void sample_adjacent(const QuestionTemplate& tpl, int quota) {
        std::string ref_rel = tpl.ref_relation.empty() ? tpl.relation : tpl.ref_relation;
        std::vector<std::size_t> refs = unambiguous_refs(group, ref_rel);
        rng.shuffle(refs);
        int emitted = 0;
        for (std::size_t idx : refs) {
            if (emitted >= quota) break;
            Query q = base_query(tpl);
            q.ref = group.facts[idx];
            if (try_emit(tpl, q, {{"object", group.facts[idx].object.label}})) ++emitted;
        }
    }

    void sample_during(const QuestionTemplate& tpl, int quota) {
        std::vector<std::size_t> refs = unambiguous_refs(group, tpl.ref_relation);
        rng.shuffle(refs);
        int emitted = 0;
        for (std::size_t idx : refs) {
            if (emitted >= quota) break;
            Query q = base_query(tpl);
            q.ref = group.facts[idx];
            if (try_emit(tpl, q, {{"object", group.facts[idx].object.label}})) ++emitted;
        }
    }

    void sample_offset_l3(const QuestionTemplate& tpl, int quota, Direction dir) {
        std::string ref_rel = tpl.ref_relation.empty() ? tpl.relation : tpl.ref_relation;
        std::vector<std::size_t> refs = unambiguous_refs(group, ref_rel);
        std::vector<std::int64_t> months = covered_months(group, tpl.relation, horizon);
        if (refs.empty() || months.empty()) return;
        int emitted = 0;
        for (int attempt = 0; emitted < quota && attempt < cfg.sample_attempts; ++attempt) {
            const TemporalFact& ref = group.facts[refs[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(refs.size()) - 1))]];
            std::int64_t target = months[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(months.size()) - 1))];
            // "after" measures from the event's end, "before" from its start.
            std::int64_t magnitude = dir == Direction::after
                                         ? target - month_index(resolve_end(ref.interval, horizon))
                                         : month_index(ref.interval.start) - target;
            if (magnitude < 1 || magnitude > cfg.max_offset_months) continue;
            Query q = base_query(tpl);
            q.ref = ref;
            q.delta = SignedDuration{magnitude};
            q.direction = dir;
            if (try_emit(tpl, q,
                         {{"object", ref.object.label},
                          {"dt", format_duration(SignedDuration{magnitude})}}))
                ++emitted;
        }
    }
};

}  // namespace

std::vector<QAItem> generate_questions(const FactGroup& group,
                                       const std::vector<QuestionTemplate>& templates,
                                       const GenerationConfig& cfg,
                                       const std::optional<TimePoint>& horizon) {
    if (static_cast<int>(group.facts.size()) < cfg.min_group_size) return {};
    GroupGenerator gen(group, cfg, horizon);
    for (const QuestionTemplate& tpl : templates) {
        if (level_of(tpl.form) == Level::L3 && group.facts.size() < 2) continue;
        gen.run_template(tpl);
    }
    return std::move(gen.items);
}

// --- dataset serialization ---------------------------------------------

namespace {

json time_point_to_json(const TimePoint& p) { return to_ym_string(p); }

TimePoint time_point_from_json(const json& j) { return parse_ym_string(j.get<std::string>()); }

json fact_to_json(const TemporalFact& f) {
    json j{{"relation_id", f.relation.id},
           {"relation_label", f.relation.label},
           {"object_id", f.object.id},
           {"object_label", f.object.label},
           {"start", to_ym_string(f.interval.start)}};
    j["end"] = f.interval.end ? json(to_ym_string(*f.interval.end)) : json(nullptr);
    return j;
}

TemporalFact fact_from_json(const json& j, const Entity& subject) {
    TemporalFact f;
    f.subject = subject;
    f.relation = {j.at("relation_id").get<std::string>(), j.at("relation_label").get<std::string>()};
    f.object = {j.at("object_id").get<std::string>(), j.at("object_label").get<std::string>()};
    f.interval.start = parse_ym_string(j.at("start").get<std::string>());
    if (j.contains("end") && !j["end"].is_null())
        f.interval.end = parse_ym_string(j["end"].get<std::string>());
    return f;
}

json query_to_json(const Query& q) {
    json j{{"form", query_form_name(q.form)}};
    switch (q.form) {
        case QueryForm::point_l2:
            j["t_r"] = time_point_to_json(q.t_r);
            break;
        case QueryForm::interval_l2:
            j["t_rs"] = time_point_to_json(q.t_rs);
            j["t_re"] = time_point_to_json(q.t_re);
            break;
        case QueryForm::offset_l2:
            j["t_r"] = time_point_to_json(q.t_r);
            j["delta_months"] = q.delta.months;
            break;
        case QueryForm::before_l3:
        case QueryForm::after_l3:
        case QueryForm::during_l3:
            j["ref"] = fact_to_json(*q.ref);
            break;
        case QueryForm::offset_l3:
            j["ref"] = fact_to_json(*q.ref);
            j["delta_months"] = q.delta.months;
            j["direction"] = q.direction == Direction::before ? "before" : "after";
            break;
    }
    return j;
}

Query query_from_json(const json& j, const std::string& subject_id, const Entity& subject,
                      const std::string& relation_id) {
    Query q;
    q.subject_id = subject_id;
    q.relation_id = relation_id;
    q.form = query_form_from_name(j.at("form").get<std::string>());
    switch (q.form) {
        case QueryForm::point_l2:
            q.t_r = time_point_from_json(j.at("t_r"));
            break;
        case QueryForm::interval_l2:
            q.t_rs = time_point_from_json(j.at("t_rs"));
            q.t_re = time_point_from_json(j.at("t_re"));
            break;
        case QueryForm::offset_l2:
            q.t_r = time_point_from_json(j.at("t_r"));
            q.delta = SignedDuration{j.at("delta_months").get<std::int64_t>()};
            break;
        case QueryForm::before_l3:
        case QueryForm::after_l3:
        case QueryForm::during_l3:
            q.ref = fact_from_json(j.at("ref"), subject);
            break;
        case QueryForm::offset_l3:
            q.ref = fact_from_json(j.at("ref"), subject);
            q.delta = SignedDuration{j.at("delta_months").get<std::int64_t>()};
            q.direction = j.at("direction").get<std::string>() == "before" ? Direction::before
                                                                           : Direction::after;
            break;
    }
    return q;
}

std::string query_key(const Query& q) { return query_to_json(q).dump(); }

}  // namespace

std::string qa_item_to_json_line(const QAItem& item) {
    json j{{"id", item.id},
           {"question", item.question},
           {"answers", item.answers.labels},
           {"level", item.level == Level::L2 ? "L2" : "L3"},
           {"hops", item.multi_hop ? "M-hop" : "1-hop"},
           {"n_answers", item.n_answers},
           {"reference_time", to_ym_string(item.reference_time)},
           {"subject_id", item.subject_id},
           {"subject_label", item.subject_label},
           {"relation_id", item.relation_id},
           {"query", query_to_json(item.query)}};
    if (!item.entity_map_id.empty()) {
        j["shift_months"] = item.shift_months;
        j["entity_map_id"] = item.entity_map_id;
    }
    return j.dump();
}

QAItem qa_item_from_json_line(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const std::exception& e) {
        throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    QAItem item;
    item.id = j.at("id").get<std::string>();
    item.question = j.at("question").get<std::string>();
    item.answers = make_answer_set(j.at("answers").get<std::vector<std::string>>());
    item.level = j.at("level").get<std::string>() == "L3" ? Level::L3 : Level::L2;
    item.multi_hop = j.at("hops").get<std::string>() == "M-hop";
    item.n_answers = j.at("n_answers").get<int>();
    item.reference_time = parse_ym_string(j.at("reference_time").get<std::string>());
    item.subject_id = j.at("subject_id").get<std::string>();
    item.subject_label = j.at("subject_label").get<std::string>();
    item.relation_id = j.at("relation_id").get<std::string>();
    item.query = query_from_json(j.at("query"), item.subject_id,
                                 Entity{item.subject_id, item.subject_label}, item.relation_id);
    if (j.contains("entity_map_id")) {
        item.shift_months = j.at("shift_months").get<int>();
        item.entity_map_id = j.at("entity_map_id").get<std::string>();
    }
    return item;
}

std::size_t write_dataset(const std::vector<QAItem>& items, std::ostream& out) {
    for (const QAItem& item : items) out << qa_item_to_json_line(item) << '\n';
    if (!out) throw std::runtime_error("dataset write failed");
    return items.size();
}

std::vector<QAItem> read_dataset(std::istream& in) {
    std::vector<QAItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        items.push_back(qa_item_from_json_line(line, line_no));
    }
    return items;
}

}  // namespace tqa

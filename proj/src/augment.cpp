#include "tqa/augment.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "tqa/parallel.hpp"
#include "tqa/rng.hpp"

namespace tqa {

using nlohmann::json;

namespace {

struct KindName {
    EntityKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {EntityKind::people, "people"},     {EntityKind::schools, "schools"},
    {EntityKind::companies, "companies"}, {EntityKind::teams, "teams"},
    {EntityKind::countries, "countries"}, {EntityKind::towns, "towns"},
    {EntityKind::awards, "awards"},
};

}  // namespace

std::string entity_kind_name(EntityKind k) {
    for (const auto& e : kKindNames)
        if (e.kind == k) return e.name;
    throw std::logic_error("unreachable entity kind");
}

EntityKind entity_kind_from_name(const std::string& name) {
    for (const auto& e : kKindNames)
        if (name == e.name) return e.kind;
    throw std::invalid_argument("unknown entity kind '" + name + "'");
}

PoolSet load_pools(std::istream& in) {
    json j;
    in >> j;
    if (!j.is_object()) throw std::invalid_argument("pool file must be a JSON object");
    PoolSet pools;
    for (auto it = j.begin(); it != j.end(); ++it)
        pools[entity_kind_from_name(it.key())] = it.value().get<std::vector<std::string>>();
    validate_pools(pools);
    return pools;
}

void validate_pools(const PoolSet& pools) {
    for (const auto& [kind, names] : pools) {
        if (names.empty())
            throw std::invalid_argument("entity pool '" + entity_kind_name(kind) + "' is empty");
        std::set<std::string> seen;
        for (const std::string& n : names)
            if (!seen.insert(n).second)
                throw std::invalid_argument("entity pool '" + entity_kind_name(kind) +
                                            "' has duplicate name '" + n + "'");
    }
}

KindTable default_kind_table() {
    using K = EntityKind;
    return {
        {"P54", {K::people, K::teams}},     {"P39", {K::people, K::companies}},
        {"P108", {K::people, K::companies}}, {"P102", {K::people, K::companies}},
        {"P286", {K::teams, K::people}},    {"P69", {K::people, K::schools}},
        {"P488", {K::companies, K::people}}, {"P6", {K::towns, K::people}},
        {"P35", {K::countries, K::people}}, {"P127", {K::companies, K::people}},
        {"P26", {K::people, K::people}},    {"P166", {K::people, K::awards}},
        {"P937", {K::people, K::towns}},    {"P551", {K::people, K::towns}},
    };
}

FactGroup shift_group(const FactGroup& group, const ShiftSpec& spec) {
    if (spec.delta.months < kMinShiftMonths || spec.delta.months > kMaxShiftMonths)
        throw std::out_of_range("shift of " + std::to_string(spec.delta.months) +
                                " months outside [" + std::to_string(kMinShiftMonths) + ", " +
                                std::to_string(kMaxShiftMonths) + "]");
    FactGroup out = group;
    for (TemporalFact& f : out.facts) f.interval = shift_interval(f.interval, spec.delta);
    return out;
}

namespace {

KindSignature kinds_for_relation(const KindTable& kinds, const std::string& relation) {
    auto it = kinds.find(relation);
    if (it != kinds.end()) return it->second;
    return KindSignature{};  // people subject working at a company-ish thing
}

class NameAllocator {
  public:
    NameAllocator(const PoolSet& pools, std::uint64_t seed) : rng_(seed) {
        for (const auto& [kind, names] : pools) remaining_[kind] = names;
    }

    std::string draw(EntityKind kind) {
        auto it = remaining_.find(kind);
        if (it == remaining_.end() || it->second.empty())
            throw std::runtime_error("entity pool '" + entity_kind_name(kind) + "' exhausted");
        std::vector<std::string>& names = it->second;
        while (!names.empty()) {
            std::size_t i = static_cast<std::size_t>(
                rng_.uniform_int(0, static_cast<std::int64_t>(names.size()) - 1));
            std::string name = names[i];
            names[i] = names.back();
            names.pop_back();
            if (used_.insert(name).second) return name;  // skip cross-pool duplicates
        }
        throw std::runtime_error("entity pool '" + entity_kind_name(kind) + "' exhausted");
    }

  private:
    Rng rng_;
    std::map<EntityKind, std::vector<std::string>> remaining_;
    std::set<std::string> used_;
};

}  // namespace

AnonymizedGroup anonymize_group(const FactGroup& group, const PoolSet& pools,
                                const KindTable& kinds, std::uint64_t seed) {
    NameAllocator alloc(pools, seed);
    AnonymizedGroup out;
    out.group = group;

    auto assign = [&](const Entity& e, EntityKind kind) -> std::string {
        auto it = out.entity_map.find(e.id);
        if (it != out.entity_map.end()) return it->second;
        std::string name = alloc.draw(kind);
        out.entity_map.emplace(e.id, name);
        return name;
    };

    // The group subject's kind follows its representative relation.
    KindSignature subject_sig = kinds_for_relation(
        kinds, group.representative_relation.empty() ? representative_relation(group)
                                                     : group.representative_relation);
    std::string subject_name = assign(group.subject, subject_sig.subject_kind);
    out.group.subject = Entity{subject_name, subject_name};

    for (TemporalFact& f : out.group.facts) {
        KindSignature sig = kinds_for_relation(kinds, f.relation.id);
        f.subject = out.group.subject;
        std::string object_name = assign(f.object, sig.object_kind);
        f.object = Entity{object_name, object_name};
    }
    return out;
}

std::size_t histogram_bucket(const TimePoint& reference_time) {
    if (reference_time.year >= kHistogramCutoffYear)
        throw std::invalid_argument("reference time " + to_ym_string(reference_time) +
                                    " is at or after " + std::to_string(kHistogramCutoffYear) +
                                    "/01; training input may not contain it");
    if (reference_time.year < 1900) return 0;
    return 1 + static_cast<std::size_t>((reference_time.year - 1900) / 20);
}

std::array<double, kHistogramBuckets> compute_resampling_probs(
    const std::array<std::int64_t, kHistogramBuckets>& counts) {
    std::int64_t max_count = 0;
    for (std::int64_t n : counts) {
        if (n < 0) throw std::invalid_argument("negative bucket count");
        max_count = std::max(max_count, n);
    }
    if (max_count == 0) throw std::invalid_argument("all histogram buckets are empty");
    std::array<double, kHistogramBuckets> probs{};
    for (std::size_t i = 0; i < kHistogramBuckets; ++i)
        probs[i] = static_cast<double>(max_count - counts[i]) / static_cast<double>(max_count);
    return probs;
}

ResamplingHistogram build_histogram(const std::vector<QAItem>& training_items) {
    ResamplingHistogram hist;
    for (const QAItem& item : training_items) ++hist.counts[histogram_bucket(item.reference_time)];
    hist.probs = compute_resampling_probs(hist.counts);
    return hist;
}

double keep_probability(const ResamplingHistogram& hist, const TimePoint& reference_time,
                        double probability_floor) {
    if (reference_time.year >= kHistogramCutoffYear) return 1.0;
    return std::max(hist.probs[histogram_bucket(reference_time)], probability_floor);
}

std::vector<QAItem> sample_pseudo_dataset(const std::vector<FactGroup>& groups,
                                          const ResamplingHistogram& hist,
                                          const std::vector<QuestionTemplate>& templates,
                                          const GenerationConfig& gen_cfg,
                                          const PoolSet& pools, const KindTable& kinds,
                                          const PseudoConfig& pseudo_cfg, std::uint64_t seed,
                                          const std::optional<TimePoint>& horizon,
                                          std::vector<EntityMapRecord>* maps_out) {
    std::vector<QAItem> out;
    if (pseudo_cfg.target_size == 0 || groups.empty()) return out;

    struct GroupYield {
        std::vector<QAItem> kept;
        EntityMapRecord map;
    };

    for (int round = 0; round < pseudo_cfg.max_rounds && out.size() < pseudo_cfg.target_size;
         ++round) {
        std::size_t before_round = out.size();
        // Per-group streams are derived from (seed, round, subject), so the
        // fan-out below cannot affect what each group produces.
        std::vector<GroupYield> yields(groups.size());
        parallel_for(groups.size(), pseudo_cfg.workers, [&](std::size_t gi) {
            const FactGroup& source = groups[gi];
            std::string stream = "pit:" + std::to_string(round) + ":" + source.subject.id;

            Rng shift_rng(derive_seed(seed, stream + ":shift"));
            ShiftSpec spec{SignedDuration{shift_rng.uniform_int(kMinShiftMonths, kMaxShiftMonths)}};
            FactGroup shifted = shift_group(source, spec);
            AnonymizedGroup anon =
                anonymize_group(shifted, pools, kinds, derive_seed(seed, stream + ":anon"));

            // The pseudo-world snapshot moves with the facts, so ongoing
            // episodes stay well-formed under forward shifts.
            std::optional<TimePoint> shifted_horizon;
            if (horizon) shifted_horizon = add_duration(*horizon, spec.delta);

            GenerationConfig cfg = gen_cfg;
            cfg.seed = derive_seed(seed, stream + ":qgen");
            cfg.apply_cutoff = false;  // post-2019 pseudo questions are the point
            std::vector<QAItem> candidates =
                generate_questions(anon.group, templates, cfg, shifted_horizon);

            std::string map_id = "pit-r" + std::to_string(round) + "-" + source.subject.id;
            Rng keep_rng(derive_seed(seed, stream + ":resample"));
            GroupYield& yield = yields[gi];
            for (QAItem& item : candidates) {
                double p = keep_probability(hist, item.reference_time, pseudo_cfg.probability_floor);
                if (!keep_rng.bernoulli(p)) continue;
                item.shift_months = static_cast<int>(spec.delta.months);
                item.entity_map_id = map_id;
                item.id = map_id + "/" + item.id;
                yield.kept.push_back(std::move(item));
            }
            yield.map = EntityMapRecord{map_id, std::move(anon.entity_map)};
        });

        for (GroupYield& yield : yields) {
            if (out.size() >= pseudo_cfg.target_size) break;
            bool used = false;
            for (QAItem& item : yield.kept) {
                out.push_back(std::move(item));
                used = true;
                if (out.size() >= pseudo_cfg.target_size) break;
            }
            if (used && maps_out) maps_out->push_back(std::move(yield.map));
        }
        if (out.size() == before_round) break;  // nothing survives resampling; stop
    }
    return out;
}

const char* const kDefaultInstruction =
    "Answer the question using the context. If the question has multiple answers, "
    "join them with \" and \".";

namespace {

struct StatementPhrase {
    const char* relation;
    const char* pattern;  // uses {s} and {o}
};

constexpr StatementPhrase kStatementPhrases[] = {
    {"P54", "{s} played for {o}"},
    {"P39", "{s} held the position of {o}"},
    {"P108", "{s} worked for {o}"},
    {"P102", "{s} was a member of {o}"},
    {"P286", "{o} was the head coach of {s}"},
    {"P69", "{s} studied at {o}"},
    {"P488", "{o} was the chair of {s}"},
    {"P6", "{o} was the head of {s}"},
    {"P35", "{o} was the head of state of {s}"},
    {"P127", "{s} was owned by {o}"},
    {"P26", "{s} was married to {o}"},
    {"P166", "{s} received {o}"},
    {"P937", "{s} worked in {o}"},
    {"P551", "{s} lived in {o}"},
};

std::string fill(const std::string& pattern, const std::string& s, const std::string& o) {
    std::string out = pattern;
    auto replace_all = [&out](const std::string& from, const std::string& to) {
        std::size_t pos = 0;
        while ((pos = out.find(from, pos)) != std::string::npos) {
            out.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all("{s}", s);
    replace_all("{o}", o);
    return out;
}

}  // namespace

std::string render_fact_statement(const TemporalFact& fact,
                                  const std::optional<TimePoint>& horizon) {
    std::string pattern = "{s}'s " + fact.relation.label + " was {o}";
    for (const StatementPhrase& sp : kStatementPhrases)
        if (fact.relation.id == sp.relation) pattern = sp.pattern;
    std::string body = fill(pattern, fact.subject.label, fact.object.label);
    std::string end = fact.interval.end
                          ? format_time_point(*fact.interval.end)
                          : (horizon ? format_time_point(*horizon) : std::string("present"));
    return body + " from " + format_time_point(fact.interval.start) + " to " + end + ".";
}

std::string render_group_context(const FactGroup& group,
                                 const std::optional<TimePoint>& horizon) {
    std::string out;
    for (const TemporalFact& f : group.facts) {
        if (!out.empty()) out += ' ';
        out += render_fact_statement(f, horizon);
    }
    return out;
}

InstructionExample to_instruction_example(const QAItem& item, const std::string& context) {
    InstructionExample ex;
    ex.instruction = kDefaultInstruction;
    ex.context = context;
    ex.question = item.question;
    for (const std::string& a : item.answers.labels) {
        if (!ex.target.empty()) ex.target += " and ";
        ex.target += a;
    }
    return ex;
}

}  // namespace tqa

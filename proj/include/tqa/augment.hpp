#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tqa/qgen.hpp"

namespace tqa {

enum class EntityKind { people, schools, companies, teams, countries, towns, awards };

std::string entity_kind_name(EntityKind k);
EntityKind entity_kind_from_name(const std::string& name);

// Fictional-name inventories, one list per kind. Names must be unique within
// a pool; the pool files are plain inputs, not generated.
using PoolSet = std::map<EntityKind, std::vector<std::string>>;

PoolSet load_pools(std::istream& in);
void validate_pools(const PoolSet& pools);

// Which pool to draw from for a relation's subject and object.
struct KindSignature {
    EntityKind subject_kind = EntityKind::people;
    EntityKind object_kind = EntityKind::companies;
};
using KindTable = std::map<std::string, KindSignature>;
KindTable default_kind_table();

// Whole-group time shift, at most 20 years forward and 100 years backward.
struct ShiftSpec {
    SignedDuration delta;
};
inline constexpr std::int64_t kMinShiftMonths = -1200;
inline constexpr std::int64_t kMaxShiftMonths = 240;

// Shifts every fact's interval; entities are untouched (anonymization is a
// separate step). Throws std::out_of_range on specs outside the shift range.
FactGroup shift_group(const FactGroup& group, const ShiftSpec& spec);

struct AnonymizedGroup {
    FactGroup group;
    std::map<std::string, std::string> entity_map;  // real entity id -> fictional name
};

// Replaces subject and objects with fictional names: the same real entity maps
// to the same name everywhere in the group, distinct entities to distinct
// names, kinds per the table. Throws std::runtime_error on pool exhaustion.
AnonymizedGroup anonymize_group(const FactGroup& group, const PoolSet& pools,
                                const KindTable& kinds, std::uint64_t seed);

// 20-year reference-time buckets from 1900 to 2020; everything before 1900 is
// one bucket, so k = 7. Post-cutoff times never enter the histogram: their
// sampling probability is pinned to 1.
inline constexpr std::size_t kHistogramBuckets = 7;
inline constexpr int kHistogramCutoffYear = 2020;

struct ResamplingHistogram {
    std::array<std::int64_t, kHistogramBuckets> counts{};
    std::array<double, kHistogramBuckets> probs{};
};

// Bucket of a pre-2020 reference time; throws std::invalid_argument at or
// after 2020/01 (such items may not exist in training input).
std::size_t histogram_bucket(const TimePoint& reference_time);

// P_i = 1 - n_i / max(n), computed as (max - n_i) / max so the exact decimal
// cases compare equal. Throws std::invalid_argument on all-zero counts.
std::array<double, kHistogramBuckets> compute_resampling_probs(
    const std::array<std::int64_t, kHistogramBuckets>& counts);

ResamplingHistogram build_histogram(const std::vector<QAItem>& training_items);

// Keep-probability for one candidate: 1.0 at or after 2020/01, otherwise the
// bucket probability, floored at `probability_floor`.
double keep_probability(const ResamplingHistogram& hist, const TimePoint& reference_time,
                        double probability_floor);

struct EntityMapRecord {
    std::string entity_map_id;
    std::map<std::string, std::string> map;
};

struct PseudoConfig {
    std::size_t target_size = 0;
    double probability_floor = 0.0;  // 0 keeps the raw formula
    int max_rounds = 256;
    int workers = 1;
};

// One pass per round over the source groups: draw a shift, shift, anonymize,
// generate questions against the shifted horizon, then keep each candidate
// independently with its bucket probability. Repeats rounds until target_size
// is reached (or a round yields nothing new). Byte-reproducible under seed.
std::vector<QAItem> sample_pseudo_dataset(const std::vector<FactGroup>& groups,
                                          const ResamplingHistogram& hist,
                                          const std::vector<QuestionTemplate>& templates,
                                          const GenerationConfig& gen_cfg,
                                          const PoolSet& pools, const KindTable& kinds,
                                          const PseudoConfig& pseudo_cfg, std::uint64_t seed,
                                          const std::optional<TimePoint>& horizon,
                                          std::vector<EntityMapRecord>* maps_out = nullptr);

struct InstructionExample {
    std::string instruction;
    std::string context;
    std::string question;
    std::string target;
};

extern const char* const kDefaultInstruction;

// "Layla Moran studied at Brunel University from September 2005 to March 2007."
std::string render_fact_statement(const TemporalFact& fact,
                                  const std::optional<TimePoint>& horizon);
std::string render_group_context(const FactGroup& group,
                                 const std::optional<TimePoint>& horizon);

// Multi-answer targets join the gold answers with the " and " connector.
InstructionExample to_instruction_example(const QAItem& item, const std::string& context);

}  // namespace tqa

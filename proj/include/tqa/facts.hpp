#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tqa/chrono.hpp"

namespace tqa {

struct Entity {
    std::string id;
    std::string label;

    bool operator==(const Entity&) const = default;
};

// One dated assertion: subject held relation to object over interval.
struct TemporalFact {
    Entity subject;
    Entity relation;
    Entity object;
    TimeInterval interval;

    bool operator==(const TemporalFact&) const = default;
};

// All facts sharing a subject; the universe a question is answered against.
// May mix relation types.
struct FactGroup {
    Entity subject;
    std::vector<TemporalFact> facts;
    std::string representative_relation;  // modal relation id, ties by smallest id
};

struct KnowledgeBase {
    std::vector<FactGroup> groups;  // sorted by subject id, one group per subject
    TimePoint snapshot_date;        // horizon for ongoing facts
};

struct IngestStats {
    std::size_t records = 0;             // non-blank input lines
    std::size_t facts = 0;               // facts ingested
    std::size_t skipped_no_temporal = 0; // records with neither start nor end
    std::size_t skipped_no_start = 0;    // records with an end but no start
};

// Reads the tab-separated statements format, one record per line:
//   subject_id  subject_label  relation_id  relation_label  object_id  object_label  start  end
// Dates are "YYYY-MM" or "YYYY"; a year-only start means January and a
// year-only end means December of that year. Empty start+end -> skipped and
// counted; end before start or a wrong field count -> error naming the line.
KnowledgeBase ingest_statements(std::istream& in, const TimePoint& snapshot_date,
                                IngestStats* stats = nullptr);

// Relation with the most facts in the group; ties break to the
// lexicographically smallest relation id.
std::string representative_relation(const FactGroup& group);

// Keeps at most `cap` groups per representative relation (seeded uniform
// sample, input order preserved). Groups under the cap pass through unchanged.
std::vector<FactGroup> apply_relation_ceiling(const std::vector<FactGroup>& groups, int cap,
                                              std::uint64_t seed);

struct GroupSplits {
    std::vector<FactGroup> train;
    std::vector<FactGroup> dev;
    std::vector<FactGroup> test;
};

// Disjoint seeded partition with exactly the requested sizes.
// Throws std::invalid_argument when sizes exceed the available groups.
GroupSplits split_groups(const std::vector<FactGroup>& groups, std::size_t n_train,
                         std::size_t n_dev, std::size_t n_test, std::uint64_t seed);

}  // namespace tqa

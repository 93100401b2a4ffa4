#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tqa/facts.hpp"

namespace tqa {

// The seven query families. Time-event questions constrain time directly
// (point_l2, interval_l2, offset_l2); event-event questions constrain it
// through a reference fact in the same group.
enum class QueryForm {
    point_l2,     // (s, r, ?, t_r)
    interval_l2,  // (s, r, ?, t_rs, t_re)
    offset_l2,    // (s, r, ?, t_r, delta); negative delta = "before t_r"
    before_l3,    // immediate predecessor episode(s) of the reference fact
    after_l3,     // immediate successor episode(s)
    during_l3,    // overlap with the reference fact's interval
    offset_l3     // single month at a signed distance from the reference fact
};

enum class Direction { before, after };

// "delta after event" anchors at the event's end, "delta before event" at its
// start; this is the reading consistent with the worked offset cases.
struct Query {
    std::string subject_id;
    std::string relation_id;  // relation whose objects answer the question
    QueryForm form = QueryForm::point_l2;

    TimePoint t_r;                    // point_l2 / offset_l2
    TimePoint t_rs, t_re;             // interval_l2
    SignedDuration delta{0};          // offset_l2: signed; offset_l3: magnitude > 0
    Direction direction = Direction::after;  // offset_l3 only
    std::optional<TemporalFact> ref;  // L3 forms: must be a fact of the group
};

// Deduplicated object labels, kept sorted for canonical comparisons.
struct AnswerSet {
    std::vector<std::string> labels;

    bool operator==(const AnswerSet&) const = default;
    bool empty() const { return labels.empty(); }
    std::size_t size() const { return labels.size(); }
};

AnswerSet make_answer_set(std::vector<std::string> labels);

// Effective constraint window for overlap-style forms. Year-granular points
// widen to the whole year. For before_l3/after_l3 the returned single-month
// window is only the anchor boundary; `answer` applies predecessor/successor
// semantics itself. Throws when the L3 ref fact is not in the group, or when
// an ongoing end must resolve and no horizon is given.
TimeInterval resolve_query_time(const Query& q, const FactGroup& group,
                                const std::optional<TimePoint>& horizon);

// Exact answer set per the query semantics above. Overlap forms collect the
// objects of every fact of q.relation_id whose interval intersects the
// resolved window; before_l3/after_l3 return the nearest episode(s) on the
// respective side, all ties included, never including the ref fact's object.
AnswerSet answer(const FactGroup& group, const Query& q,
                 const std::optional<TimePoint>& horizon);

// Independent oracle: enumerates every month of the group's hull and tests
// membership month by month (outward scan for before/after). Same contract
// as `answer`; exists so the two routes can be checked against each other.
AnswerSet brute_force_answer(const FactGroup& group, const Query& q,
                             const std::optional<TimePoint>& horizon);

// Shifts the query's absolute time points (and the ref fact's interval) by d;
// durations are untouched. Used to state time-translation equivariance.
Query shift_query(Query q, const SignedDuration& d);

}  // namespace tqa

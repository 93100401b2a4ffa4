#include "tqa/solver.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace tqa {

namespace {

// Window of a single time point: a month-granular point is that month,
// a year-granular point is the whole year.
TimeInterval point_window(const TimePoint& p) {
    if (p.granularity == Granularity::year) {
        TimePoint lo{p.year, 1, Granularity::month};
        TimePoint hi{p.year, 12, Granularity::month};
        return TimeInterval{lo, hi};
    }
    return TimeInterval{p, p};
}

// Interval endpoints given as year-granular points widen outward: the start
// to January, the end to December.
TimeInterval endpoints_window(const TimePoint& s, const TimePoint& e) {
    TimePoint lo = s.granularity == Granularity::year ? TimePoint{s.year, 1, Granularity::month} : s;
    TimePoint hi = e.granularity == Granularity::year ? TimePoint{e.year, 12, Granularity::month} : e;
    if (month_index(lo) > month_index(hi))
        throw std::invalid_argument("query interval end precedes start");
    return TimeInterval{lo, hi};
}

const TemporalFact& find_ref(const Query& q, const FactGroup& group) {
    if (!q.ref) throw std::invalid_argument("L3 query without reference fact");
    for (const TemporalFact& f : group.facts) {
        if (f.relation.id == q.ref->relation.id && f.object.id == q.ref->object.id &&
            f.interval == q.ref->interval)
            return f;
    }
    throw std::invalid_argument("reference fact not present in group of subject " + group.subject.id);
}

void check_subject(const Query& q, const FactGroup& group) {
    if (q.subject_id != group.subject.id)
        throw std::invalid_argument("query subject " + q.subject_id + " does not match group subject " +
                                    group.subject.id);
}

bool is_overlap_form(QueryForm f) {
    return f == QueryForm::point_l2 || f == QueryForm::interval_l2 || f == QueryForm::offset_l2 ||
           f == QueryForm::during_l3 || f == QueryForm::offset_l3;
}

}  // namespace

AnswerSet make_answer_set(std::vector<std::string> labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return AnswerSet{std::move(labels)};
}

TimeInterval resolve_query_time(const Query& q, const FactGroup& group,
                                const std::optional<TimePoint>& horizon) {
    switch (q.form) {
        case QueryForm::point_l2:
            return point_window(q.t_r);
        case QueryForm::interval_l2:
            return endpoints_window(q.t_rs, q.t_re);
        case QueryForm::offset_l2:
            return shift_interval(point_window(q.t_r), q.delta);
        case QueryForm::during_l3: {
            const TemporalFact& ref = find_ref(q, group);
            return TimeInterval{ref.interval.start, resolve_end(ref.interval, horizon)};
        }
        case QueryForm::offset_l3: {
            const TemporalFact& ref = find_ref(q, group);
            if (q.delta.months <= 0) throw std::invalid_argument("offset_l3 requires a positive delta");
            TimePoint anchor = q.direction == Direction::after
                                   ? add_duration(resolve_end(ref.interval, horizon), q.delta)
                                   : add_duration(ref.interval.start, SignedDuration{-q.delta.months});
            return TimeInterval{anchor, anchor};
        }
        case QueryForm::before_l3: {
            const TemporalFact& ref = find_ref(q, group);
            return TimeInterval{ref.interval.start, ref.interval.start};
        }
        case QueryForm::after_l3: {
            const TemporalFact& ref = find_ref(q, group);
            TimePoint end = resolve_end(ref.interval, horizon);
            return TimeInterval{end, end};
        }
    }
    throw std::logic_error("unreachable query form");
}

AnswerSet answer(const FactGroup& group, const Query& q, const std::optional<TimePoint>& horizon) {
    check_subject(q, group);
    std::vector<std::string> labels;

    if (is_overlap_form(q.form)) {
        TimeInterval window = resolve_query_time(q, group, horizon);
        for (const TemporalFact& f : group.facts) {
            if (f.relation.id != q.relation_id) continue;
            if (interval_overlaps(f.interval, window, horizon)) labels.push_back(f.object.label);
        }
        return make_answer_set(std::move(labels));
    }

    const TemporalFact& ref = find_ref(q, group);
    if (q.form == QueryForm::before_l3) {
        // Nearest episode(s) ending at or before the ref start. Ongoing facts
        // have no finite end and are ineligible.
        std::int64_t ref_start = month_index(ref.interval.start);
        std::int64_t best = std::numeric_limits<std::int64_t>::min();
        for (const TemporalFact& f : group.facts) {
            if (f.relation.id != q.relation_id || f.object.id == ref.object.id) continue;
            if (!f.interval.end) continue;
            std::int64_t end = month_index(*f.interval.end);
            if (end <= ref_start) best = std::max(best, end);
        }
        if (best != std::numeric_limits<std::int64_t>::min()) {
            for (const TemporalFact& f : group.facts) {
                if (f.relation.id != q.relation_id || f.object.id == ref.object.id) continue;
                if (f.interval.end && month_index(*f.interval.end) == best)
                    labels.push_back(f.object.label);
            }
        }
        return make_answer_set(std::move(labels));
    }

    // after_l3: nearest episode(s) starting at or after the ref end.
    std::int64_t ref_end = month_index(resolve_end(ref.interval, horizon));
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const TemporalFact& f : group.facts) {
        if (f.relation.id != q.relation_id || f.object.id == ref.object.id) continue;
        std::int64_t start = month_index(f.interval.start);
        if (start >= ref_end) best = std::min(best, start);
    }
    if (best != std::numeric_limits<std::int64_t>::max()) {
        for (const TemporalFact& f : group.facts) {
            if (f.relation.id != q.relation_id || f.object.id == ref.object.id) continue;
            if (month_index(f.interval.start) == best) labels.push_back(f.object.label);
        }
    }
    return make_answer_set(std::move(labels));
}

AnswerSet brute_force_answer(const FactGroup& group, const Query& q,
                             const std::optional<TimePoint>& horizon) {
    check_subject(q, group);
    if (group.facts.empty()) return AnswerSet{};

    // Hull of the group under resolved ends; errors out on unresolvable
    // ongoing intervals, matching the stated precondition.
    std::int64_t hull_lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hull_hi = std::numeric_limits<std::int64_t>::min();
    for (const TemporalFact& f : group.facts) {
        hull_lo = std::min(hull_lo, month_index(f.interval.start));
        hull_hi = std::max(hull_hi, month_index(resolve_end(f.interval, horizon)));
    }

    auto holds_at = [&](const TemporalFact& f, std::int64_t m) {
        return f.relation.id == q.relation_id && month_index(f.interval.start) <= m &&
               m <= month_index(resolve_end(f.interval, horizon));
    };

    std::vector<std::string> labels;

    if (is_overlap_form(q.form)) {
        // Window recomputed here with plain month arithmetic, independently of
        // resolve_query_time.
        std::int64_t win_lo = 0, win_hi = 0;
        auto point_span = [](const TimePoint& p, std::int64_t& lo, std::int64_t& hi) {
            if (p.granularity == Granularity::year) {
                lo = static_cast<std::int64_t>(p.year) * 12;
                hi = lo + 11;
            } else {
                lo = hi = month_index(p);
            }
        };
        switch (q.form) {
            case QueryForm::point_l2:
                point_span(q.t_r, win_lo, win_hi);
                break;
            case QueryForm::interval_l2: {
                std::int64_t a_lo, a_hi, b_lo, b_hi;
                point_span(q.t_rs, a_lo, a_hi);
                point_span(q.t_re, b_lo, b_hi);
                win_lo = a_lo;
                win_hi = b_hi;
                break;
            }
            case QueryForm::offset_l2:
                point_span(q.t_r, win_lo, win_hi);
                win_lo += q.delta.months;
                win_hi += q.delta.months;
                break;
            case QueryForm::during_l3: {
                const TemporalFact& ref = find_ref(q, group);
                win_lo = month_index(ref.interval.start);
                win_hi = month_index(resolve_end(ref.interval, horizon));
                break;
            }
            case QueryForm::offset_l3: {
                const TemporalFact& ref = find_ref(q, group);
                if (q.delta.months <= 0) throw std::invalid_argument("offset_l3 requires a positive delta");
                win_lo = q.direction == Direction::after
                             ? month_index(resolve_end(ref.interval, horizon)) + q.delta.months
                             : month_index(ref.interval.start) - q.delta.months;
                win_hi = win_lo;
                break;
            }
            default:
                break;
        }
        for (std::int64_t m = hull_lo; m <= hull_hi; ++m) {
            if (m < win_lo || m > win_hi) continue;
            for (const TemporalFact& f : group.facts)
                if (holds_at(f, m)) labels.push_back(f.object.label);
        }
        return make_answer_set(std::move(labels));
    }

    const TemporalFact& ref = find_ref(q, group);
    if (q.form == QueryForm::before_l3) {
        for (std::int64_t m = month_index(ref.interval.start); m >= hull_lo; --m) {
            for (const TemporalFact& f : group.facts) {
                if (f.relation.id != q.relation_id || f.object.id == ref.object.id) continue;
                if (f.interval.end && month_index(*f.interval.end) == m)
                    labels.push_back(f.object.label);
            }
            if (!labels.empty()) break;
        }
        return make_answer_set(std::move(labels));
    }

    for (std::int64_t m = month_index(resolve_end(ref.interval, horizon)); m <= hull_hi; ++m) {
        for (const TemporalFact& f : group.facts) {
            if (f.relation.id != q.relation_id || f.object.id == ref.object.id) continue;
            if (month_index(f.interval.start) == m) labels.push_back(f.object.label);
        }
        if (!labels.empty()) break;
    }
    return make_answer_set(std::move(labels));
}

Query shift_query(Query q, const SignedDuration& d) {
    switch (q.form) {
        case QueryForm::point_l2:
        case QueryForm::offset_l2:
            q.t_r = add_duration(q.t_r, d);
            break;
        case QueryForm::interval_l2:
            q.t_rs = add_duration(q.t_rs, d);
            q.t_re = add_duration(q.t_re, d);
            break;
        default:
            break;  // L3 forms carry no absolute points of their own
    }
    if (q.ref) q.ref->interval = shift_interval(q.ref->interval, d);
    return q;
}

}  // namespace tqa

#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace tqa {

// Month is the canonical resolution everywhere: finer inputs truncate to the
// month, and all comparisons go through month_index.

enum class Granularity { month, year };

// A calendar month in astronomical year numbering. Year-granular points keep
// month = 1 and widen to the whole year when used as a query constraint.
struct TimePoint {
    int year = 0;
    int month = 1;  // 1..12
    Granularity granularity = Granularity::month;

    bool operator==(const TimePoint&) const = default;
};

// Supported year span. Wide enough for any KB content plus the +/-100-year
// pseudo-data shifts; arithmetic past it reports overflow instead of wrapping.
inline constexpr int kMinYear = -99999;
inline constexpr int kMaxYear = 99999;

// Total signed month count, e.g. "6 years and 2 months" == 74.
struct SignedDuration {
    std::int64_t months = 0;

    bool operator==(const SignedDuration&) const = default;
};

// Closed on both ends at month resolution: a fact ending January 1934 still
// holds in January 1934. Absent end = ongoing, resolved against a horizon.
struct TimeInterval {
    TimePoint start;
    std::optional<TimePoint> end;

    bool operator==(const TimeInterval&) const = default;
};

// Canonical ordering: year*12 + (month-1). Strictly monotone in calendar order.
std::int64_t month_index(const TimePoint& p);

// Inverse of month_index.
TimePoint time_point_from_index(std::int64_t index, Granularity g = Granularity::month);

bool time_point_less(const TimePoint& a, const TimePoint& b);

// Throws std::invalid_argument on bad month / inverted interval.
void validate_time_point(const TimePoint& p);
void validate_interval(const TimeInterval& iv);

// month_index(result) == month_index(p) + d.months; granularity preserved.
// Throws std::out_of_range past the supported year span.
TimePoint add_duration(const TimePoint& p, const SignedDuration& d);

// End of `iv`, with ongoing ends resolved to `horizon`. Throws
// std::runtime_error when ongoing and no horizon is configured.
TimePoint resolve_end(const TimeInterval& iv, const std::optional<TimePoint>& horizon);

// Closed-interval intersection test: max(starts) <= min(ends).
bool interval_overlaps(const TimeInterval& a, const TimeInterval& b,
                       const std::optional<TimePoint>& horizon = std::nullopt);

// Shifts both endpoints; an ongoing end stays ongoing.
TimeInterval shift_interval(const TimeInterval& iv, const SignedDuration& d);

// Surface forms used in question text: "June 2005", "Apr 1981", "2011".
// Month names are matched case-insensitively, full or 3-letter forms.
// Throws std::invalid_argument naming the offending token.
TimePoint parse_time_expression(const std::string& text);

// "June 2005" for month granularity, "2011" for year granularity.
std::string format_time_point(const TimePoint& p);

// File form: "2005-06" (month) or "2011" (year). parse_ym_string accepts both.
std::string to_ym_string(const TimePoint& p);
TimePoint parse_ym_string(const std::string& s);

// "15 years", "5 months", "6 years and 2 months". Magnitude only; direction
// words ("before"/"after") are carried by the surrounding template.
// format_duration requires d.months > 0.
std::string format_duration(const SignedDuration& d);
SignedDuration parse_duration(const std::string& text);

}  // namespace tqa

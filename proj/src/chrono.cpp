#include "tqa/chrono.hpp"

#include <array>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace tqa {

namespace {

const std::array<std::string, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Full name or 3-letter abbreviation, case-insensitive. 0 if not a month.
int month_from_name(const std::string& token) {
    std::string t = lower_ascii(token);
    for (int m = 1; m <= 12; ++m) {
        std::string full = lower_ascii(kMonthNames[static_cast<std::size_t>(m - 1)]);
        if (t == full || t == full.substr(0, 3)) return m;
    }
    return 0;
}

bool parse_int(const std::string& token, int& out) {
    if (token.empty()) return false;
    std::size_t i = token[0] == '-' ? 1 : 0;
    if (i == token.size()) return false;
    for (; i < token.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(token[i]))) return false;
    try {
        out = std::stoi(token);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

std::int64_t month_index(const TimePoint& p) {
    return static_cast<std::int64_t>(p.year) * 12 + (p.month - 1);
}

TimePoint time_point_from_index(std::int64_t index, Granularity g) {
    std::int64_t y = floor_div(index, 12);
    if (y < kMinYear || y > kMaxYear) throw std::out_of_range("time point year out of range");
    TimePoint p;
    p.year = static_cast<int>(y);
    p.month = static_cast<int>(index - y * 12) + 1;
    p.granularity = g;
    return p;
}

bool time_point_less(const TimePoint& a, const TimePoint& b) {
    return month_index(a) < month_index(b);
}

void validate_time_point(const TimePoint& p) {
    if (p.month < 1 || p.month > 12) throw std::invalid_argument("month out of range 1..12");
    if (p.year < kMinYear || p.year > kMaxYear) throw std::invalid_argument("year out of range");
}

void validate_interval(const TimeInterval& iv) {
    validate_time_point(iv.start);
    if (iv.end) {
        validate_time_point(*iv.end);
        if (month_index(iv.start) > month_index(*iv.end))
            throw std::invalid_argument("interval end precedes start");
    }
}

TimePoint add_duration(const TimePoint& p, const SignedDuration& d) {
    return time_point_from_index(month_index(p) + d.months, p.granularity);
}

TimePoint resolve_end(const TimeInterval& iv, const std::optional<TimePoint>& horizon) {
    if (iv.end) return *iv.end;
    if (!horizon) throw std::runtime_error("ongoing interval with no horizon configured");
    return *horizon;
}

bool interval_overlaps(const TimeInterval& a, const TimeInterval& b,
                       const std::optional<TimePoint>& horizon) {
    std::int64_t lo = std::max(month_index(a.start), month_index(b.start));
    std::int64_t hi = std::min(month_index(resolve_end(a, horizon)), month_index(resolve_end(b, horizon)));
    return lo <= hi;
}

TimeInterval shift_interval(const TimeInterval& iv, const SignedDuration& d) {
    TimeInterval out;
    out.start = add_duration(iv.start, d);
    if (iv.end) out.end = add_duration(*iv.end, d);
    return out;
}

TimePoint parse_time_expression(const std::string& text) {
    std::istringstream in(text);
    std::string first, second, extra;
    in >> first >> second;
    if (first.empty()) throw std::invalid_argument("empty time expression");
    if (in >> extra) throw std::invalid_argument("unexpected token '" + extra + "' in time expression");

    if (second.empty()) {
        int year = 0;
        if (!parse_int(first, year))
            throw std::invalid_argument("cannot parse year '" + first + "'");
        TimePoint p{year, 1, Granularity::year};
        validate_time_point(p);
        return p;
    }
    int m = month_from_name(first);
    if (m == 0) throw std::invalid_argument("unknown month name '" + first + "'");
    int year = 0;
    if (!parse_int(second, year))
        throw std::invalid_argument("cannot parse year '" + second + "'");
    TimePoint p{year, m, Granularity::month};
    validate_time_point(p);
    return p;
}

std::string format_time_point(const TimePoint& p) {
    if (p.granularity == Granularity::year) return std::to_string(p.year);
    return kMonthNames[static_cast<std::size_t>(p.month - 1)] + " " + std::to_string(p.year);
}

std::string to_ym_string(const TimePoint& p) {
    if (p.granularity == Granularity::year) return std::to_string(p.year);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", p.month);
    return std::to_string(p.year) + "-" + buf;
}

TimePoint parse_ym_string(const std::string& s) {
    std::size_t dash = s.find('-', 1);  // skip a possible leading sign
    if (dash == std::string::npos) {
        int year = 0;
        if (!parse_int(s, year)) throw std::invalid_argument("cannot parse date '" + s + "'");
        TimePoint p{year, 1, Granularity::year};
        validate_time_point(p);
        return p;
    }
    int year = 0, month = 0;
    if (!parse_int(s.substr(0, dash), year) || !parse_int(s.substr(dash + 1), month))
        throw std::invalid_argument("cannot parse date '" + s + "'");
    TimePoint p{year, month, Granularity::month};
    validate_time_point(p);
    return p;
}

std::string format_duration(const SignedDuration& d) {
    if (d.months <= 0) throw std::invalid_argument("duration magnitude must be positive");
    std::int64_t years = d.months / 12;
    std::int64_t months = d.months % 12;
    auto unit = [](std::int64_t n, const char* word) {
        return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
    };
    if (months == 0) return unit(years, "year");
    if (years == 0) return unit(months, "month");
    return unit(years, "year") + " and " + unit(months, "month");
}

SignedDuration parse_duration(const std::string& text) {
    std::istringstream in(text);
    std::string token;
    std::int64_t total = 0;
    bool any = false;
    std::int64_t pending = 0;
    bool have_number = false;
    while (in >> token) {
        if (token == "and") continue;
        int value = 0;
        if (parse_int(token, value)) {
            if (have_number) throw std::invalid_argument("dangling number in duration '" + text + "'");
            pending = value;
            have_number = true;
            continue;
        }
        std::string unit = lower_ascii(token);
        if (!have_number) throw std::invalid_argument("unit without number in duration '" + text + "'");
        if (unit == "year" || unit == "years") total += pending * 12;
        else if (unit == "month" || unit == "months") total += pending;
        else throw std::invalid_argument("unknown duration unit '" + token + "'");
        have_number = false;
        any = true;
    }
    if (!any || have_number) throw std::invalid_argument("cannot parse duration '" + text + "'");
    return SignedDuration{total};
}

}  // namespace tqa

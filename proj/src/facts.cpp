#include "tqa/facts.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "tqa/rng.hpp"

namespace tqa {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return fields;
}

// Fact dates: a year-only start means January, a year-only end means December.
TimePoint parse_fact_date(const std::string& s, bool is_end, std::size_t line_no) {
    TimePoint p;
    try {
        p = parse_ym_string(s);
    } catch (const std::exception& e) {
        throw std::runtime_error("statements line " + std::to_string(line_no) + ": " + e.what());
    }
    if (p.granularity == Granularity::year) {
        p.month = is_end ? 12 : 1;
        p.granularity = Granularity::month;
    }
    return p;
}

}  // namespace

KnowledgeBase ingest_statements(std::istream& in, const TimePoint& snapshot_date,
                                IngestStats* stats) {
    IngestStats local;
    std::map<std::string, FactGroup> by_subject;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++local.records;

        std::vector<std::string> f = split_tabs(line);
        if (f.size() != 8)
            throw std::runtime_error("statements line " + std::to_string(line_no) + ": expected 8 fields, got " +
                                     std::to_string(f.size()));
        for (std::size_t i = 0; i < 6; ++i)
            if (f[i].empty())
                throw std::runtime_error("statements line " + std::to_string(line_no) + ": empty field " +
                                         std::to_string(i + 1));

        const std::string& start = f[6];
        const std::string& end = f[7];
        if (start.empty() && end.empty()) {
            ++local.skipped_no_temporal;
            continue;
        }
        if (start.empty()) {
            // An end with no start cannot form an interval; skip rather than guess.
            ++local.skipped_no_start;
            continue;
        }

        TemporalFact fact;
        fact.subject = {f[0], f[1]};
        fact.relation = {f[2], f[3]};
        fact.object = {f[4], f[5]};
        fact.interval.start = parse_fact_date(start, false, line_no);
        if (!end.empty()) {
            fact.interval.end = parse_fact_date(end, true, line_no);
            if (month_index(fact.interval.start) > month_index(*fact.interval.end))
                throw std::runtime_error("statements line " + std::to_string(line_no) +
                                         ": end date precedes start date");
        }

        FactGroup& g = by_subject[fact.subject.id];
        if (g.facts.empty()) g.subject = fact.subject;
        g.facts.push_back(std::move(fact));
        ++local.facts;
    }

    KnowledgeBase kb;
    kb.snapshot_date = snapshot_date;
    kb.groups.reserve(by_subject.size());
    for (auto& [id, group] : by_subject) {
        group.representative_relation = representative_relation(group);
        kb.groups.push_back(std::move(group));
    }
    if (stats) *stats = local;
    return kb;
}

std::string representative_relation(const FactGroup& group) {
    if (group.facts.empty()) throw std::invalid_argument("representative_relation: empty group");
    std::map<std::string, std::size_t> counts;
    for (const TemporalFact& f : group.facts) ++counts[f.relation.id];
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [rel, n] : counts) {  // map order = lexicographic, so first max wins ties
        if (n > best_count) {
            best = rel;
            best_count = n;
        }
    }
    return best;
}

std::vector<FactGroup> apply_relation_ceiling(const std::vector<FactGroup>& groups, int cap,
                                              std::uint64_t seed) {
    if (cap < 1) throw std::invalid_argument("relation ceiling must be >= 1");
    std::unordered_map<std::string, std::vector<std::size_t>> by_relation;
    for (std::size_t i = 0; i < groups.size(); ++i)
        by_relation[groups[i].representative_relation].push_back(i);

    std::vector<bool> keep(groups.size(), true);
    for (auto& [relation, indices] : by_relation) {
        if (indices.size() <= static_cast<std::size_t>(cap)) continue;
        Rng rng(derive_seed(seed, "ceiling:" + relation));
        std::vector<std::size_t> chosen = rng.sample_indices(indices.size(), static_cast<std::size_t>(cap));
        std::vector<bool> selected(indices.size(), false);
        for (std::size_t c : chosen) selected[c] = true;
        for (std::size_t k = 0; k < indices.size(); ++k)
            if (!selected[k]) keep[indices[k]] = false;
    }

    std::vector<FactGroup> out;
    out.reserve(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i)
        if (keep[i]) out.push_back(groups[i]);
    return out;
}

GroupSplits split_groups(const std::vector<FactGroup>& groups, std::size_t n_train,
                         std::size_t n_dev, std::size_t n_test, std::uint64_t seed) {
    if (n_train + n_dev + n_test > groups.size())
        throw std::invalid_argument("split sizes exceed available groups (" +
                                    std::to_string(groups.size()) + ")");
    std::vector<std::size_t> order(groups.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(order);

    auto take = [&](std::size_t offset, std::size_t n) {
        std::vector<std::size_t> part(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                      order.begin() + static_cast<std::ptrdiff_t>(offset + n));
        std::sort(part.begin(), part.end());  // input order within each split
        std::vector<FactGroup> out;
        out.reserve(n);
        for (std::size_t i : part) out.push_back(groups[i]);
        return out;
    };

    GroupSplits splits;
    splits.train = take(0, n_train);
    splits.dev = take(n_train, n_dev);
    splits.test = take(n_train + n_dev, n_test);
    return splits;
}

}  // namespace tqa

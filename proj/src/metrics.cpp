#include "tqa/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tqa {

std::string normalize_answer(const std::string& s) {
    std::string stripped;
    stripped.reserve(s.size());
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 128 && std::ispunct(u)) continue;
        stripped += static_cast<char>(u < 128 ? std::tolower(u) : u);
    }
    std::istringstream in(stripped);
    std::string tok, out;
    while (in >> tok) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        if (!out.empty()) out += ' ';
        out += tok;
    }
    return out;
}

std::vector<std::string> parse_prediction(const std::string& raw) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    const std::string connector = " and ";
    while (true) {
        std::size_t hit = raw.find(connector, pos);
        if (hit == std::string::npos) {
            parts.push_back(raw.substr(pos));
            break;
        }
        parts.push_back(raw.substr(pos, hit - pos));
        pos = hit + connector.size();
    }
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::string& p : parts) {
        std::size_t b = p.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        std::size_t e = p.find_last_not_of(" \t\r\n");
        std::string trimmed = p.substr(b, e - b + 1);
        std::string norm = normalize_answer(trimmed);
        if (norm.empty()) continue;
        if (seen.insert(norm).second) out.push_back(std::move(trimmed));
    }
    return out;
}

namespace {

std::set<std::string> normalized_set(const std::vector<std::string>& v) {
    std::set<std::string> out;
    for (const std::string& s : v) {
        std::string n = normalize_answer(s);
        if (!n.empty()) out.insert(std::move(n));
    }
    return out;
}

void require_gold(const AnswerSet& gold) {
    if (gold.empty()) throw std::invalid_argument("empty gold answer set");
}

}  // namespace

int set_accuracy(const std::vector<std::string>& pred, const AnswerSet& gold) {
    require_gold(gold);
    std::set<std::string> p = normalized_set(pred);
    std::set<std::string> g = normalized_set(gold.labels);
    // A gold set that normalizes away entirely can never be matched; keeping
    // it unmatchable preserves set_acc <= em.
    return (!g.empty() && p == g) ? 1 : 0;
}

double answer_f1(const std::vector<std::string>& pred, const AnswerSet& gold) {
    require_gold(gold);
    std::set<std::string> p = normalized_set(pred);
    std::set<std::string> g = normalized_set(gold.labels);
    if (p.empty() || g.empty()) return 0.0;
    std::size_t tp = 0;
    for (const std::string& s : p)
        if (g.count(s)) ++tp;
    if (tp == 0) return 0.0;
    double precision = static_cast<double>(tp) / static_cast<double>(p.size());
    double recall = static_cast<double>(tp) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

int exact_match(const std::vector<std::string>& pred, const AnswerSet& gold) {
    require_gold(gold);
    std::set<std::string> p = normalized_set(pred);
    for (const std::string& s : gold.labels)
        if (p.count(normalize_answer(s))) return 1;
    return 0;
}

namespace {

std::vector<std::string> normalized_tokens(const std::string& s) {
    std::istringstream in(normalize_answer(s));
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// Bag-of-tokens F1 of one (prediction, gold) pair, multiplicities respected.
double pair_token_f1(const std::vector<std::string>& pred_toks,
                     const std::vector<std::string>& gold_toks) {
    if (pred_toks.empty() || gold_toks.empty()) return pred_toks == gold_toks ? 1.0 : 0.0;
    std::map<std::string, int> counts;
    for (const std::string& t : gold_toks) ++counts[t];
    int common = 0;
    for (const std::string& t : pred_toks) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            ++common;
            --it->second;
        }
    }
    if (common == 0) return 0.0;
    double precision = static_cast<double>(common) / static_cast<double>(pred_toks.size());
    double recall = static_cast<double>(common) / static_cast<double>(gold_toks.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double token_f1(const std::vector<std::string>& pred, const AnswerSet& gold) {
    require_gold(gold);
    double best = 0.0;
    for (const std::string& p : pred) {
        std::vector<std::string> pt = normalized_tokens(p);
        for (const std::string& g : gold.labels)
            best = std::max(best, pair_token_f1(pt, normalized_tokens(g)));
    }
    return best;
}

ItemScores score_item(const std::vector<std::string>& pred, const AnswerSet& gold) {
    ItemScores s;
    s.set_acc = set_accuracy(pred, gold);
    s.ans_f1 = answer_f1(pred, gold);
    s.em = exact_match(pred, gold);
    s.tok_f1 = token_f1(pred, gold);
    return s;
}

EvalItem evaluate_prediction(const Prediction& pred, const AnswerSet& gold) {
    EvalItem item;
    item.id = pred.id;
    item.gold = gold;
    item.pred_answers = parse_prediction(pred.raw);
    item.scores = score_item(item.pred_answers, gold);
    return item;
}

const char* const kReportSliceNames[9] = {"overall",       "L2_1hop",      "L2_Mhop",
                                          "L3_1hop",       "L3_Mhop",      "single_answer",
                                          "multi_answer",  "in_domain",    "future"};

namespace {

struct SliceAccum {
    std::size_t n = 0;
    double set_acc = 0, ans_f1 = 0, em = 0, tok_f1 = 0;

    void add(const ItemScores& s) {
        ++n;
        set_acc += s.set_acc;
        ans_f1 += s.ans_f1;
        em += s.em;
        tok_f1 += s.tok_f1;
    }

    SliceStats finish() const {
        SliceStats out;
        out.n = n;
        if (n) {
            out.set_acc = set_acc / static_cast<double>(n);
            out.ans_f1 = ans_f1 / static_cast<double>(n);
            out.em = em / static_cast<double>(n);
            out.tok_f1 = tok_f1 / static_cast<double>(n);
        }
        return out;
    }
};

}  // namespace

Report aggregate(const std::vector<EvalItem>& items,
                 const std::map<std::string, QAItem>& metadata, const TimePoint& cutoff) {
    if (items.empty()) throw std::invalid_argument("no evaluation items");
    std::map<std::string, SliceAccum> accums;
    for (const EvalItem& item : items) {
        auto meta = metadata.find(item.id);
        if (meta == metadata.end())
            throw std::invalid_argument("prediction id '" + item.id + "' not found in dataset");
        const QAItem& qa = meta->second;
        accums["overall"].add(item.scores);
        std::string lh = std::string(qa.level == Level::L2 ? "L2" : "L3") +
                         (qa.multi_hop ? "_Mhop" : "_1hop");
        accums[lh].add(item.scores);
        accums[qa.n_answers >= 2 ? "multi_answer" : "single_answer"].add(item.scores);
        bool future = month_index(qa.reference_time) >= month_index(cutoff);
        accums[future ? "future" : "in_domain"].add(item.scores);
    }
    Report report;
    report.cutoff = cutoff;
    for (const char* name : kReportSliceNames) report.slices[name] = accums[name].finish();
    return report;
}

}  // namespace tqa

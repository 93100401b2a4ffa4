#pragma once

#include <map>
#include <string>
#include <vector>

#include "tqa/qgen.hpp"

namespace tqa {

// SQuAD-style normalization: lowercase, strip punctuation, drop the articles
// a/an/the, collapse whitespace. ASCII-only folding; multibyte UTF-8 bytes
// pass through untouched.
std::string normalize_answer(const std::string& s);

// Splits a model output on the standalone " and " connector, trims, drops
// empties and collapses normalization-equivalent duplicates (first kept).
std::vector<std::string> parse_prediction(const std::string& raw);

// 1 iff the normalized prediction set equals the normalized gold set.
int set_accuracy(const std::vector<std::string>& pred, const AnswerSet& gold);

// F1 over answer sets: true positives are exact normalized matches; extra
// predictions lower precision, missing golds lower recall.
double answer_f1(const std::vector<std::string>& pred, const AnswerSet& gold);

// 1 iff any predicted answer exactly matches any gold answer (max-over-pairs).
int exact_match(const std::vector<std::string>& pred, const AnswerSet& gold);

// Max over (pred, gold) pairs of bag-of-tokens F1 on normalized tokens.
double token_f1(const std::vector<std::string>& pred, const AnswerSet& gold);

struct ItemScores {
    int set_acc = 0;
    double ans_f1 = 0.0;
    int em = 0;
    double tok_f1 = 0.0;
};

ItemScores score_item(const std::vector<std::string>& pred, const AnswerSet& gold);

struct Prediction {
    std::string id;
    std::string raw;
};

struct EvalItem {
    std::string id;
    AnswerSet gold;
    std::vector<std::string> pred_answers;
    ItemScores scores;
};

EvalItem evaluate_prediction(const Prediction& pred, const AnswerSet& gold);

struct SliceStats {
    std::size_t n = 0;
    double set_acc = 0.0;
    double ans_f1 = 0.0;
    double em = 0.0;
    double tok_f1 = 0.0;
};

// Slice means: overall; level x hops; single vs multi answer; reference time
// before the cutoff (in_domain) vs at/after it (future).
struct Report {
    TimePoint cutoff;
    std::map<std::string, SliceStats> slices;
};

extern const char* const kReportSliceNames[9];

// Every eval item id must resolve in the metadata index (the dataset the
// predictions were made against). Throws on unknown ids or empty input.
Report aggregate(const std::vector<EvalItem>& items,
                 const std::map<std::string, QAItem>& metadata, const TimePoint& cutoff);

}  // namespace tqa

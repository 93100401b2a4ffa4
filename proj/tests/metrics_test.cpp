#include <doctest.h>

#include <cctype>

#include "tqa/metrics.hpp"
#include "tqa/rng.hpp"

using namespace tqa;

namespace {

AnswerSet gold(std::vector<std::string> labels) { return make_answer_set(std::move(labels)); }

// Random answer strings sharing a small lexicon so collisions, case noise and
// punctuation noise all happen.
std::string random_answer(Rng& rng) {
    static const char* words[] = {"new", "england", "patriots", "enric", "reyna", "college",
                                  "london", "the", "a", "boring", "company"};
    int n = static_cast<int>(rng.uniform_int(1, 3));
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        std::string w = words[rng.uniform_int(0, 10)];
        if (rng.uniform_int(0, 3) == 0 && !w.empty())
            w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        out += w;
    }
    if (rng.uniform_int(0, 4) == 0) out += "!";
    return out;
}

}  // namespace

TEST_CASE("normalize_answer") {
    CHECK(normalize_answer("The New England Patriots!") == "new england patriots");
    CHECK(normalize_answer("  Josep  Lluís Núñez ") == "josep lluís núñez");
    CHECK(normalize_answer("") == "");
    CHECK(normalize_answer("A mid-an-answer the THE An") == "midananswer");
    CHECK(normalize_answer("U.S. Senate") == "us senate");
}

TEST_CASE("parse_prediction splits on the connector") {
    std::vector<std::string> two = parse_prediction("Josep Lluís Núñez and Enric Reyna");
    REQUIRE(two.size() == 2);
    CHECK(two[0] == "Josep Lluís Núñez");
    CHECK(two[1] == "Enric Reyna");

    CHECK(parse_prediction("Imperial College London") ==
          std::vector<std::string>{"Imperial College London"});
    CHECK(parse_prediction("").empty());
    CHECK(parse_prediction("  and  ").empty());
    // duplicates collapse after normalization
    CHECK(parse_prediction("SpaceX and spacex!").size() == 1);
    CHECK(parse_prediction("Alpha and Beta and Gamma").size() == 3);
}

TEST_CASE("set_accuracy is order-insensitive strict identity") {
    CHECK(set_accuracy({"Alpha", "Beta"}, gold({"Beta", "Alpha"})) == 1);
    CHECK(set_accuracy({"Alpha"}, gold({"Alpha", "Beta"})) == 0);
    CHECK(set_accuracy({"Alpha", "Beta", "Gamma"}, gold({"Alpha", "Beta"})) == 0);
    CHECK(set_accuracy({}, gold({"Alpha"})) == 0);
    CHECK_THROWS_AS(set_accuracy({"Alpha"}, AnswerSet{}), std::invalid_argument);
}

TEST_CASE("answer_f1 penalizes misses and extras") {
    CHECK(answer_f1({"Alpha"}, gold({"Alpha", "Beta"})) == 2.0 / 3.0);
    CHECK(answer_f1({"Alpha", "Gamma"}, gold({"Alpha", "Beta"})) == 0.5);
    CHECK(answer_f1({"Alpha", "Beta"}, gold({"Alpha", "Beta"})) == 1.0);
    CHECK(answer_f1({}, gold({"Alpha"})) == 0.0);
    CHECK(answer_f1({"Xyz"}, gold({"Alpha"})) == 0.0);
}

TEST_CASE("exact_match takes the max over pairs") {
    CHECK(exact_match({"Alpha", "Gamma"}, gold({"Alpha", "Beta"})) == 1);
    CHECK(exact_match({"Gamma", "Delta"}, gold({"Alpha", "Beta"})) == 0);
    CHECK(exact_match({}, gold({"Alpha"})) == 0);
    CHECK(exact_match({"the new england patriots"}, gold({"New England Patriots!"})) == 1);
    // answers that normalize to an article alone can never match
    CHECK(exact_match({"A"}, gold({"A", "Beta"})) == 0);
}

TEST_CASE("token_f1 takes the max over pairs with bag semantics") {
    CHECK(token_f1({"Business International"}, gold({"Business International Corporation"})) ==
          2.0 * (2.0 / 3.0) / (1.0 + 2.0 / 3.0));
    CHECK(token_f1({"Business International"}, gold({"Business International Corporation"})) ==
          doctest::Approx(0.8).epsilon(1e-12));
    CHECK(token_f1({"Imperial College London"}, gold({"Imperial College London"})) == 1.0);
    CHECK(token_f1({"zebra"}, gold({"Imperial College London"})) == 0.0);
    // max over gold answers: the better pair wins
    CHECK(token_f1({"Enric Reyna"}, gold({"Josep Lluís Núñez", "Enric Reyna"})) == 1.0);
    // bag semantics: a repeated token only matches as often as gold holds it
    CHECK(token_f1({"north north dakota"}, gold({"north dakota"})) ==
          2.0 * (2.0 / 3.0) * 1.0 / (2.0 / 3.0 + 1.0));
}

TEST_CASE("worked metric values reproduce exactly") {
    CHECK(answer_f1({"Imperial College London"},
                    gold({"Imperial College London", "Brunel University"})) == 2.0 / 3.0);
    CHECK(answer_f1({"Imperial College London", "Oxford"},
                    gold({"Imperial College London", "Brunel University"})) == 0.5);
}

TEST_CASE("metric ordering invariants hold on random pairs") {
    Rng rng(71);
    for (int trial = 0; trial < 20000; ++trial) {
        int n_gold = static_cast<int>(rng.uniform_int(1, 4));
        std::vector<std::string> gold_labels;
        for (int i = 0; i < n_gold; ++i) gold_labels.push_back(random_answer(rng));
        AnswerSet g = make_answer_set(gold_labels);

        std::vector<std::string> pred;
        int n_pred = static_cast<int>(rng.uniform_int(0, 4));
        for (int i = 0; i < n_pred; ++i)
            pred.push_back(rng.uniform_int(0, 2) == 0 && !g.labels.empty()
                               ? g.labels[rng.uniform_int(0, static_cast<std::int64_t>(g.labels.size()) - 1)]
                               : random_answer(rng));

        ItemScores s = score_item(pred, g);
        CHECK(s.set_acc <= s.em);
        CHECK(s.ans_f1 <= static_cast<double>(s.em));
        if (s.set_acc == 1) {
            CHECK(s.ans_f1 == 1.0);
            CHECK(s.em == 1);
        }
        CHECK(s.ans_f1 >= 0.0);
        CHECK(s.ans_f1 <= 1.0);
        CHECK(s.tok_f1 >= 0.0);
        CHECK(s.tok_f1 <= 1.0);
    }
}

TEST_CASE("metrics are invariant under permutation and rewrites") {
    Rng rng(73);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::string> gold_labels;
        int n_gold = static_cast<int>(rng.uniform_int(1, 4));
        for (int i = 0; i < n_gold; ++i)
            gold_labels.push_back(random_answer(rng) + " #" + std::to_string(i));
        AnswerSet g = make_answer_set(gold_labels);
        std::vector<std::string> pred;
        for (int i = 0; i < 3; ++i) pred.push_back(random_answer(rng));

        ItemScores base = score_item(pred, g);

        std::vector<std::string> pred_rev(pred.rbegin(), pred.rend());
        ItemScores permuted = score_item(pred_rev, g);
        CHECK(base.set_acc == permuted.set_acc);
        CHECK(base.ans_f1 == permuted.ans_f1);
        CHECK(base.em == permuted.em);
        CHECK(base.tok_f1 == permuted.tok_f1);

        std::vector<std::string> rewritten;
        for (std::string s : pred) {
            for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            rewritten.push_back("The " + s + "!");
        }
        ItemScores rewrites = score_item(rewritten, g);
        CHECK(base.set_acc == rewrites.set_acc);
        CHECK(base.ans_f1 == rewrites.ans_f1);
        CHECK(base.em == rewrites.em);
        CHECK(base.tok_f1 == rewrites.tok_f1);
    }
}

TEST_CASE("evaluate_prediction parses then scores") {
    EvalItem item = evaluate_prediction({"q1", "Alpha and Beta"}, gold({"Alpha", "Beta"}));
    CHECK(item.pred_answers.size() == 2);
    CHECK(item.scores.set_acc == 1);
    CHECK(item.scores.ans_f1 == 1.0);
    CHECK(item.scores.em == 1);
    CHECK(item.scores.tok_f1 == 1.0);

    EvalItem empty = evaluate_prediction({"q2", ""}, gold({"Alpha"}));
    CHECK(empty.scores.set_acc == 0);
    CHECK(empty.scores.ans_f1 == 0.0);
    CHECK(empty.scores.em == 0);
    CHECK(empty.scores.tok_f1 == 0.0);
}

namespace {

QAItem meta_item(const std::string& id, Level level, bool multi_hop, int n_answers, int year) {
    QAItem item;
    item.id = id;
    item.level = level;
    item.multi_hop = multi_hop;
    item.n_answers = n_answers;
    item.reference_time = TimePoint{year, 6, Granularity::month};
    return item;
}

}  // namespace

TEST_CASE("aggregate slices by hops, answers and cutoff") {
    std::map<std::string, QAItem> metadata;
    metadata["a"] = meta_item("a", Level::L2, false, 1, 2005);
    metadata["b"] = meta_item("b", Level::L2, true, 2, 2021);
    metadata["c"] = meta_item("c", Level::L3, true, 1, 2010);

    std::vector<EvalItem> items = {
        evaluate_prediction({"a", "Right"}, gold({"Right"})),
        evaluate_prediction({"b", "One"}, gold({"One", "Two"})),
        evaluate_prediction({"c", "Wrong"}, gold({"Answer"})),
    };
    Report report = aggregate(items, metadata, TimePoint{2020, 1, Granularity::month});

    CHECK(report.slices.at("overall").n == 3);
    CHECK(report.slices.at("L2_1hop").n == 1);
    CHECK(report.slices.at("L2_Mhop").n == 1);
    CHECK(report.slices.at("L3_1hop").n == 0);
    CHECK(report.slices.at("L3_Mhop").n == 1);
    CHECK(report.slices.at("single_answer").n == 2);
    CHECK(report.slices.at("multi_answer").n == 1);
    CHECK(report.slices.at("in_domain").n == 2);
    CHECK(report.slices.at("future").n == 1);

    CHECK(report.slices.at("L2_1hop").set_acc == 1.0);
    CHECK(report.slices.at("L2_1hop").em == 1.0);
    CHECK(report.slices.at("multi_answer").set_acc == 0.0);
    CHECK(report.slices.at("multi_answer").em == 1.0);  // max-over-pairs overestimates
    CHECK(report.slices.at("overall").set_acc == doctest::Approx(1.0 / 3.0));

    // partitions cover everything
    CHECK(report.slices.at("in_domain").n + report.slices.at("future").n ==
          report.slices.at("overall").n);
    CHECK(report.slices.at("single_answer").n + report.slices.at("multi_answer").n ==
          report.slices.at("overall").n);

    CHECK_THROWS_AS(aggregate({evaluate_prediction({"zz", "x"}, gold({"y"}))}, metadata,
                              TimePoint{2020, 1, Granularity::month}),
                    std::invalid_argument);
    CHECK_THROWS_AS(aggregate({}, metadata, TimePoint{2020, 1, Granularity::month}),
                    std::invalid_argument);
}

TEST_CASE("aggregate means are order-independent") {
    std::map<std::string, QAItem> metadata;
    std::vector<EvalItem> items;
    Rng rng(79);
    for (int i = 0; i < 50; ++i) {
        std::string id = "q" + std::to_string(i);
        metadata[id] = meta_item(id, rng.uniform_int(0, 1) ? Level::L2 : Level::L3,
                                 rng.uniform_int(0, 1) == 1,
                                 static_cast<int>(rng.uniform_int(1, 3)),
                                 static_cast<int>(rng.uniform_int(1950, 2023)));
        items.push_back(evaluate_prediction({id, random_answer(rng)}, gold({random_answer(rng)})));
    }
    Report a = aggregate(items, metadata, TimePoint{2020, 1, Granularity::month});
    std::vector<EvalItem> reversed(items.rbegin(), items.rend());
    Report b = aggregate(reversed, metadata, TimePoint{2020, 1, Granularity::month});
    for (const char* slice : kReportSliceNames) {
        CHECK(a.slices.at(slice).n == b.slices.at(slice).n);
        CHECK(a.slices.at(slice).set_acc == doctest::Approx(b.slices.at(slice).set_acc).epsilon(1e-12));
        CHECK(a.slices.at(slice).ans_f1 == doctest::Approx(b.slices.at(slice).ans_f1).epsilon(1e-12));
    }
}

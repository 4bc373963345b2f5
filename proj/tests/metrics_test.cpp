#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

#include "collabjudge/corpus_io.hpp"
#include "collabjudge/metrics.hpp"
#include "collabjudge/random.hpp"
#include "oracles.hpp"

namespace collabjudge {
namespace {

using Ranking = std::vector<std::string>;
using TopicQrels = std::map<std::string, bool>;

struct RandomTopic {
    Ranking ranking;
    TopicQrels qrels;
};

// Ranking over a pool where some docs are judged, some are not, and some
// judged docs are never retrieved. Guarantees R >= 1.
RandomTopic random_topic(Rng& rng) {
    RandomTopic t;
    const int pool = 2 + static_cast<int>(rng.below(25));
    std::vector<std::string> docs;
    for (int i = 0; i < pool; ++i) docs.push_back("d" + std::to_string(i));
    for (const auto& d : docs) {
        if (rng.bernoulli(0.7)) t.qrels[d] = rng.bernoulli(0.4);
    }
    if (std::none_of(t.qrels.begin(), t.qrels.end(), [](const auto& kv) { return kv.second; })) {
        t.qrels[docs[rng.below(docs.size())]] = true;
    }
    rng.shuffle(docs);
    docs.resize(1 + rng.below(docs.size()));
    t.ranking = docs;
    return t;
}

TEST(Bpref, HandExamples) {
    EXPECT_DOUBLE_EQ(bpref_topic(Ranking{"relA"}, TopicQrels{{"relA", true}}), 1.0);
    EXPECT_DOUBLE_EQ(bpref_topic(Ranking{"n1", "r1", "r2", "n2"},
                                 TopicQrels{{"r1", true}, {"r2", true}, {"n1", false}, {"n2", false}}),
                     0.5);
    EXPECT_DOUBLE_EQ(bpref_topic(Ranking{"n1", "x"}, TopicQrels{{"r1", true}, {"r2", true}, {"r3", true}, {"n1", false}}),
                     0.0);
}

TEST(Bpref, NoRelevantIsAnError) {
    EXPECT_THROW(bpref_topic(Ranking{"a"}, TopicQrels{{"a", false}}), std::invalid_argument);
}

TEST(Bpref, MatchesTrecEvalReference) {
    const std::string dir = TEST_DATA_DIR;
    auto qrels = read_qrels_file(dir + "/bpref_reference.qrels", {.negative_grades = NegativeGrades::unjudged}).qrels;
    auto run = read_run_file(dir + "/bpref_reference.run");
    std::map<std::string, TopicQrels> by_topic;
    for (const auto& [key, e] : qrels.entries()) by_topic[key.topic][key.doc] = e.relevant;

    std::ifstream expected(dir + "/bpref_reference.tsv");
    std::string topic;
    double value = 0;
    int checked = 0;
    while (expected >> topic >> value) {
        Ranking ranking;
        for (const auto& d : run.lists.at(topic)) ranking.push_back(d.doc_id);
        const auto& q = by_topic.at(topic);
        EXPECT_NEAR(bpref_topic(ranking, q), value, 1e-9) << "topic " << topic;
        EXPECT_NEAR(oracle::bpref(ranking, q), value, 1e-9) << "topic " << topic;
        ++checked;
    }
    EXPECT_EQ(checked, 150);
}

TEST(Bpref, MatchesBruteForceOracle) {
    Rng rng(2024);
    for (int i = 0; i < 500; ++i) {
        auto t = random_topic(rng);
        EXPECT_NEAR(bpref_topic(t.ranking, t.qrels), oracle::bpref(t.ranking, t.qrels), 1e-12);
    }
}

TEST(Bpref, BoundedAndUnjudgedInsensitive) {
    Rng rng(77);
    for (int i = 0; i < 300; ++i) {
        auto t = random_topic(rng);
        const double base = bpref_topic(t.ranking, t.qrels);
        EXPECT_GE(base, 0.0);
        EXPECT_LE(base, 1.0);
        auto with_unjudged = t.ranking;
        with_unjudged.insert(with_unjudged.begin() + rng.below(with_unjudged.size() + 1), "unjudged-doc");
        EXPECT_DOUBLE_EQ(bpref_topic(with_unjudged, t.qrels), base);
    }
}

TEST(Bpref, PromotingRelevantNeverHurts) {
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
        auto t = random_topic(rng);
        const double base = bpref_topic(t.ranking, t.qrels);
        for (std::size_t k = 0; k + 1 < t.ranking.size(); ++k) {
            auto a = t.qrels.find(t.ranking[k]);
            auto b = t.qrels.find(t.ranking[k + 1]);
            if (a != t.qrels.end() && b != t.qrels.end() && !a->second && b->second) {
                auto swapped = t.ranking;
                std::swap(swapped[k], swapped[k + 1]);
                EXPECT_GE(bpref_topic(swapped, t.qrels), base - 1e-12);
            }
        }
    }
}

RunRanking make_run(const std::string& id, const std::map<std::string, Ranking>& lists) {
    RunRanking run;
    run.system_id = id;
    for (const auto& [topic, docs] : lists) {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            run.lists[topic].push_back({docs[i], static_cast<int>(i + 1), 1.0 / static_cast<double>(i + 1)});
        }
    }
    return run;
}

QrelSet make_qrels(const std::map<std::string, TopicQrels>& by_topic) {
    QrelSet q;
    for (const auto& [topic, docs] : by_topic) {
        for (const auto& [doc, rel] : docs) q.set({topic, doc}, rel, Provenance::nist);
    }
    return q;
}

TEST(ScoreSystems, TwoSystemsOneTopic) {
    auto qrels = make_qrels({{"1", {{"r1", true}, {"r2", true}, {"n1", false}, {"n2", false}}}});
    std::vector<RunRanking> runs{make_run("mixed", {{"1", {"n1", "r1", "r2", "n2"}}}),
                                 make_run("perfect", {{"1", {"r1", "r2", "n1", "n2"}}})};
    auto scores = score_systems(runs, qrels);
    ASSERT_EQ(scores.size(), 2u);
    EXPECT_DOUBLE_EQ(scores[0].mean, 0.5);
    EXPECT_DOUBLE_EQ(scores[1].mean, 1.0);
}

TEST(ScoreSystems, IdenticalRunsScoreIdentically) {
    auto qrels = make_qrels({{"1", {{"a", true}, {"b", false}}}, {"2", {{"c", true}}}});
    auto lists = std::map<std::string, Ranking>{{"1", {"b", "a"}}, {"2", {"c"}}};
    auto scores = score_systems({make_run("x", lists), make_run("y", lists)}, qrels);
    EXPECT_EQ(scores[0].mean, scores[1].mean);
    EXPECT_EQ(scores[0].per_topic, scores[1].per_topic);
}

TEST(ScoreSystems, MissingTopicScoresZeroAndEmptyTopicExcluded) {
    auto qrels = make_qrels({{"1", {{"a", true}}}, {"2", {{"c", true}}}, {"3", {{"z", false}}}});
    auto scores = score_systems({make_run("x", {{"1", {"a"}}})}, qrels);
    ASSERT_EQ(scores[0].per_topic.size(), 2u);
    EXPECT_EQ(scores[0].per_topic.count("3"), 0u);
    EXPECT_DOUBLE_EQ(scores[0].per_topic.at("2"), 0.0);
    EXPECT_DOUBLE_EQ(scores[0].mean, 0.5);
}

TEST(ScoreSystems, MatchesBruteForceMean) {
    Rng rng(5150);
    for (int trial = 0; trial < 20; ++trial) {
        std::map<std::string, TopicQrels> by_topic;
        std::vector<std::map<std::string, Ranking>> lists(4);
        for (int t = 0; t < 6; ++t) {
            auto topic = std::to_string(t);
            auto base = random_topic(rng);
            by_topic[topic] = base.qrels;
            for (auto& l : lists) {
                auto r = random_topic(rng).ranking;
                if (rng.bernoulli(0.9)) l[topic] = r;
            }
        }
        std::vector<RunRanking> runs;
        for (std::size_t s = 0; s < lists.size(); ++s) runs.push_back(make_run("s" + std::to_string(s), lists[s]));
        auto scores = score_systems(runs, make_qrels(by_topic));
        for (std::size_t s = 0; s < runs.size(); ++s) {
            EXPECT_NEAR(scores[s].mean, oracle::mean_bpref(lists[s], by_topic), 1e-12);
        }
    }
}

TEST(ScoreSystems, Errors) {
    EXPECT_THROW(score_systems({}, make_qrels({{"1", {{"a", true}}}})), std::invalid_argument);
    EXPECT_THROW(score_systems({make_run("x", {{"1", {"a"}}})}, make_qrels({{"1", {{"a", false}}}})),
                 std::invalid_argument);
}

std::map<std::string, double> scores_of(std::initializer_list<double> values) {
    std::map<std::string, double> out;
    int i = 0;
    for (double v : values) out["s" + std::to_string(i++)] = v;
    return out;
}

TEST(KendallTau, Examples) {
    auto a = scores_of({0.4, 0.3, 0.2, 0.1});
    EXPECT_DOUBLE_EQ(kendall_tau(a, a), 1.0);
    EXPECT_DOUBLE_EQ(kendall_tau(a, scores_of({0.1, 0.2, 0.3, 0.4})), -1.0);
    auto swapped = scores_of({0.4, 0.2, 0.3, 0.1});
    EXPECT_NEAR(kendall_tau(a, swapped, TauVariant::tau_a), 1.0 - 2.0 / 6.0, 1e-12);
    EXPECT_DOUBLE_EQ(kendall_tau(a, swapped, TauVariant::tau_a), oracle::tau_a(a, swapped));
}

TEST(KendallTau, MatchesPairEnumeration) {
    Rng rng(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(40));
        const bool ties = trial % 2 == 1;
        std::map<std::string, double> a, b;
        for (int i = 0; i < n; ++i) {
            auto key = "sys" + std::to_string(i);
            a[key] = ties ? static_cast<double>(rng.below(5)) : rng.uniform();
            b[key] = ties ? static_cast<double>(rng.below(5)) : rng.uniform();
        }
        EXPECT_DOUBLE_EQ(kendall_tau(a, b, TauVariant::tau_a), oracle::tau_a(a, b));
        EXPECT_DOUBLE_EQ(kendall_tau(a, b, TauVariant::tau_b), oracle::tau_b(a, b));
        EXPECT_DOUBLE_EQ(kendall_tau(a, b), kendall_tau(b, a));
        if (!ties) EXPECT_DOUBLE_EQ(kendall_tau(a, b, TauVariant::tau_a), kendall_tau(a, b, TauVariant::tau_b));
    }
}

TEST(KendallTau, Errors) {
    EXPECT_THROW(kendall_tau(scores_of({1, 2}), scores_of({1, 2, 3})), std::invalid_argument);
    EXPECT_THROW(kendall_tau(scores_of({1}), scores_of({1})), std::invalid_argument);
    EXPECT_THROW(kendall_tau({{"a", 1}, {"b", 2}}, {{"a", 1}, {"c", 2}}), std::invalid_argument);
}

TEST(CurveAuc, Examples) {
    std::vector<std::pair<double, double>> flat{{0, 1}, {0.3, 1}, {1, 1}};
    EXPECT_DOUBLE_EQ(curve_auc(flat), 1.0);
    std::vector<std::pair<double, double>> line{{0, 0}, {0.5, 0.5}, {1, 1}};
    EXPECT_DOUBLE_EQ(curve_auc(line), 0.5);
    std::vector<std::pair<double, double>> hand{{0, 0.6}, {0.5, 0.9}, {1, 1.0}};
    EXPECT_NEAR(curve_auc(hand), 0.85, 1e-12);
}

TEST(CurveAuc, Errors) {
    std::vector<std::pair<double, double>> backwards{{0, 0}, {0.6, 1}, {0.4, 1}, {1, 1}};
    EXPECT_THROW(curve_auc(backwards), std::invalid_argument);
    std::vector<std::pair<double, double>> short_span{{0, 0}, {0.5, 1}};
    EXPECT_THROW(curve_auc(short_span), std::invalid_argument);
}

TEST(CurveAuc, PointwiseMaxDominates) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<double, double>> a, b, hi;
        for (int i = 0; i <= 20; ++i) {
            double x = i / 20.0;
            double ya = rng.uniform() * 2 - 1, yb = rng.uniform() * 2 - 1;
            a.emplace_back(x, ya);
            b.emplace_back(x, yb);
            hi.emplace_back(x, std::max(ya, yb));
        }
        EXPECT_GE(curve_auc(hi), curve_auc(a) - 1e-12);
        EXPECT_GE(curve_auc(hi), curve_auc(b) - 1e-12);
    }
}

TEST(MetricsCsv, Headers) {
    auto qrels = make_qrels({{"1", {{"a", true}}}});
    auto scores = score_systems({make_run("x", {{"1", {"a"}}})}, qrels);
    std::ostringstream topic, mean;
    write_topic_scores_csv(topic, scores);
    write_mean_scores_csv(mean, scores);
    EXPECT_EQ(topic.str(), "system_id,topic_id,bpref\nx,1,1\n");
    EXPECT_EQ(mean.str(), "system_id,mean_bpref\nx,1\n");
}

}  // namespace
}  // namespace collabjudge

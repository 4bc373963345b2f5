// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is 1
// when any criterion fails. Criteria that need the real MQ'09 and WT'14
// collections run only when COLLABJUDGE_MQ09_DIR / COLLABJUDGE_WT14_DIR
// point at directories holding qrels.txt, runs/ and crowd.csv.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "collabjudge/aggregate.hpp"
#include "collabjudge/analysis.hpp"
#include "collabjudge/corpus_io.hpp"
#include "collabjudge/experiment.hpp"
#include "collabjudge/metrics.hpp"
#include "collabjudge/random.hpp"
#include "collabjudge/schedule.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace collabjudge;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }
Outcome skipped(std::string why) { return {Status::skip, std::move(why)}; }

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

int failures = 0;

void run(const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    if (o.status == Status::fail) ++failures;
    std::cout << tag << "  " << name << "  " << o.detail << std::endl;
}

// ---------------------------------------------------------------------------
// Real collections

struct Collection {
    std::string name;
    QrelSet nist;
    std::vector<RunRanking> runs;
    std::vector<JudgmentRecord> crowd;
};

std::optional<Collection> load_collection(const char* env, const std::string& name) {
    const char* dir = std::getenv(env);
    if (!dir || !*dir) return std::nullopt;
    Collection c;
    c.name = name;
    const fs::path root = dir;
    c.nist = read_qrels_file(root / "qrels.txt").qrels;
    c.runs = read_run_directory(root / "runs");
    c.crowd = read_crowd_file(root / "crowd.csv").records;
    return c;
}

struct CollectionStats {
    ConfusionCells mv_cells, ds_cells;
    double mv_topic_std = 0, ds_topic_std = 0;
};

CollectionStats collection_stats(const Collection& c) {
    CollectionStats s;
    auto mv = majority_vote(c.crowd, kDefaultBinarizeThreshold);
    auto ds = dawid_skene(c.crowd, {});
    s.mv_cells = confusion_matrix(mv, c.nist);
    s.ds_cells = confusion_matrix(ds, c.nist);
    s.mv_topic_std = topic_agreement(mv, c.nist).std;
    s.ds_topic_std = topic_agreement(ds, c.nist).std;
    return s;
}

struct Expected {
    double mv_acc, ds_acc;
    double cells[4];  // rr, rn, nr, nn as fractions of all compared pairs
    double ds_given_rel, ds_given_nonrel;
    double mv_std, ds_std;
};

void dataset_criteria(const char* env, const std::string& name, const Expected& want,
                      const std::function<Outcome(const Collection&)>& sweep_check) {
    std::optional<Collection> c;
    std::string load_error;
    try {
        c = load_collection(env, name);
    } catch (const std::exception& e) {
        load_error = e.what();
    }
    auto guarded = [&](const std::function<Outcome()>& f) {
        return [&, f]() -> Outcome {
            if (!load_error.empty()) return {Status::fail, "cannot load " + name + ": " + load_error};
            if (!c) return skipped(std::string("set ") + env + " to a directory with qrels.txt, runs/, crowd.csv");
            return f();
        };
    };
    std::optional<CollectionStats> stats;
    auto get_stats = [&]() -> const CollectionStats& {
        if (!stats) stats = collection_stats(*c);
        return *stats;
    };

    run(name + "_mv_agreement", guarded([&] {
            double acc = get_stats().mv_cells.accuracy();
            return verdict(std::abs(acc - want.mv_acc) <= 0.01,
                           "accuracy " + fmt(acc) + " vs " + fmt(want.mv_acc, 2) + " +-0.01");
        }));
    run(name + "_ds_agreement", guarded([&] {
            double acc = get_stats().ds_cells.accuracy();
            return verdict(std::abs(acc - want.ds_acc) <= 0.02,
                           "accuracy " + fmt(acc) + " vs " + fmt(want.ds_acc, 2) + " +-0.02");
        }));
    run(name + "_mv_confusion_cells", guarded([&] {
            const auto& m = get_stats().mv_cells;
            const std::size_t got[4] = {m.rr, m.rn, m.nr, m.nn};
            bool ok = true;
            std::string detail = "rr/rn/nr/nn";
            for (int i = 0; i < 4; ++i) {
                double pct = 100.0 * m.fraction(got[i]);
                ok = ok && std::abs(pct - 100.0 * want.cells[i]) <= 1.0;
                detail += " " + fmt(pct, 1) + "(" + fmt(100.0 * want.cells[i], 0) + ")";
            }
            return verdict(ok, detail + " percent, +-1 point");
        }));
    run(name + "_ds_agreement_by_class", guarded([&] {
            auto cat = agreement_by_category(get_stats().ds_cells);
            bool ok = std::abs(cat.agree_given_rel - want.ds_given_rel) <= 0.02 &&
                      std::abs(cat.agree_given_nonrel - want.ds_given_nonrel) <= 0.02;
            return verdict(ok, "given relevant " + fmt(cat.agree_given_rel) + " (" + fmt(want.ds_given_rel, 2) +
                                   "), given nonrelevant " + fmt(cat.agree_given_nonrel) + " (" +
                                   fmt(want.ds_given_nonrel, 2) + "), +-0.02");
        }));
    run(name + "_topic_accuracy_std", guarded([&] {
            const auto& s = get_stats();
            bool ok = std::abs(s.mv_topic_std - want.mv_std) <= 0.02 && std::abs(s.ds_topic_std - want.ds_std) <= 0.02;
            return verdict(ok, "mv " + fmt(s.mv_topic_std) + " (" + fmt(want.mv_std, 2) + "), ds " +
                                   fmt(s.ds_topic_std) + " (" + fmt(want.ds_std, 2) + "), +-0.02");
        }));
    run(name + "_oracle_tau_threshold_budget", guarded([&] { return sweep_check(*c); }));
}

Outcome oracle_budget_in(const Collection& c, double lo, double hi) {
    SweepConfig cfg;
    auto r = sweep(ScheduleMethod::oracle_tbs, c.runs, c.nist, c.crowd, cfg);
    auto reach = first_budget_reaching(r.curve, kTauThreshold);
    if (!reach) return {Status::fail, "mean tau never reaches 0.9"};
    return verdict(*reach >= lo - 1e-9 && *reach <= hi + 1e-9,
                   "first budget with mean tau >= 0.9: " + fmt(*reach, 2) + ", want [" + fmt(lo, 2) + ", " +
                       fmt(hi, 2) + "] (mv)");
}

// ---------------------------------------------------------------------------
// Desk-scale

struct RecoveryRun {
    std::uint64_t seed;
    double ds_acc, mv_acc, max_rate_err;
    double max_group_err;  // error of the per-group mean rates, diagnostic only
    bool flipped;
    std::vector<double> objective;
};

// 30 workers, 30% adversarial, 200 items, 5 labels per item, prior 0.5.
SynthConfig recovery_corpus(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_topics = 1;
    cfg.docs_per_topic = 200;
    cfg.n_systems = 2;
    cfg.n_workers = 30;
    cfg.labels_per_doc = 5;
    cfg.prior_relevant = 0.5;
    cfg.worker_reliability.clear();
    for (int w = 0; w < 30; ++w) cfg.worker_reliability.emplace_back(w < 21 ? 0.9 : 0.3, w < 21 ? 0.9 : 0.3);
    cfg.seed = seed;
    return cfg;
}

double label_accuracy(const AggregationResult& r, const std::map<PairKey, bool>& truth) {
    std::size_t right = 0;
    for (const auto& [key, rel] : truth) right += r.items.at(key).relevant == rel ? 1 : 0;
    return static_cast<double>(right) / static_cast<double>(truth.size());
}

const std::vector<RecoveryRun>& recovery_runs() {
    static const std::vector<RecoveryRun> runs = [] {
        std::vector<RecoveryRun> out;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            auto data = synth_generate(recovery_corpus(seed));
            auto ds = dawid_skene(data.crowd, {});
            auto mv = majority_vote(data.crowd, kDefaultBinarizeThreshold);
            RecoveryRun r{seed, label_accuracy(ds, data.truth), label_accuracy(mv, data.truth), 0.0, 0.0,
                          ds.anchor_flipped, ds.objective_trace};
            std::map<std::pair<double, double>, std::array<double, 3>> groups;  // planted -> sums, count
            for (std::size_t w = 0; w < ds.workers.size(); ++w) {
                const auto& got = ds.workers[w];
                const auto& planted = data.worker_rates[w];
                r.max_rate_err = std::max({r.max_rate_err, std::abs(got.sensitivity - planted.first),
                                           std::abs(got.specificity - planted.second)});
                auto& g = groups[planted];
                g[0] += got.sensitivity;
                g[1] += got.specificity;
                g[2] += 1;
            }
            for (const auto& [planted, g] : groups) {
                r.max_group_err = std::max({r.max_group_err, std::abs(g[0] / g[2] - planted.first),
                                            std::abs(g[1] / g[2] - planted.second)});
            }
            out.push_back(std::move(r));
        }
        return out;
    }();
    return runs;
}

bool non_decreasing(const std::vector<double>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i] < trace[i - 1]) return false;
    }
    return true;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int shell(const std::string& cmd) {
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

int main() {
    std::cout << "acceptance criteria\n";

    dataset_criteria("COLLABJUDGE_MQ09_DIR", "mq09",
                     {0.65, 0.70, {0.44, 0.10, 0.25, 0.21}, 0.76, 0.63, 0.13, 0.11},
                     [](const Collection& c) { return oracle_budget_in(c, 0.45, 0.65); });
    dataset_criteria("COLLABJUDGE_WT14_DIR", "wt14",
                     {0.80, 0.81, {0.39, 0.06, 0.14, 0.41}, 0.82, 0.80, 0.17, 0.15},
                     [](const Collection& c) { return oracle_budget_in(c, 0.10, 0.25); });

    run("wt14_drbo_auc_at_least_random", [] {
        std::optional<Collection> c = load_collection("COLLABJUDGE_WT14_DIR", "wt14");
        if (!c) return skipped("set COLLABJUDGE_WT14_DIR to a directory with qrels.txt, runs/, crowd.csv");
        bool ok = true;
        std::string detail;
        for (auto agg : {Aggregator::mv, Aggregator::ds}) {
            SweepConfig cfg;
            cfg.aggregator = agg;
            auto ctx = prepare_sweep(c->runs, c->nist, c->crowd, cfg);
            double drbo = sweep(ScheduleMethod::drbo, ctx, cfg).curve.auc;
            double rnd = sweep(ScheduleMethod::random, ctx, cfg).curve.auc;
            ok = ok && drbo >= rnd;
            detail += std::string(to_string(agg)) + ": drbo " + fmt(drbo) + " random " + fmt(rnd) + "; ";
        }
        return verdict(ok, detail);
    });

    run("ds_recovery_accuracy", [] {
        bool ok = true;
        std::string detail = "seeds 1-10, want >= 0.95:";
        for (const auto& r : recovery_runs()) {
            ok = ok && r.ds_acc >= 0.95;
            detail += " " + fmt(r.ds_acc, 3);
        }
        return verdict(ok, detail);
    });
    run("ds_recovery_beats_mv", [] {
        bool ok = true;
        std::string detail = "ds-mv accuracy gap, want > 0:";
        for (const auto& r : recovery_runs()) {
            ok = ok && r.ds_acc > r.mv_acc;
            detail += " " + fmt(r.ds_acc - r.mv_acc, 3);
        }
        return verdict(ok, detail);
    });
    run("ds_recovery_worker_rates", [] {
        bool ok = true;
        std::string detail = "max |recovered - planted| per seed, want <= 0.05:";
        for (const auto& r : recovery_runs()) {
            ok = ok && r.max_rate_err <= 0.05;
            detail += " " + fmt(r.max_rate_err, 3) + (r.flipped ? "(flipped)" : "");
        }
        double group = 0;
        for (const auto& r : recovery_runs()) group = std::max(group, r.max_group_err);
        return verdict(ok, detail + "; for reference, worst error of group-mean rates " + fmt(group, 3));
    });

    run("ds_objective_non_decreasing", [] {
        // recovery corpora plus synthetic corpora with topic-level noise;
        // dawid_skene itself throws if the objective ever drops.
        std::size_t corpora = 0, iterations = 0;
        for (const auto& r : recovery_runs()) {
            if (!non_decreasing(r.objective)) return verdict(false, "seed " + std::to_string(r.seed));
            ++corpora;
            iterations += r.objective.size();
        }
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            SynthConfig cfg;
            cfg.seed = seed;
            cfg.n_topics = 10;
            cfg.topic_difficulty_spread = 0.05 * static_cast<double>(seed % 10);
            cfg.worker_reliability = {{0.6 + 0.015 * static_cast<double>(seed), 0.75}};
            auto ds = dawid_skene(synth_generate(cfg).crowd, {});
            if (!non_decreasing(ds.objective_trace)) return verdict(false, "synth seed " + std::to_string(seed));
            ++corpora;
            iterations += ds.objective_trace.size();
        }
        return verdict(true, std::to_string(corpora) + " corpora, " + std::to_string(iterations) +
                                 " iterations, no decrease (exact comparison)");
    });

    run("bpref_matches_trec_eval", [] {
        const std::string dir = TEST_DATA_DIR;
        auto qrels =
            read_qrels_file(dir + "/bpref_reference.qrels", {.negative_grades = NegativeGrades::unjudged}).qrels;
        auto runfile = read_run_file(dir + "/bpref_reference.run");
        std::map<std::string, std::map<std::string, bool>> by_topic;
        for (const auto& [key, e] : qrels.entries()) by_topic[key.topic][key.doc] = e.relevant;
        std::ifstream expected(dir + "/bpref_reference.tsv");
        std::string topic;
        double value = 0, worst = 0;
        int n = 0;
        while (expected >> topic >> value) {
            std::vector<std::string> ranking;
            for (const auto& d : runfile.lists.at(topic)) ranking.push_back(d.doc_id);
            worst = std::max(worst, std::abs(bpref_topic(ranking, by_topic.at(topic)) - value));
            ++n;
        }
        return verdict(n >= 100 && worst <= 1e-6,
                       std::to_string(n) + " topics vs trec_eval output, max error " + fmt(worst, 12) + " (<= 1e-6)");
    });

    run("bpref_matches_brute_force", [] {
        Rng rng(20240601);
        double worst = 0;
        const int n = 1000;
        for (int t = 0; t < n; ++t) {
            std::map<std::string, bool> q;
            std::vector<std::string> pool;
            const int size = 2 + static_cast<int>(rng.below(30));
            for (int i = 0; i < size; ++i) pool.push_back("d" + std::to_string(i));
            for (const auto& d : pool) {
                if (rng.bernoulli(0.7)) q[d] = rng.bernoulli(0.4);
            }
            q[pool[rng.below(pool.size())]] = true;
            rng.shuffle(pool);
            pool.resize(1 + rng.below(pool.size()));
            worst = std::max(worst, std::abs(bpref_topic(pool, q) - oracle::bpref(pool, q)));
        }
        return verdict(worst <= 1e-6, std::to_string(n) + " random topics, max error " + fmt(worst, 12));
    });

    run("kendall_matches_pair_enumeration", [] {
        Rng rng(77);
        int mismatches = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const bool ties = trial % 2 == 1;
            const int n = 2 + static_cast<int>(rng.below(50));
            std::map<std::string, double> a, b;
            for (int i = 0; i < n; ++i) {
                auto key = "s" + std::to_string(i);
                a[key] = ties ? static_cast<double>(rng.below(4)) : rng.uniform();
                b[key] = ties ? static_cast<double>(rng.below(4)) : rng.uniform();
            }
            mismatches += kendall_tau(a, b, TauVariant::tau_a) != oracle::tau_a(a, b);
            mismatches += kendall_tau(a, b, TauVariant::tau_b) != oracle::tau_b(a, b);
        }
        return verdict(mismatches == 0, "1000 score-map pairs (500 with ties), tau_a and tau_b, " +
                                             std::to_string(mismatches) + " inexact results");
    });

    SynthConfig sched_cfg;
    sched_cfg.topic_difficulty_spread = 0.4;
    sched_cfg.seed = 11;
    const auto sched_data = synth_generate(sched_cfg);
    SweepConfig sched_sweep;
    const auto sched_ctx = prepare_sweep(sched_data.runs, sched_data.nist, sched_data.crowd, sched_sweep);

    run("schedulers_partition_judged_pairs", [&] {
        int plans = 0;
        for (auto m : {ScheduleMethod::drbo, ScheduleMethod::oracle_tbs, ScheduleMethod::random}) {
            for (auto mode : {OracleBudgetMode::global, OracleBudgetMode::per_topic}) {
                for (double b : sched_sweep.budgets) {
                    auto plan = plan_for_budget(m, sched_ctx, b, repetition_seed(1, m, b, 0), mode);
                    PairSet all = plan.trusted;
                    all.insert(plan.crowd.begin(), plan.crowd.end());
                    if (all != sched_ctx.judged || plan.trusted.size() + plan.crowd.size() != all.size()) {
                        return verdict(false, std::string(to_string(m)) + " budget " + fmt(b, 2));
                    }
                    ++plans;
                }
            }
        }
        return verdict(true, std::to_string(plans) + " plans: trusted and crowd disjoint, union = judged");
    });

    run("full_budget_gives_tau_one", [&] {
        SweepConfig cfg;
        cfg.budgets = {0.0, 1.0};
        std::string detail;
        bool ok = true;
        for (auto agg : {Aggregator::mv, Aggregator::ds}) {
            cfg.aggregator = agg;
            auto ctx = prepare_sweep(sched_data.runs, sched_data.nist, sched_data.crowd, cfg);
            for (auto m : {ScheduleMethod::drbo, ScheduleMethod::oracle_tbs, ScheduleMethod::random}) {
                auto r = sweep(m, ctx, cfg);
                for (const auto& t : r.raw) {
                    if (t.budget == 1.0 && t.tau != 1.0) {
                        ok = false;
                        detail += std::string(to_string(m)) + " rep " + std::to_string(t.rep) + " tau " +
                                  fmt(t.tau, 6) + "; ";
                    }
                }
            }
        }
        return verdict(ok, ok ? "every repetition of drbo, oracle_tbs and random, mv and ds: tau == 1" : detail);
    });

    run("drbo_matches_brute_force_top_k", [] {
        Rng rng(4242);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 1 + static_cast<int>(rng.below(80));
            PairSet judged;
            std::vector<DocWeight> weights;
            std::map<std::string, double> w;
            for (int i = 0; i < n; ++i) {
                auto doc = "d" + std::to_string(1000 + i);
                judged.insert({"t", doc});
                w[doc] = rng.bernoulli(0.25) ? 0.0 : static_cast<double>(rng.below(10)) * rng.uniform();
                weights.push_back({"t", doc, w[doc]});
            }
            const double rho = rng.uniform();
            auto plan = drbo_plan(weights, judged, rho);
            std::set<std::string> got;
            for (const auto& k : plan.trusted) got.insert(k.doc);
            if (got != oracle::top_k(w, budget_count(rho, judged.size()))) {
                return verdict(false, "trial " + std::to_string(trial));
            }
        }
        return verdict(true, "100 random weight sets, trusted set equals brute-force argmax top-K");
    });

    run("synthetic_oracle_auc_vs_random", [] {
        // shaped like the WT'14 collection: 50 topics x 100 documents,
        // 29 runs, 5 crowd labels per document
        int ok_seeds = 0;
        std::string detail;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            SynthConfig s;
            s.n_topics = 50;
            s.docs_per_topic = 100;
            s.n_systems = 29;
            s.labels_per_doc = 5;
            s.topic_difficulty_spread = 0.3;
            s.seed = seed;
            auto data = synth_generate(s);
            SweepConfig cfg;
            cfg.master_seed = seed;
            auto ctx = prepare_sweep(data.runs, data.nist, data.crowd, cfg);
            double oracle_auc = sweep(ScheduleMethod::oracle_tbs, ctx, cfg).curve.auc;
            double random_auc = sweep(ScheduleMethod::random, ctx, cfg).curve.auc;
            ok_seeds += oracle_auc >= random_auc - 0.01;
            detail += " " + fmt(oracle_auc - random_auc, 3);
        }
        return verdict(ok_seeds >= 9, "spread 0.3, oracle-random AUC per seed:" + detail + "; " +
                                          std::to_string(ok_seeds) + "/10 within -0.01 (need 9)");
    });

    run("sweep_cli_is_deterministic", [] {
        const fs::path tmp = fs::temp_directory_path() / ("collabjudge-acceptance-" + std::to_string(::getpid()));
        fs::remove_all(tmp);
        const std::string cli = COLLABJUDGE_CLI;
        const std::string data = (tmp / "data").string();
        if (shell(cli + " synth -q --out " + data + " --synth-topics 15 --synth-spread 0.3 --seed 5") != 0) {
            return verdict(false, "synth failed");
        }
        const std::string args = " sweep -q --qrels " + data + "/qrels.txt --runs " + data + "/runs --crowd " + data +
                                 "/crowd.csv --seed 9 --reps-random 20 --out ";
        for (const char* out : {"a", "b"}) {
            if (shell(cli + args + (tmp / out).string()) != 0) return verdict(false, "sweep failed");
        }
        for (const char* f : {"sweep_raw.csv", "sweep_agg.csv", "summary.json"}) {
            auto a = read_file(tmp / "a" / f), b = read_file(tmp / "b" / f);
            if (a.empty() || a != b) return verdict(false, std::string(f) + " differs between runs");
        }
        fs::remove_all(tmp);
        return verdict(true, "two sweeps with seed 9: sweep_raw.csv, sweep_agg.csv, summary.json byte-identical");
    });

    std::cout << (failures ? std::to_string(failures) + " criteria failed\n" : "all runnable criteria passed\n");
    return failures ? 1 : 0;
}

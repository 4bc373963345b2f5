#pragma once

// Budget sweeps over the collaborative-judging schedulers, and a seeded
// synthetic corpus generator used for desk-scale verification.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "collabjudge/aggregate.hpp"
#include "collabjudge/analysis.hpp"
#include "collabjudge/metrics.hpp"
#include "collabjudge/schedule.hpp"
#include "collabjudge/types.hpp"

namespace collabjudge {

inline constexpr double kTauThreshold = 0.9;

// Budgets lo, lo + step, ..., 1.0; values are snapped to 1e-9 so the grid
// prints cleanly.
std::vector<double> budget_grid(double step);

// "0:1:0.05" (start:stop:step) or an explicit list "0,0.1,0.5,1".
std::vector<double> parse_budgets(const std::string& spec);

struct SweepConfig {
    std::vector<double> budgets = budget_grid(0.05);
    int reps_random = 50;
    int reps_oracle = 10;
    Aggregator aggregator = Aggregator::mv;
    TauVariant tau_variant = TauVariant::tau_b;
    std::uint64_t master_seed = 1;
    OracleBudgetMode oracle_budget_mode = OracleBudgetMode::global;
    int statap_depth = 1000;  // raised to the deepest run rank when shallower
    DawidSkeneConfig ds;
    int threads = 0;  // 0: hardware concurrency

    void validate() const;
};

// Mean bpref per system under the NIST judgments.
std::map<std::string, double> ground_truth_ranking(const std::vector<RunRanking>& runs, const QrelSet& nist);

// Per-topic crowd accuracy on the full data: what the oracle scheduler knows.
std::map<std::string, double> per_topic_oracle_agreement(const AggregationResult& crowd, const QrelSet& nist);

// Everything a sweep needs, computed once: the judged scope (pairs with
// both a NIST and a crowd label), the two label sources indexed densely,
// each run's judged documents in rank order, scheduler inputs, and the
// ground-truth scores.
struct SweepContext {
    std::vector<PairKey> pairs;       // judged scope, key order
    PairSet judged;
    std::vector<std::uint8_t> nist_labels;
    std::vector<std::uint8_t> crowd_labels;
    std::vector<std::string> topics;
    std::vector<std::uint32_t> topic_of_pair;
    std::vector<std::string> system_ids;
    // judged_ranked[run][topic] = pair indices in rank order
    std::vector<std::vector<std::vector<std::uint32_t>>> judged_ranked;

    QrelSet nist_scope;      // NIST restricted to the judged scope
    AggregationResult crowd;  // aggregated over every crowd judgment
    std::vector<DocWeight> weights;
    std::map<std::string, double> topic_agreement;
    std::map<std::string, double> ground_truth;

    std::size_t crowd_pairs_outside_nist = 0;
    std::size_t nist_pairs_without_crowd = 0;
};

SweepContext prepare_sweep(const std::vector<RunRanking>& runs, const QrelSet& nist,
                           const std::vector<JudgmentRecord>& crowd_judgments, const SweepConfig& cfg);

// Mean bpref per system when pair i is judged labels[i]. Same numbers as
// score_systems over the equivalent QrelSet.
std::map<std::string, double> score_labels(const SweepContext& ctx, const std::vector<std::uint8_t>& labels);

// Hybrid labels for a plan over the context's judged scope.
std::vector<std::uint8_t> hybrid_labels(const SweepContext& ctx, const SchedulePlan& plan);

SchedulePlan plan_for_budget(ScheduleMethod method, const SweepContext& ctx, double budget, std::uint64_t seed,
                             OracleBudgetMode oracle_mode);

// Stable per-(method, budget, repetition) seed; adding budgets to a grid
// does not disturb the seeds of existing points.
std::uint64_t repetition_seed(std::uint64_t master_seed, ScheduleMethod method, double budget, int rep);

struct RawTau {
    double budget = 0.0;
    int rep = 0;
    double tau = 0.0;
};

struct SweepResult {
    ScheduleMethod method = ScheduleMethod::drbo;
    std::vector<RawTau> raw;  // budget-major, rep-minor
    CorrelationCurve curve;
};

int repetitions(ScheduleMethod method, const SweepConfig& cfg);

SweepResult sweep(ScheduleMethod method, const SweepContext& ctx, const SweepConfig& cfg);
SweepResult sweep(ScheduleMethod method, const std::vector<RunRanking>& runs, const QrelSet& nist,
                  const std::vector<JudgmentRecord>& crowd_judgments, const SweepConfig& cfg);

// Smallest budget whose mean tau reaches `threshold`.
std::optional<double> first_budget_reaching(const CorrelationCurve& curve, double threshold = kTauThreshold);

// `method,budget,rep,tau`
void write_sweep_raw_csv(std::ostream& out, const std::vector<SweepResult>& results);
// `method,budget,mean_tau,std_tau,n_reps`
void write_sweep_agg_csv(std::ostream& out, const std::vector<SweepResult>& results);

struct SynthConfig {
    int n_topics = 20;
    int docs_per_topic = 50;
    int n_systems = 10;
    int n_workers = 10;
    int labels_per_doc = 5;
    double prior_relevant = 0.4;
    // (sensitivity, specificity) per worker; a single entry applies to all.
    std::vector<std::pair<double, double>> worker_reliability = {{0.8, 0.8}};
    // Each topic draws an extra label-flip probability uniformly from [0, spread].
    double topic_difficulty_spread = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthData {
    QrelSet nist;
    std::vector<RunRanking> runs;
    std::vector<JudgmentRecord> crowd;
    std::map<PairKey, bool> truth;
    std::map<std::string, double> topic_flip;
    std::vector<std::pair<double, double>> worker_rates;  // per worker, in worker-id order
    std::vector<std::string> worker_ids;
};

SynthData synth_generate(const SynthConfig& cfg);

}  // namespace collabjudge

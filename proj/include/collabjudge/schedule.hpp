#pragma once

// Budgeted routing of judged (topic, doc) pairs to trusted assessors or to
// the crowd, and construction of the resulting hybrid qrels.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "collabjudge/aggregate.hpp"
#include "collabjudge/types.hpp"

namespace collabjudge {

struct DocWeight {
    std::string topic_id;
    std::string doc_id;
    double weight = 0.0;
};

enum class ScheduleMethod { drbo, oracle_tbs, random };

const char* to_string(ScheduleMethod m);
ScheduleMethod schedule_method_from_string(const std::string& s);

struct SchedulePlan {
    ScheduleMethod method = ScheduleMethod::drbo;
    double budget_ratio = 0.0;
    PairSet trusted;
    PairSet crowd;
    std::uint64_t seed = 0;
};

// How the Oracle TBS budget is sized. global: round(rho * |judged|).
// per_topic: sum over topics of round(rho * n_t), the same total DRBO and
// random spend. Either way the budget is consumed in topic-agreement order.
enum class OracleBudgetMode { global, per_topic };

const char* to_string(OracleBudgetMode m);
OracleBudgetMode oracle_budget_mode_from_string(const std::string& s);

// Weight a run gives the document it places at `rank` (1-based) when runs
// are considered to depth Z: 1 + sum_{k=rank+1}^{Z} 1/k. Strictly
// decreasing in rank; 0 beyond the depth.
double statap_rank_weight(int rank, int depth);

// One entry per judged pair, in key order. A document's weight is the sum
// of its rank weights over all runs; unretrieved documents weigh 0.
std::vector<DocWeight> statap_weights(const std::vector<RunRanking>& runs, const PairSet& judged, int depth);

// Per topic, the round(rho * n_t) heaviest documents (ties by doc_id) go to
// trusted assessors. Deterministic.
SchedulePlan drbo_plan(const std::vector<DocWeight>& weights, const PairSet& judged, double budget_ratio);

// Topics are consumed lowest agreement first (ties by topic id), documents
// within a topic in seeded random order, until the budget is spent.
SchedulePlan oracle_tbs_plan(const std::map<std::string, double>& topic_agreement, const PairSet& judged,
                             double budget_ratio, std::uint64_t seed,
                             OracleBudgetMode mode = OracleBudgetMode::global);

// Per topic, round(rho * n_t) documents drawn uniformly without replacement.
SchedulePlan random_plan(const PairSet& judged, double budget_ratio, std::uint64_t seed);

// Trusted pairs take the NIST label, crowd pairs the aggregated crowd label.
// Throws ConsistencyError naming the first pair that lacks its label.
QrelSet build_hybrid_qrels(const SchedulePlan& plan, const QrelSet& nist, const AggregationResult& crowd_labels);

// K = round(rho * n) with halves rounded up.
std::size_t budget_count(double budget_ratio, std::size_t n);

std::map<std::string, std::vector<std::string>> docs_by_topic(const PairSet& pairs);

// `topic_id,doc_id,assignee`
void write_plan_csv(std::ostream& out, const SchedulePlan& plan);

}  // namespace collabjudge

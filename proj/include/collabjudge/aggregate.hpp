#pragma once

// Collapses several crowd labels per (topic, doc) into one binary label.

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "collabjudge/corpus_io.hpp"
#include "collabjudge/types.hpp"

namespace collabjudge {

enum class Aggregator { mv, ds };

const char* to_string(Aggregator a);
Aggregator aggregator_from_string(const std::string& s);

struct WorkerModel {
    std::string worker_id;
    double sensitivity = 0.5;  // P(vote relevant | truly relevant)
    double specificity = 0.5;  // P(vote nonrelevant | truly nonrelevant)
    std::size_t n_judgments = 0;
};

struct ItemEstimate {
    bool relevant = false;
    double posterior = 0.0;  // P(relevant); the vote fraction under MV
};

struct AggregationResult {
    Aggregator method = Aggregator::mv;
    std::map<PairKey, ItemEstimate> items;
    double prior = 0.5;
    std::vector<WorkerModel> workers;  // empty for MV
    int iterations = 0;
    bool converged = true;
    // DS only: true when the EM solution was flipped to agree with the
    // majority-vote class assignment.
    bool anchor_flipped = false;
    // DS only: penalized log-likelihood after each EM iteration.
    std::vector<double> objective_trace;
    // DS only: plain data log-likelihood after each EM iteration.
    std::vector<double> loglik_trace;

    const ItemEstimate* find(const PairKey& key) const {
        auto it = items.find(key);
        return it == items.end() ? nullptr : &it->second;
    }
    Provenance provenance() const {
        return method == Aggregator::mv ? Provenance::crowd_mv : Provenance::crowd_ds;
    }
};

// Unweighted vote. Relevant iff strictly more relevant than nonrelevant
// votes; a tie goes to nonrelevant.
AggregationResult majority_vote(const std::vector<JudgmentRecord>& judgments,
                                int binarize_threshold = kDefaultBinarizeThreshold);

struct DawidSkeneConfig {
    int max_iters = 100;
    double tol = 1e-6;       // on max |change| of item posteriors
    double smoothing = 1.0;  // pseudo-count added to each confusion cell and to the prior
    int binarize_threshold = kDefaultBinarizeThreshold;
};

// Binary Dawid-Skene EM with one 2x2 confusion matrix per worker. Starts
// from majority-vote fractions, so no randomness is involved. The smoothing
// pseudo-counts make each M-step a MAP update; objective_trace records the
// matching penalized likelihood, which EM never decreases.
AggregationResult dawid_skene(const std::vector<JudgmentRecord>& judgments,
                              const DawidSkeneConfig& config = {});

AggregationResult aggregate(Aggregator method, const std::vector<JudgmentRecord>& judgments,
                            const DawidSkeneConfig& config = {});

// `topic_id,doc_id,label,posterior`
void write_labels_csv(std::ostream& out, const AggregationResult& result);
// `worker_id,sensitivity,specificity,n_judgments`
void write_workers_csv(std::ostream& out, const AggregationResult& result);

}  // namespace collabjudge

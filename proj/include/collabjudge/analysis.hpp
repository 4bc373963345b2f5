#pragma once

// Crowd-vs-gold disagreement statistics: confusion matrix, agreement by
// gold relevance class, agreement by average document rank, and agreement
// across topics.

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "collabjudge/aggregate.hpp"
#include "collabjudge/types.hpp"

namespace collabjudge {

// Rows are the gold label, columns the crowd label.
struct ConfusionCells {
    std::size_t rr = 0;  // gold relevant, crowd relevant
    std::size_t rn = 0;  // gold relevant, crowd nonrelevant
    std::size_t nr = 0;  // gold nonrelevant, crowd relevant
    std::size_t nn = 0;  // gold nonrelevant, crowd nonrelevant

    std::size_t total() const { return rr + rn + nr + nn; }
    double fraction(std::size_t cell) const { return static_cast<double>(cell) / static_cast<double>(total()); }
    double accuracy() const { return static_cast<double>(rr + nn) / static_cast<double>(total()); }
};

// Counts over the pairs present in both. Throws ConsistencyError when no
// pair is shared.
ConfusionCells confusion_matrix(const AggregationResult& crowd, const QrelSet& gold);

struct CategoryAgreement {
    double agree_given_rel = 0.0;     // rr / (rr + rn)
    double agree_given_nonrel = 0.0;  // nn / (nr + nn)
};

CategoryAgreement agreement_by_category(const AggregationResult& crowd, const QrelSet& gold);
CategoryAgreement agreement_by_category(const ConfusionCells& cells);

// absent_as_cap: a run that does not retrieve the document contributes
// `cap`. retrieving_only: average over the runs that retrieve it (cap when
// none does).
enum class AvgRankMode { absent_as_cap, retrieving_only };

const char* to_string(AvgRankMode m);
AvgRankMode avg_rank_mode_from_string(const std::string& s);

inline constexpr int kRankCap = 1000;

// Mean of min(rank, cap) over runs, per judged pair.
std::map<PairKey, double> average_ranks(const std::vector<RunRanking>& runs, const PairSet& judged,
                                        int cap = kRankCap, AvgRankMode mode = AvgRankMode::absent_as_cap);

struct RankBin {
    int lo = 0;
    int hi = 0;
    std::size_t n = 0;
    double accuracy = 0.0;  // NaN when n == 0
    double tp_ratio = 0.0;  // crowd R and gold R, as a fraction of n
    double tn_ratio = 0.0;  // crowd N and gold N, as a fraction of n
    std::size_t tp = 0;
    std::size_t tn = 0;
};

// Ten bins of width 100: a pair with average rank a lands in bin
// ceil(a / 100), clamped to [1, 10], so exact multiples of 100 stay in the
// lower bin.
std::vector<RankBin> rank_bin_agreement(const std::map<PairKey, double>& avg_ranks,
                                        const AggregationResult& crowd, const QrelSet& gold);

struct TopicAgreement {
    std::map<std::string, double> per_topic;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over topics
};

TopicAgreement topic_agreement(const AggregationResult& crowd, const QrelSet& gold);

// 2x2 with row/column headers plus a total row and column, counts and
// fractions of the compared pairs.
void write_confusion_csv(std::ostream& out, const ConfusionCells& cells);
// `agree_given_rel,agree_given_nonrel,n_rel,n_nonrel`
void write_category_csv(std::ostream& out, const ConfusionCells& cells);
// `bin_lo,bin_hi,n,accuracy,tp_ratio,tn_ratio`
void write_rank_bins_csv(std::ostream& out, const std::vector<RankBin>& bins);
// `topic_id,accuracy`
void write_topic_agreement_csv(std::ostream& out, const TopicAgreement& agreement);

}  // namespace collabjudge

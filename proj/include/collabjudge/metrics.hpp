#pragma once

// bpref scoring over incomplete binary judgments, Kendall's tau between
// system orderings, and trapezoidal AUC for cost/correlation curves.

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "collabjudge/types.hpp"

namespace collabjudge {

struct SystemScore {
    std::string system_id;
    std::map<std::string, double> per_topic;  // topics with >= 1 judged relevant doc only
    double mean = 0.0;
};

// bpref for one topic given the judged documents of a ranking, in rank
// order, as 1 (relevant) / 0 (nonrelevant). Unjudged documents must already
// be dropped. num_rel and num_nonrel count all judged documents for the
// topic, retrieved or not. Follows trec_eval's corrected formulation:
//
//   bpref = 1/R * sum over retrieved relevant d of
//           1 - min(nonrel ranked above d, R) / min(R, N)
//
// with every retrieved relevant document counting 1 when nothing
// nonrelevant precedes it (which covers N = 0).
double bpref_judged(std::span<const std::uint8_t> judged_in_rank_order, std::size_t num_rel,
                    std::size_t num_nonrel);

// Throws std::invalid_argument when the topic has no judged relevant document.
double bpref_topic(std::span<const std::string> ranking, const std::map<std::string, bool>& qrels_topic);

// Mean bpref per system over the qrels topics that have R >= 1. Topics a
// run does not cover score 0. Summation runs in topic order.
std::vector<SystemScore> score_systems(const std::vector<RunRanking>& runs, const QrelSet& qrels);

std::map<std::string, double> mean_scores(const std::vector<SystemScore>& scores);

enum class TauVariant { tau_a, tau_b };

const char* to_string(TauVariant v);
TauVariant tau_variant_from_string(const std::string& s);

// O(n log n) Knight count. Pairs tied in both maps count as neither
// concordant nor discordant. tau_b is reported as 0 when one side is
// entirely tied (the coefficient is undefined there).
double kendall_tau(const std::map<std::string, double>& scores_a,
                   const std::map<std::string, double>& scores_b, TauVariant variant = TauVariant::tau_b);

// Trapezoidal area; x must be strictly increasing from 0 to 1.
double curve_auc(std::span<const std::pair<double, double>> points);

struct CurvePoint {
    double budget = 0.0;
    double mean_tau = 0.0;
    double std_tau = 0.0;
    int n_reps = 1;
};

struct CorrelationCurve {
    std::vector<CurvePoint> points;
    double auc = 0.0;
};

// Fills in curve.auc from its points.
void finalize_curve(CorrelationCurve& curve);

// `system_id,topic_id,bpref`
void write_topic_scores_csv(std::ostream& out, const std::vector<SystemScore>& scores);
// `system_id,mean_bpref`
void write_mean_scores_csv(std::ostream& out, const std::vector<SystemScore>& scores);

}  // namespace collabjudge

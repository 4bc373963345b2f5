#include "collabjudge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "collabjudge/text.hpp"

namespace collabjudge {

double bpref_judged(std::span<const std::uint8_t> judged_in_rank_order, std::size_t num_rel,
                    std::size_t num_nonrel) {
    if (num_rel == 0) throw std::invalid_argument("bpref: topic has no judged relevant documents");
    const double denom = static_cast<double>(std::min(num_rel, num_nonrel));
    double sum = 0.0;
    std::size_t nonrel_so_far = 0;
    for (auto rel : judged_in_rank_order) {
        if (rel) {
            if (nonrel_so_far > 0) {
                sum += 1.0 - static_cast<double>(std::min(nonrel_so_far, num_rel)) / denom;
            } else {
                sum += 1.0;
            }
        } else {
            ++nonrel_so_far;
        }
    }
    return sum / static_cast<double>(num_rel);
}

double bpref_topic(std::span<const std::string> ranking, const std::map<std::string, bool>& qrels_topic) {
    std::size_t num_rel = 0;
    for (const auto& [doc, rel] : qrels_topic) num_rel += rel ? 1 : 0;
    if (num_rel == 0) {
        throw std::invalid_argument("bpref: topic has no judged relevant documents; exclude it before scoring");
    }
    std::vector<std::uint8_t> judged;
    for (const auto& doc : ranking) {
        auto it = qrels_topic.find(doc);
        if (it != qrels_topic.end()) judged.push_back(it->second ? 1 : 0);
    }
    return bpref_judged(judged, num_rel, qrels_topic.size() - num_rel);
}

std::vector<SystemScore> score_systems(const std::vector<RunRanking>& runs, const QrelSet& qrels) {
    if (runs.empty()) throw std::invalid_argument("score_systems: no runs");

    // topic -> doc -> relevant, only for topics with R >= 1
    std::map<std::string, std::map<std::string, bool>> by_topic;
    for (const auto& [key, entry] : qrels.entries()) by_topic[key.topic][key.doc] = entry.relevant;
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (auto it = by_topic.begin(); it != by_topic.end();) {
        std::size_t rel = 0;
        for (const auto& [doc, r] : it->second) rel += r ? 1 : 0;
        if (rel == 0) {
            it = by_topic.erase(it);
        } else {
            counts[it->first] = {rel, it->second.size() - rel};
            ++it;
        }
    }
    if (by_topic.empty()) throw std::invalid_argument("score_systems: no topic has a judged relevant document");

    std::vector<SystemScore> out;
    out.reserve(runs.size());
    std::vector<std::uint8_t> judged;
    for (const auto& run : runs) {
        SystemScore score;
        score.system_id = run.system_id;
        double sum = 0.0;
        for (const auto& [topic, docs] : by_topic) {
            double value = 0.0;
            auto list = run.lists.find(topic);
            if (list != run.lists.end()) {
                judged.clear();
                for (const auto& d : list->second) {
                    auto j = docs.find(d.doc_id);
                    if (j != docs.end()) judged.push_back(j->second ? 1 : 0);
                }
                const auto [rel, nonrel] = counts.at(topic);
                value = bpref_judged(judged, rel, nonrel);
            }
            score.per_topic.emplace(topic, value);
            sum += value;
        }
        score.mean = sum / static_cast<double>(by_topic.size());
        out.push_back(std::move(score));
    }
    return out;
}

std::map<std::string, double> mean_scores(const std::vector<SystemScore>& scores) {
    std::map<std::string, double> out;
    for (const auto& s : scores) out[s.system_id] = s.mean;
    return out;
}

const char* to_string(TauVariant v) { return v == TauVariant::tau_a ? "tau_a" : "tau_b"; }

TauVariant tau_variant_from_string(const std::string& s) {
    if (s == "tau_a" || s == "a") return TauVariant::tau_a;
    if (s == "tau_b" || s == "b") return TauVariant::tau_b;
    throw std::invalid_argument("unknown tau variant '" + s + "' (expected tau_a or tau_b)");
}

namespace {

using Pair = std::pair<double, double>;

// Number of i < j with b_i > b_j; sorts v by b.
std::uint64_t count_inversions(std::vector<Pair>& v, std::vector<Pair>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j].second < v[i].second) {
            inv += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    return inv;
}

// Sum over runs of equal values (as defined by `same`) of t(t-1)/2.
template <typename Same>
std::uint64_t tied_pairs(const std::vector<Pair>& v, Same same) {
    std::uint64_t total = 0, run = 1;
    for (std::size_t i = 1; i <= v.size(); ++i) {
        if (i < v.size() && same(v[i - 1], v[i])) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

}  // namespace

double kendall_tau(const std::map<std::string, double>& scores_a, const std::map<std::string, double>& scores_b,
                   TauVariant variant) {
    if (scores_a.size() != scores_b.size()) throw std::invalid_argument("kendall_tau: key sets differ");
    if (scores_a.size() < 2) throw std::invalid_argument("kendall_tau: need at least 2 systems");
    std::vector<Pair> v;
    v.reserve(scores_a.size());
    for (auto ia = scores_a.begin(), ib = scores_b.begin(); ia != scores_a.end(); ++ia, ++ib) {
        if (ia->first != ib->first) throw std::invalid_argument("kendall_tau: key sets differ at '" + ia->first + "'");
        v.emplace_back(ia->second, ib->second);
    }
    const std::uint64_t n = v.size();
    const std::uint64_t n0 = n * (n - 1) / 2;

    std::sort(v.begin(), v.end());
    const std::uint64_t ties_a = tied_pairs(v, [](const Pair& x, const Pair& y) { return x.first == y.first; });
    const std::uint64_t ties_ab = tied_pairs(v, [](const Pair& x, const Pair& y) { return x == y; });
    std::vector<Pair> buf(v.size());
    const std::uint64_t discordant = count_inversions(v, buf, 0, v.size());
    const std::uint64_t ties_b = tied_pairs(v, [](const Pair& x, const Pair& y) { return x.second == y.second; });

    // C - D = n0 - ties_a - ties_b + ties_ab - 2 D
    const double numerator = static_cast<double>(n0) - static_cast<double>(ties_a) - static_cast<double>(ties_b) +
                             static_cast<double>(ties_ab) - 2.0 * static_cast<double>(discordant);
    if (variant == TauVariant::tau_a) return numerator / static_cast<double>(n0);
    const double denom = std::sqrt(static_cast<double>(n0 - ties_a) * static_cast<double>(n0 - ties_b));
    if (denom == 0.0) return 0.0;
    return numerator / denom;
}

double curve_auc(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw std::invalid_argument("curve_auc: need at least 2 points");
    constexpr double eps = 1e-12;
    if (std::abs(points.front().first) > eps || std::abs(points.back().first - 1.0) > eps) {
        throw std::invalid_argument("curve_auc: x must span [0, 1]");
    }
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double dx = points[i].first - points[i - 1].first;
        if (!(dx > 0.0)) throw std::invalid_argument("curve_auc: x must be strictly increasing");
        area += 0.5 * dx * (points[i].second + points[i - 1].second);
    }
    return area;
}

void finalize_curve(CorrelationCurve& curve) {
    std::vector<std::pair<double, double>> xy;
    xy.reserve(curve.points.size());
    for (const auto& p : curve.points) xy.emplace_back(p.budget, p.mean_tau);
    curve.auc = curve_auc(xy);
}

void write_topic_scores_csv(std::ostream& out, const std::vector<SystemScore>& scores) {
    out << "system_id,topic_id,bpref\n";
    for (const auto& s : scores) {
        for (const auto& [topic, value] : s.per_topic) {
            out << s.system_id << ',' << topic << ',' << text::format_double(value) << '\n';
        }
    }
}

void write_mean_scores_csv(std::ostream& out, const std::vector<SystemScore>& scores) {
    out << "system_id,mean_bpref\n";
    for (const auto& s : scores) out << s.system_id << ',' << text::format_double(s.mean) << '\n';
}

}  // namespace collabjudge

#include "collabjudge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "collabjudge/text.hpp"

namespace collabjudge {

namespace {

// Calls fn(key, crowd_relevant, gold_relevant) for each shared pair in key order.
template <typename Fn>
std::size_t for_each_shared(const AggregationResult& crowd, const QrelSet& gold, Fn&& fn) {
    std::size_t n = 0;
    for (const auto& [key, est] : crowd.items) {
        const auto* g = gold.find(key);
        if (!g) continue;
        fn(key, est.relevant, g->relevant);
        ++n;
    }
    return n;
}

}  // namespace

ConfusionCells confusion_matrix(const AggregationResult& crowd, const QrelSet& gold) {
    ConfusionCells cells;
    auto n = for_each_shared(crowd, gold, [&](const PairKey&, bool c, bool g) {
        if (g) (c ? cells.rr : cells.rn)++;
        else (c ? cells.nr : cells.nn)++;
    });
    if (n == 0) throw ConsistencyError("confusion_matrix: crowd labels and gold share no (topic, doc) pair");
    return cells;
}

CategoryAgreement agreement_by_category(const ConfusionCells& cells) {
    if (cells.rr + cells.rn == 0) throw ConsistencyError("agreement_by_category: no gold-relevant pairs");
    if (cells.nr + cells.nn == 0) throw ConsistencyError("agreement_by_category: no gold-nonrelevant pairs");
    return CategoryAgreement{
        static_cast<double>(cells.rr) / static_cast<double>(cells.rr + cells.rn),
        static_cast<double>(cells.nn) / static_cast<double>(cells.nr + cells.nn),
    };
}

CategoryAgreement agreement_by_category(const AggregationResult& crowd, const QrelSet& gold) {
    return agreement_by_category(confusion_matrix(crowd, gold));
}

const char* to_string(AvgRankMode m) {
    return m == AvgRankMode::absent_as_cap ? "absent_as_cap" : "retrieving_only";
}

AvgRankMode avg_rank_mode_from_string(const std::string& s) {
    if (s == "absent_as_cap") return AvgRankMode::absent_as_cap;
    if (s == "retrieving_only") return AvgRankMode::retrieving_only;
    throw std::invalid_argument("unknown average-rank mode '" + s + "' (expected absent_as_cap or retrieving_only)");
}

std::map<PairKey, double> average_ranks(const std::vector<RunRanking>& runs, const PairSet& judged, int cap,
                                        AvgRankMode mode) {
    if (runs.empty()) throw std::invalid_argument("average_ranks: no runs");
    if (cap < 1) throw std::invalid_argument("average_ranks: cap must be positive");

    struct Acc {
        double sum = 0.0;
        std::size_t hits = 0;
    };
    std::map<PairKey, Acc> acc;
    for (const auto& key : judged) acc.emplace_hint(acc.end(), key, Acc{});
    PairKey probe;
    for (const auto& run : runs) {
        for (const auto& [topic, docs] : run.lists) {
            probe.topic = topic;
            for (const auto& d : docs) {
                probe.doc = d.doc_id;
                auto it = acc.find(probe);
                if (it == acc.end()) continue;
                it->second.sum += static_cast<double>(std::min(d.rank, cap));
                ++it->second.hits;
            }
        }
    }

    const double n_runs = static_cast<double>(runs.size());
    std::map<PairKey, double> out;
    for (const auto& [key, a] : acc) {
        double avg = 0.0;
        if (mode == AvgRankMode::absent_as_cap) {
            const double missing = n_runs - static_cast<double>(a.hits);
            avg = (a.sum + missing * cap) / n_runs;
        } else {
            avg = a.hits == 0 ? static_cast<double>(cap) : a.sum / static_cast<double>(a.hits);
        }
        out.emplace_hint(out.end(), key, avg);
    }
    return out;
}

std::vector<RankBin> rank_bin_agreement(const std::map<PairKey, double>& avg_ranks, const AggregationResult& crowd,
                                        const QrelSet& gold) {
    constexpr int kBins = 10;
    constexpr int kWidth = 100;
    std::vector<RankBin> bins(kBins);
    for (int b = 0; b < kBins; ++b) {
        bins[b].lo = b * kWidth + 1;
        bins[b].hi = (b + 1) * kWidth;
    }
    std::vector<std::size_t> correct(kBins, 0);
    for_each_shared(crowd, gold, [&](const PairKey& key, bool c, bool g) {
        auto it = avg_ranks.find(key);
        if (it == avg_ranks.end()) {
            throw ConsistencyError("rank_bin_agreement: no average rank for (" + key.topic + ", " + key.doc + ")");
        }
        int b = static_cast<int>(std::ceil(it->second / kWidth));
        b = std::clamp(b, 1, kBins) - 1;
        auto& bin = bins[b];
        ++bin.n;
        if (c == g) ++correct[b];
        if (c && g) ++bin.tp;
        if (!c && !g) ++bin.tn;
    });
    for (int b = 0; b < kBins; ++b) {
        auto& bin = bins[b];
        if (bin.n == 0) {
            bin.accuracy = bin.tp_ratio = bin.tn_ratio = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double n = static_cast<double>(bin.n);
        bin.accuracy = static_cast<double>(correct[b]) / n;
        bin.tp_ratio = static_cast<double>(bin.tp) / n;
        bin.tn_ratio = static_cast<double>(bin.tn) / n;
    }
    return bins;
}

TopicAgreement topic_agreement(const AggregationResult& crowd, const QrelSet& gold) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // (correct, total)
    for_each_shared(crowd, gold, [&](const PairKey& key, bool c, bool g) {
        auto& t = counts[key.topic];
        t.first += c == g ? 1 : 0;
        ++t.second;
    });
    TopicAgreement out;
    if (counts.empty()) return out;
    double sum = 0.0;
    for (const auto& [topic, c] : counts) {
        double acc = static_cast<double>(c.first) / static_cast<double>(c.second);
        out.per_topic.emplace(topic, acc);
        sum += acc;
    }
    const double n = static_cast<double>(out.per_topic.size());
    out.mean = sum / n;
    double ss = 0.0;
    for (const auto& [topic, acc] : out.per_topic) ss += (acc - out.mean) * (acc - out.mean);
    out.std = std::sqrt(ss / n);
    return out;
}

void write_confusion_csv(std::ostream& out, const ConfusionCells& cells) {
    using text::format_double;
    const std::size_t crowd_r = cells.rr + cells.nr, crowd_n = cells.rn + cells.nn;
    out << "gold\\crowd,crowd_relevant,crowd_nonrelevant,total,crowd_relevant_frac,crowd_nonrelevant_frac,total_frac\n";
    auto row = [&](const char* name, std::size_t r, std::size_t n) {
        out << name << ',' << r << ',' << n << ',' << r + n << ',' << format_double(cells.fraction(r)) << ','
            << format_double(cells.fraction(n)) << ',' << format_double(cells.fraction(r + n)) << '\n';
    };
    row("gold_relevant", cells.rr, cells.rn);
    row("gold_nonrelevant", cells.nr, cells.nn);
    row("total", crowd_r, crowd_n);
    out << "accuracy," << format_double(cells.accuracy()) << ",,,,,\n";
}

void write_category_csv(std::ostream& out, const ConfusionCells& cells) {
    auto cat = agreement_by_category(cells);
    out << "agree_given_rel,agree_given_nonrel,n_rel,n_nonrel\n";
    out << text::format_double(cat.agree_given_rel) << ',' << text::format_double(cat.agree_given_nonrel) << ','
        << cells.rr + cells.rn << ',' << cells.nr + cells.nn << '\n';
}

void write_rank_bins_csv(std::ostream& out, const std::vector<RankBin>& bins) {
    out << "bin_lo,bin_hi,n,accuracy,tp_ratio,tn_ratio\n";
    for (const auto& b : bins) {
        out << b.lo << ',' << b.hi << ',' << b.n << ',' << text::format_double(b.accuracy) << ','
            << text::format_double(b.tp_ratio) << ',' << text::format_double(b.tn_ratio) << '\n';
    }
}

void write_topic_agreement_csv(std::ostream& out, const TopicAgreement& agreement) {
    out << "topic_id,accuracy\n";
    for (const auto& [topic, acc] : agreement.per_topic) out << topic << ',' << text::format_double(acc) << '\n';
}

}  // namespace collabjudge

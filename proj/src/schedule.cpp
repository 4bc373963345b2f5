#include "collabjudge/schedule.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "collabjudge/random.hpp"
#include "collabjudge/text.hpp"

namespace collabjudge {

const char* to_string(ScheduleMethod m) {
    switch (m) {
        case ScheduleMethod::drbo: return "drbo";
        case ScheduleMethod::oracle_tbs: return "oracle_tbs";
        case ScheduleMethod::random: return "random";
    }
    return "unknown";
}

ScheduleMethod schedule_method_from_string(const std::string& s) {
    if (s == "drbo") return ScheduleMethod::drbo;
    if (s == "oracle_tbs" || s == "oracle") return ScheduleMethod::oracle_tbs;
    if (s == "random") return ScheduleMethod::random;
    throw std::invalid_argument("unknown schedule method '" + s + "' (expected drbo, oracle_tbs or random)");
}

const char* to_string(OracleBudgetMode m) { return m == OracleBudgetMode::global ? "global" : "per_topic"; }

OracleBudgetMode oracle_budget_mode_from_string(const std::string& s) {
    if (s == "global") return OracleBudgetMode::global;
    if (s == "per_topic") return OracleBudgetMode::per_topic;
    throw std::invalid_argument("unknown oracle budget mode '" + s + "' (expected global or per_topic)");
}

namespace {

void check_ratio(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("budget ratio must lie in [0, 1]");
}

SchedulePlan make_plan(ScheduleMethod method, double rho, std::uint64_t seed, const PairSet& judged,
                       PairSet trusted) {
    SchedulePlan plan;
    plan.method = method;
    plan.budget_ratio = rho;
    plan.seed = seed;
    std::set_difference(judged.begin(), judged.end(), trusted.begin(), trusted.end(),
                        std::inserter(plan.crowd, plan.crowd.end()));
    plan.trusted = std::move(trusted);
    return plan;
}

}  // namespace

std::size_t budget_count(double budget_ratio, std::size_t n) {
    check_ratio(budget_ratio);
    auto k = text::round_half_up(budget_ratio * static_cast<double>(n));
    return std::min(n, static_cast<std::size_t>(std::max<std::int64_t>(k, 0)));
}

std::map<std::string, std::vector<std::string>> docs_by_topic(const PairSet& pairs) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& p : pairs) out[p.topic].push_back(p.doc);
    return out;
}

double statap_rank_weight(int rank, int depth) {
    if (rank < 1 || rank > depth) return 0.0;
    double tail = 0.0;
    for (int k = depth; k > rank; --k) tail += 1.0 / static_cast<double>(k);
    return 1.0 + tail;
}

std::vector<DocWeight> statap_weights(const std::vector<RunRanking>& runs, const PairSet& judged, int depth) {
    if (depth < 1) throw std::invalid_argument("statap_weights: depth must be positive");
    // Harmonic tail table: tail[r] = sum_{k=r+1}^{depth} 1/k, summed from the
    // small end so every rank sees the same rounding.
    std::vector<double> tail(static_cast<std::size_t>(depth) + 1, 0.0);
    for (int r = depth - 1; r >= 0; --r) tail[r] = tail[r + 1] + 1.0 / static_cast<double>(r + 1);

    std::map<PairKey, double> acc;
    for (const auto& key : judged) acc.emplace_hint(acc.end(), key, 0.0);
    PairKey probe;
    for (const auto& run : runs) {
        for (const auto& [topic, docs] : run.lists) {
            probe.topic = topic;
            for (const auto& d : docs) {
                if (d.rank < 1 || d.rank > depth) continue;
                probe.doc = d.doc_id;
                auto it = acc.find(probe);
                if (it != acc.end()) it->second += 1.0 + tail[d.rank];
            }
        }
    }
    std::vector<DocWeight> out;
    out.reserve(acc.size());
    for (const auto& [key, w] : acc) out.push_back(DocWeight{key.topic, key.doc, w});
    return out;
}

SchedulePlan drbo_plan(const std::vector<DocWeight>& weights, const PairSet& judged, double budget_ratio) {
    check_ratio(budget_ratio);
    std::map<PairKey, double> weight_of;
    for (const auto& w : weights) weight_of[PairKey{w.topic_id, w.doc_id}] = w.weight;

    PairSet trusted;
    for (auto& [topic, docs] : docs_by_topic(judged)) {
        std::vector<std::pair<double, const std::string*>> ranked;
        ranked.reserve(docs.size());
        for (const auto& doc : docs) {
            auto it = weight_of.find(PairKey{topic, doc});
            ranked.emplace_back(it == weight_of.end() ? 0.0 : it->second, &doc);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return *a.second < *b.second;
        });
        const std::size_t k = budget_count(budget_ratio, docs.size());
        for (std::size_t i = 0; i < k; ++i) trusted.insert(PairKey{topic, *ranked[i].second});
    }
    return make_plan(ScheduleMethod::drbo, budget_ratio, 0, judged, std::move(trusted));
}

SchedulePlan oracle_tbs_plan(const std::map<std::string, double>& topic_agreement, const PairSet& judged,
                             double budget_ratio, std::uint64_t seed, OracleBudgetMode mode) {
    check_ratio(budget_ratio);
    auto by_topic = docs_by_topic(judged);

    std::vector<std::pair<double, std::string>> order;
    std::size_t budget = 0;
    for (const auto& [topic, docs] : by_topic) {
        auto it = topic_agreement.find(topic);
        if (it == topic_agreement.end()) {
            throw ConsistencyError("oracle_tbs_plan: no agreement value for topic '" + topic + "'");
        }
        order.emplace_back(it->second, topic);
        if (mode == OracleBudgetMode::per_topic) budget += budget_count(budget_ratio, docs.size());
    }
    if (mode == OracleBudgetMode::global) budget = budget_count(budget_ratio, judged.size());
    std::sort(order.begin(), order.end());

    Rng rng(seed);
    PairSet trusted;
    for (const auto& [agreement, topic] : order) {
        if (budget == 0) break;
        auto docs = by_topic.at(topic);
        rng.shuffle(docs);
        for (const auto& doc : docs) {
            if (budget == 0) break;
            trusted.insert(PairKey{topic, doc});
            --budget;
        }
    }
    return make_plan(ScheduleMethod::oracle_tbs, budget_ratio, seed, judged, std::move(trusted));
}

SchedulePlan random_plan(const PairSet& judged, double budget_ratio, std::uint64_t seed) {
    check_ratio(budget_ratio);
    Rng rng(seed);
    PairSet trusted;
    for (auto& [topic, docs] : docs_by_topic(judged)) {
        rng.shuffle(docs);
        const std::size_t k = budget_count(budget_ratio, docs.size());
        for (std::size_t i = 0; i < k; ++i) trusted.insert(PairKey{topic, docs[i]});
    }
    return make_plan(ScheduleMethod::random, budget_ratio, seed, judged, std::move(trusted));
}

QrelSet build_hybrid_qrels(const SchedulePlan& plan, const QrelSet& nist, const AggregationResult& crowd_labels) {
    QrelSet::Map entries;
    for (const auto& key : plan.trusted) {
        const auto* e = nist.find(key);
        if (!e) throw ConsistencyError("build_hybrid_qrels: trusted pair (" + key.topic + ", " + key.doc +
                                       ") has no NIST judgment");
        entries.emplace_hint(entries.end(), key, QrelEntry{e->relevant, Provenance::nist});
    }
    const Provenance crowd_prov = crowd_labels.provenance();
    for (const auto& key : plan.crowd) {
        const auto* c = crowd_labels.find(key);
        if (!c) throw ConsistencyError("build_hybrid_qrels: crowd pair (" + key.topic + ", " + key.doc +
                                       ") has no aggregated crowd label");
        entries.emplace(key, QrelEntry{c->relevant, crowd_prov});
    }
    return QrelSet(std::move(entries));
}

void write_plan_csv(std::ostream& out, const SchedulePlan& plan) {
    out << "topic_id,doc_id,assignee\n";
    auto t = plan.trusted.begin();
    auto c = plan.crowd.begin();
    while (t != plan.trusted.end() || c != plan.crowd.end()) {
        if (c == plan.crowd.end() || (t != plan.trusted.end() && *t < *c)) {
            out << t->topic << ',' << t->doc << ",trusted\n";
            ++t;
        } else {
            out << c->topic << ',' << c->doc << ",crowd\n";
            ++c;
        }
    }
}

}  // namespace collabjudge

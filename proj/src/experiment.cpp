#include "collabjudge/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "collabjudge/random.hpp"
#include "collabjudge/text.hpp"

namespace collabjudge {

namespace {

double snap(double x) { return std::round(x * 1e9) / 1e9; }

}  // namespace

std::vector<double> budget_grid(double step) {
    if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("budget step must lie in (0, 1]");
    const auto n = text::round_half_up(1.0 / step);
    std::vector<double> out;
    for (std::int64_t i = 0; i < n; ++i) {
        double b = snap(static_cast<double>(i) * step);
        if (b >= 1.0) break;
        out.push_back(b);
    }
    out.push_back(1.0);
    return out;
}

std::vector<double> parse_budgets(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        auto parts = text::split(spec, ':');
        if (parts.size() != 3) throw std::invalid_argument("budget range must be start:stop:step");
        auto lo = text::parse_double(text::trim(parts[0]));
        auto hi = text::parse_double(text::trim(parts[1]));
        auto step = text::parse_double(text::trim(parts[2]));
        if (!lo || !hi || !step || *step <= 0.0 || *hi < *lo) {
            throw std::invalid_argument("malformed budget range '" + spec + "'");
        }
        const auto n = text::round_half_up((*hi - *lo) / *step);
        for (std::int64_t i = 0; i <= n; ++i) out.push_back(snap(*lo + static_cast<double>(i) * *step));
        if (out.back() > *hi) out.back() = *hi;
    } else {
        for (auto part : text::split(spec, ',')) {
            auto v = text::parse_double(text::trim(part));
            if (!v) throw std::invalid_argument("malformed budget '" + std::string(part) + "'");
            out.push_back(*v);
        }
    }
    for (double b : out) {
        if (b < 0.0 || b > 1.0) throw std::invalid_argument("budget ratios must lie in [0, 1]: '" + spec + "'");
    }
    return out;
}

void SweepConfig::validate() const {
    if (budgets.size() < 2) throw std::invalid_argument("sweep needs at least two budgets");
    if (budgets.front() != 0.0 || budgets.back() != 1.0) {
        throw std::invalid_argument("sweep budgets must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < budgets.size(); ++i) {
        if (!(budgets[i] > budgets[i - 1])) throw std::invalid_argument("sweep budgets must be strictly increasing");
    }
    if (reps_random < 1 || reps_oracle < 1) throw std::invalid_argument("repetition counts must be >= 1");
    if (statap_depth < 1) throw std::invalid_argument("statap depth must be positive");
}

std::map<std::string, double> ground_truth_ranking(const std::vector<RunRanking>& runs, const QrelSet& nist) {
    return mean_scores(score_systems(runs, nist));
}

std::map<std::string, double> per_topic_oracle_agreement(const AggregationResult& crowd, const QrelSet& nist) {
    auto agreement = topic_agreement(crowd, nist);
    if (agreement.per_topic.empty()) {
        throw ConsistencyError("oracle agreement: crowd labels and NIST judgments share no pair");
    }
    return agreement.per_topic;
}

SweepContext prepare_sweep(const std::vector<RunRanking>& runs, const QrelSet& nist,
                           const std::vector<JudgmentRecord>& crowd_judgments, const SweepConfig& cfg) {
    cfg.validate();
    if (runs.empty()) throw std::invalid_argument("sweep: no runs");

    SweepContext ctx;
    ctx.crowd = aggregate(cfg.aggregator, crowd_judgments, cfg.ds);

    QrelSet::Map scope;
    for (const auto& [key, est] : ctx.crowd.items) {
        const auto* e = nist.find(key);
        if (!e) {
            ++ctx.crowd_pairs_outside_nist;
            continue;
        }
        scope.emplace_hint(scope.end(), key, *e);
        ctx.pairs.push_back(key);
        ctx.nist_labels.push_back(e->relevant ? 1 : 0);
        ctx.crowd_labels.push_back(est.relevant ? 1 : 0);
    }
    if (ctx.pairs.empty()) throw ConsistencyError("sweep: crowd labels and NIST judgments share no pair");
    ctx.nist_pairs_without_crowd = nist.size() - ctx.pairs.size();
    ctx.nist_scope = QrelSet(std::move(scope));
    ctx.judged = PairSet(ctx.pairs.begin(), ctx.pairs.end());

    std::map<std::string, std::uint32_t> topic_index;
    std::map<std::string, std::map<std::string, std::uint32_t>> pair_index;
    for (std::uint32_t i = 0; i < ctx.pairs.size(); ++i) {
        const auto& key = ctx.pairs[i];
        auto [it, inserted] = topic_index.emplace(key.topic, static_cast<std::uint32_t>(ctx.topics.size()));
        if (inserted) ctx.topics.push_back(key.topic);
        ctx.topic_of_pair.push_back(it->second);
        pair_index[key.topic][key.doc] = i;
    }

    int depth = cfg.statap_depth;
    for (const auto& run : runs) {
        ctx.system_ids.push_back(run.system_id);
        std::vector<std::vector<std::uint32_t>> per_topic(ctx.topics.size());
        for (const auto& [topic, docs] : run.lists) {
            auto t = topic_index.find(topic);
            if (t == topic_index.end()) continue;
            const auto& index = pair_index.at(topic);
            for (const auto& d : docs) {
                depth = std::max(depth, d.rank);
                auto p = index.find(d.doc_id);
                if (p != index.end()) per_topic[t->second].push_back(p->second);
            }
        }
        ctx.judged_ranked.push_back(std::move(per_topic));
    }

    ctx.weights = statap_weights(runs, ctx.judged, depth);
    ctx.topic_agreement = per_topic_oracle_agreement(ctx.crowd, ctx.nist_scope);
    ctx.ground_truth = score_labels(ctx, ctx.nist_labels);
    return ctx;
}

std::map<std::string, double> score_labels(const SweepContext& ctx, const std::vector<std::uint8_t>& labels) {
    if (labels.size() != ctx.pairs.size()) throw std::invalid_argument("score_labels: label vector size mismatch");
    const std::size_t n_topics = ctx.topics.size();
    std::vector<std::size_t> rel(n_topics, 0), total(n_topics, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        rel[ctx.topic_of_pair[i]] += labels[i];
        ++total[ctx.topic_of_pair[i]];
    }
    std::size_t scorable = 0;
    for (std::size_t t = 0; t < n_topics; ++t) scorable += rel[t] > 0 ? 1 : 0;
    if (scorable == 0) throw std::invalid_argument("score_systems: no topic has a judged relevant document");

    std::map<std::string, double> out;
    std::vector<std::uint8_t> judged;
    for (std::size_t s = 0; s < ctx.system_ids.size(); ++s) {
        double sum = 0.0;
        for (std::size_t t = 0; t < n_topics; ++t) {
            if (rel[t] == 0) continue;
            judged.clear();
            for (auto p : ctx.judged_ranked[s][t]) judged.push_back(labels[p]);
            sum += bpref_judged(judged, rel[t], total[t] - rel[t]);
        }
        out[ctx.system_ids[s]] = sum / static_cast<double>(scorable);
    }
    return out;
}

std::vector<std::uint8_t> hybrid_labels(const SweepContext& ctx, const SchedulePlan& plan) {
    std::vector<std::uint8_t> labels(ctx.pairs.size());
    auto trusted = plan.trusted.begin();
    for (std::size_t i = 0; i < ctx.pairs.size(); ++i) {
        while (trusted != plan.trusted.end() && *trusted < ctx.pairs[i]) ++trusted;
        bool is_trusted = trusted != plan.trusted.end() && *trusted == ctx.pairs[i];
        labels[i] = is_trusted ? ctx.nist_labels[i] : ctx.crowd_labels[i];
    }
    return labels;
}

SchedulePlan plan_for_budget(ScheduleMethod method, const SweepContext& ctx, double budget, std::uint64_t seed,
                             OracleBudgetMode oracle_mode) {
    switch (method) {
        case ScheduleMethod::drbo: return drbo_plan(ctx.weights, ctx.judged, budget);
        case ScheduleMethod::oracle_tbs:
            return oracle_tbs_plan(ctx.topic_agreement, ctx.judged, budget, seed, oracle_mode);
        case ScheduleMethod::random: return random_plan(ctx.judged, budget, seed);
    }
    throw std::logic_error("unknown schedule method");
}

std::uint64_t repetition_seed(std::uint64_t master_seed, ScheduleMethod method, double budget, int rep) {
    const auto budget_key = static_cast<std::uint64_t>(std::llround(budget * 1e9));
    return mix_seed({master_seed, fnv1a(to_string(method)), budget_key, static_cast<std::uint64_t>(rep)});
}

int repetitions(ScheduleMethod method, const SweepConfig& cfg) {
    switch (method) {
        case ScheduleMethod::drbo: return 1;
        case ScheduleMethod::oracle_tbs: return cfg.reps_oracle;
        case ScheduleMethod::random: return cfg.reps_random;
    }
    return 1;
}

SweepResult sweep(ScheduleMethod method, const SweepContext& ctx, const SweepConfig& cfg) {
    cfg.validate();
    const int reps = repetitions(method, cfg);
    const std::size_t n_tasks = cfg.budgets.size() * static_cast<std::size_t>(reps);

    SweepResult result;
    result.method = method;
    result.raw.resize(n_tasks);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= n_tasks) return;
            const double budget = cfg.budgets[task / reps];
            const int rep = static_cast<int>(task % reps);
            try {
                const auto seed = repetition_seed(cfg.master_seed, method, budget, rep);
                const auto plan = plan_for_budget(method, ctx, budget, seed, cfg.oracle_budget_mode);
                const auto scores = score_labels(ctx, hybrid_labels(ctx, plan));
                result.raw[task] = RawTau{budget, rep, kendall_tau(ctx.ground_truth, scores, cfg.tau_variant)};
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    try {
                        throw std::runtime_error(std::string("sweep ") + to_string(method) + " budget " +
                                                 text::format_double(budget) + " rep " + std::to_string(rep) +
                                                 ": " + e.what());
                    } catch (...) {
                        failure = std::current_exception();
                    }
                }
                next.store(n_tasks);
                return;
            }
        }
    };

    std::size_t n_threads = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, n_tasks);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t b = 0; b < cfg.budgets.size(); ++b) {
        double sum = 0.0;
        for (int r = 0; r < reps; ++r) sum += result.raw[b * reps + r].tau;
        const double mean = sum / reps;
        double ss = 0.0;
        for (int r = 0; r < reps; ++r) {
            const double d = result.raw[b * reps + r].tau - mean;
            ss += d * d;
        }
        result.curve.points.push_back(CurvePoint{cfg.budgets[b], mean, std::sqrt(ss / reps), reps});
    }
    finalize_curve(result.curve);
    return result;
}

SweepResult sweep(ScheduleMethod method, const std::vector<RunRanking>& runs, const QrelSet& nist,
                  const std::vector<JudgmentRecord>& crowd_judgments, const SweepConfig& cfg) {
    return sweep(method, prepare_sweep(runs, nist, crowd_judgments, cfg), cfg);
}

std::optional<double> first_budget_reaching(const CorrelationCurve& curve, double threshold) {
    for (const auto& p : curve.points) {
        if (p.mean_tau >= threshold) return p.budget;
    }
    return std::nullopt;
}

void write_sweep_raw_csv(std::ostream& out, const std::vector<SweepResult>& results) {
    out << "method,budget,rep,tau\n";
    for (const auto& r : results) {
        for (const auto& t : r.raw) {
            out << to_string(r.method) << ',' << text::format_double(t.budget) << ',' << t.rep << ','
                << text::format_double(t.tau) << '\n';
        }
    }
}

void write_sweep_agg_csv(std::ostream& out, const std::vector<SweepResult>& results) {
    out << "method,budget,mean_tau,std_tau,n_reps\n";
    for (const auto& r : results) {
        for (const auto& p : r.curve.points) {
            out << to_string(r.method) << ',' << text::format_double(p.budget) << ','
                << text::format_double(p.mean_tau) << ',' << text::format_double(p.std_tau) << ',' << p.n_reps
                << '\n';
        }
    }
}

void SynthConfig::validate() const {
    if (n_topics < 1 || docs_per_topic < 1 || n_systems < 1 || n_workers < 1 || labels_per_doc < 1) {
        throw std::invalid_argument("synth: counts must be positive");
    }
    if (labels_per_doc > n_workers) throw std::invalid_argument("synth: labels_per_doc exceeds n_workers");
    auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!is_prob(prior_relevant)) throw std::invalid_argument("synth: prior_relevant must lie in [0, 1]");
    if (!is_prob(topic_difficulty_spread)) throw std::invalid_argument("synth: difficulty spread must lie in [0, 1]");
    if (worker_reliability.size() != 1 && worker_reliability.size() != static_cast<std::size_t>(n_workers)) {
        throw std::invalid_argument("synth: worker_reliability needs 1 or n_workers entries");
    }
    for (auto [se, sp] : worker_reliability) {
        if (!is_prob(se) || !is_prob(sp)) throw std::invalid_argument("synth: worker rates must lie in [0, 1]");
    }
}

SynthData synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    SynthData data;
    Rng rng(cfg.seed);

    auto pad = [](int value, int width) {
        std::string s = std::to_string(value);
        return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
    };

    for (int w = 0; w < cfg.n_workers; ++w) {
        data.worker_ids.push_back("w" + pad(w + 1, 3));
        data.worker_rates.push_back(cfg.worker_reliability.size() == 1 ? cfg.worker_reliability[0]
                                                                       : cfg.worker_reliability[w]);
    }

    std::vector<std::string> topics;
    for (int t = 0; t < cfg.n_topics; ++t) {
        topics.push_back(pad(t + 1, 3));
        data.topic_flip[topics.back()] = rng.uniform() * cfg.topic_difficulty_spread;
    }

    std::map<std::string, std::vector<std::pair<std::string, bool>>> docs;
    for (const auto& topic : topics) {
        for (int d = 0; d < cfg.docs_per_topic; ++d) {
            std::string doc = "d" + topic + "-" + pad(d + 1, 4);
            bool rel = rng.bernoulli(cfg.prior_relevant);
            data.truth[PairKey{topic, doc}] = rel;
            data.nist.set(PairKey{topic, doc}, rel, Provenance::nist);
            docs[topic].emplace_back(doc, rel);
        }
    }

    // Systems differ in how far they separate relevant from nonrelevant scores.
    for (int s = 0; s < cfg.n_systems; ++s) {
        RunRanking run;
        run.system_id = "sys" + pad(s + 1, 3);
        const double skill = 0.2 + 1.8 * rng.uniform();
        for (const auto& topic : topics) {
            auto& list = run.lists[topic];
            for (const auto& [doc, rel] : docs[topic]) {
                list.push_back(RankedDoc{doc, 0, (rel ? skill : 0.0) + rng.normal()});
            }
            std::sort(list.begin(), list.end(), [](const RankedDoc& a, const RankedDoc& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.doc_id < b.doc_id;
            });
            for (std::size_t i = 0; i < list.size(); ++i) list[i].rank = static_cast<int>(i + 1);
        }
        data.runs.push_back(std::move(run));
    }

    std::vector<int> pool(cfg.n_workers);
    for (const auto& topic : topics) {
        const double flip = data.topic_flip[topic];
        for (const auto& [doc, rel] : docs[topic]) {
            for (int w = 0; w < cfg.n_workers; ++w) pool[w] = w;
            // Partial Fisher-Yates: the first labels_per_doc slots are a uniform sample.
            for (int k = 0; k < cfg.labels_per_doc; ++k) {
                auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_workers - k)));
                std::swap(pool[k], pool[j]);
                const int w = pool[k];
                const auto [se, sp] = data.worker_rates[w];
                bool vote = rel ? rng.bernoulli(se) : !rng.bernoulli(sp);
                if (rng.bernoulli(flip)) vote = !vote;
                data.crowd.push_back(JudgmentRecord{topic, doc, data.worker_ids[w], vote ? 1 : 0, Source::crowd});
            }
        }
    }
    return data;
}

}  // namespace collabjudge

#include "collabjudge/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "collabjudge/text.hpp"

namespace collabjudge {

const char* to_string(Aggregator a) { return a == Aggregator::mv ? "mv" : "ds"; }

Aggregator aggregator_from_string(const std::string& s) {
    if (s == "mv") return Aggregator::mv;
    if (s == "ds") return Aggregator::ds;
    throw std::invalid_argument("unknown aggregator '" + s + "' (expected mv or ds)");
}

namespace {

// Judgments re-indexed by dense item and worker ids.
struct LabelMatrix {
    std::vector<PairKey> items;             // sorted
    std::vector<std::string> workers;       // sorted
    struct Label {
        std::size_t item;
        std::size_t worker;
        bool relevant;
    };
    std::vector<Label> labels;
    std::vector<std::vector<std::size_t>> by_item;    // indices into labels
    std::vector<std::vector<std::size_t>> by_worker;  // indices into labels
};

LabelMatrix index_labels(const std::vector<JudgmentRecord>& judgments, int threshold) {
    LabelMatrix m;
    std::map<PairKey, std::size_t> item_ids;
    std::map<std::string, std::size_t> worker_ids;
    for (const auto& j : judgments) {
        item_ids.emplace(PairKey{j.topic_id, j.doc_id}, 0);
        worker_ids.emplace(j.worker_id, 0);
    }
    for (auto& [key, id] : item_ids) {
        id = m.items.size();
        m.items.push_back(key);
    }
    for (auto& [w, id] : worker_ids) {
        id = m.workers.size();
        m.workers.push_back(w);
    }
    m.by_item.resize(m.items.size());
    m.by_worker.resize(m.workers.size());
    m.labels.reserve(judgments.size());
    for (const auto& j : judgments) {
        std::size_t item = item_ids.at(PairKey{j.topic_id, j.doc_id});
        std::size_t worker = worker_ids.at(j.worker_id);
        m.by_item[item].push_back(m.labels.size());
        m.by_worker[worker].push_back(m.labels.size());
        m.labels.push_back({item, worker, binarize(j.grade, threshold)});
    }
    return m;
}

std::vector<double> vote_fractions(const LabelMatrix& m) {
    std::vector<double> frac(m.items.size(), 0.0);
    for (std::size_t i = 0; i < m.items.size(); ++i) {
        std::size_t rel = 0;
        for (auto l : m.by_item[i]) rel += m.labels[l].relevant ? 1 : 0;
        frac[i] = static_cast<double>(rel) / static_cast<double>(m.by_item[i].size());
    }
    return frac;
}

double log_sum_exp(double a, double b) {
    double hi = std::max(a, b);
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

}  // namespace

AggregationResult majority_vote(const std::vector<JudgmentRecord>& judgments, int binarize_threshold) {
    AggregationResult result;
    result.method = Aggregator::mv;
    if (judgments.empty()) return result;
    auto m = index_labels(judgments, binarize_threshold);
    auto frac = vote_fractions(m);
    std::size_t n_rel = 0;
    for (std::size_t i = 0; i < m.items.size(); ++i) {
        // rel > nonrel  <=>  fraction > 1/2; counts avoid any rounding doubt.
        std::size_t rel = 0;
        for (auto l : m.by_item[i]) rel += m.labels[l].relevant ? 1 : 0;
        bool relevant = 2 * rel > m.by_item[i].size();
        n_rel += relevant ? 1 : 0;
        result.items.emplace(m.items[i], ItemEstimate{relevant, frac[i]});
    }
    double total = static_cast<double>(m.items.size());
    result.prior = std::clamp(static_cast<double>(n_rel) / total, 0.5 / total, 1.0 - 0.5 / total);
    return result;
}

AggregationResult dawid_skene(const std::vector<JudgmentRecord>& judgments, const DawidSkeneConfig& config) {
    if (config.smoothing <= 0.0) throw std::invalid_argument("dawid_skene: smoothing must be > 0");
    if (config.max_iters < 1) throw std::invalid_argument("dawid_skene: max_iters must be >= 1");

    AggregationResult result;
    result.method = Aggregator::ds;
    result.converged = false;
    if (judgments.empty()) {
        result.converged = true;
        return result;
    }

    const auto m = index_labels(judgments, config.binarize_threshold);
    const std::size_t n_items = m.items.size();
    const std::size_t n_workers = m.workers.size();
    const double s = config.smoothing;

    const std::vector<double> mv_frac = vote_fractions(m);
    std::vector<double> mu = mv_frac;
    std::vector<double> sens(n_workers), spec(n_workers);
    double prior = 0.5;

    auto m_step = [&] {
        double mu_sum = 0.0;
        for (double v : mu) mu_sum += v;
        prior = (mu_sum + s) / (static_cast<double>(n_items) + 2.0 * s);
        for (std::size_t w = 0; w < n_workers; ++w) {
            double rel_mass = 0.0, rel_hit = 0.0, non_mass = 0.0, non_hit = 0.0;
            for (auto l : m.by_worker[w]) {
                const auto& lab = m.labels[l];
                double p = mu[lab.item];
                rel_mass += p;
                non_mass += 1.0 - p;
                if (lab.relevant) rel_hit += p;
                else non_hit += 1.0 - p;
            }
            sens[w] = (rel_hit + s) / (rel_mass + 2.0 * s);
            spec[w] = (non_hit + s) / (non_mass + 2.0 * s);
        }
    };

    // Returns the data log-likelihood under the current parameters and
    // writes the new posteriors into `next`.
    auto e_step = [&](std::vector<double>& next) {
        double loglik = 0.0;
        const double log_p = std::log(prior), log_q = std::log1p(-prior);
        for (std::size_t i = 0; i < n_items; ++i) {
            double a = log_p, b = log_q;
            for (auto l : m.by_item[i]) {
                const auto& lab = m.labels[l];
                if (lab.relevant) {
                    a += std::log(sens[lab.worker]);
                    b += std::log1p(-spec[lab.worker]);
                } else {
                    a += std::log1p(-sens[lab.worker]);
                    b += std::log(spec[lab.worker]);
                }
            }
            double z = log_sum_exp(a, b);
            next[i] = std::exp(a - z);
            loglik += z;
        }
        return loglik;
    };

    auto penalty = [&] {
        double pen = s * (std::log(prior) + std::log1p(-prior));
        for (std::size_t w = 0; w < n_workers; ++w) {
            pen += s * (std::log(sens[w]) + std::log1p(-sens[w]) + std::log(spec[w]) + std::log1p(-spec[w]));
        }
        return pen;
    };

    std::vector<double> next(n_items);
    for (int iter = 1; iter <= config.max_iters; ++iter) {
        m_step();
        double loglik = e_step(next);
        double objective = loglik + penalty();
        if (!std::isfinite(objective)) throw std::logic_error("dawid_skene: non-finite likelihood");
        if (!result.objective_trace.empty()) {
            double prev = result.objective_trace.back();
            if (objective < prev - 1e-9 * (1.0 + std::abs(prev))) {
                throw std::logic_error("dawid_skene: EM objective decreased at iteration " +
                                       std::to_string(iter));
            }
        }
        result.objective_trace.push_back(objective);
        result.loglik_trace.push_back(loglik);

        double delta = 0.0;
        for (std::size_t i = 0; i < n_items; ++i) delta = std::max(delta, std::abs(next[i] - mu[i]));
        mu.swap(next);
        result.iterations = iter;
        if (delta < config.tol) {
            result.converged = true;
            break;
        }
    }

    // The likelihood is symmetric under swapping the two classes; pick the
    // orientation that agrees with the majority vote on most items.
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n_items; ++i) {
        bool ds_rel = mu[i] > 0.5;
        bool mv_rel = mv_frac[i] > 0.5;
        agree += ds_rel == mv_rel ? 1 : 0;
    }
    if (2 * agree < n_items) {
        result.anchor_flipped = true;
        for (auto& v : mu) v = 1.0 - v;
        prior = 1.0 - prior;
        for (std::size_t w = 0; w < n_workers; ++w) {
            double se = sens[w];
            sens[w] = 1.0 - spec[w];
            spec[w] = 1.0 - se;
        }
    }

    result.prior = prior;
    for (std::size_t i = 0; i < n_items; ++i) {
        result.items.emplace(m.items[i], ItemEstimate{mu[i] > 0.5, mu[i]});
    }
    result.workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        result.workers.push_back(WorkerModel{m.workers[w], sens[w], spec[w], m.by_worker[w].size()});
    }
    return result;
}

AggregationResult aggregate(Aggregator method, const std::vector<JudgmentRecord>& judgments,
                            const DawidSkeneConfig& config) {
    return method == Aggregator::mv ? majority_vote(judgments, config.binarize_threshold)
                                    : dawid_skene(judgments, config);
}

void write_labels_csv(std::ostream& out, const AggregationResult& result) {
    out << "topic_id,doc_id,label,posterior\n";
    for (const auto& [key, est] : result.items) {
        out << key.topic << ',' << key.doc << ',' << (est.relevant ? 1 : 0) << ','
            << text::format_double(est.posterior) << '\n';
    }
}

void write_workers_csv(std::ostream& out, const AggregationResult& result) {
    out << "worker_id,sensitivity,specificity,n_judgments\n";
    for (const auto& w : result.workers) {
        out << w.worker_id << ',' << text::format_double(w.sensitivity) << ','
            << text::format_double(w.specificity) << ',' << w.n_judgments << '\n';
    }
}

}  // namespace collabjudge

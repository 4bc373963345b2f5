// collabjudge: command-line front end for crowd/trusted judgment analysis
// and budgeted collaborative-judging sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "collabjudge/aggregate.hpp"
#include "collabjudge/analysis.hpp"
#include "collabjudge/corpus_io.hpp"
#include "collabjudge/experiment.hpp"
#include "collabjudge/metrics.hpp"
#include "collabjudge/schedule.hpp"
#include "collabjudge/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace collabjudge;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitConsistency = 3;

constexpr const char* kOutEnv = "COLLABJUDGE_OUT_DIR";

// Reported as exit status 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool quiet = false;

template <typename... Args>
void info(Args&&... args) {
    if (quiet) return;
    std::ostringstream s;
    (s << ... << args);
    std::cerr << "[info] " << s.str() << '\n';
}

template <typename... Args>
void warn(Args&&... args) {
    std::ostringstream s;
    (s << ... << args);
    std::cerr << "[warn] " << s.str() << '\n';
}

struct Options {
    std::string qrels;
    std::string runs;
    std::string crowd;
    std::string out;
    std::string aggregator = "mv";
    std::string tau_variant = "tau_b";
    int threshold = kDefaultBinarizeThreshold;
    std::string negative_grades = "nonrelevant";
    int depth = kDefaultDepthCap;
    bool strict = false;

    int ds_max_iters = 100;
    double ds_tol = 1e-6;
    double ds_smoothing = 1.0;

    std::string avg_rank_mode = "absent_as_cap";

    std::vector<std::string> methods = {"drbo", "oracle_tbs", "random"};
    std::string budgets = "0:1:0.05";
    int reps_random = 50;
    int reps_oracle = 10;
    std::uint64_t seed = 1;
    std::string oracle_budget_mode = "global";
    int statap_depth = 1000;
    int threads = 0;

    int synth_topics = 20;
    int synth_docs = 50;
    int synth_systems = 10;
    int synth_workers = 10;
    int synth_labels = 5;
    double synth_prior = 0.4;
    double synth_sensitivity = 0.8;
    double synth_specificity = 0.8;
    int synth_adversarial = 0;
    double synth_adversarial_rate = 0.3;
    double synth_spread = 0.0;
};

void require_path(const std::string& value, const char* flag, const char* command, bool directory = false) {
    if (value.empty()) throw UsageError(std::string(command) + " requires " + flag);
    if (directory ? !fs::is_directory(value) : !fs::is_regular_file(value)) {
        throw UsageError(std::string(flag) + " '" + value + "' does not exist or is not a " +
                         (directory ? "directory" : "file"));
    }
}

fs::path output_dir(const Options& o) {
    fs::path dir = o.out;
    if (dir.empty()) {
        const char* env = std::getenv(kOutEnv);
        dir = env && *env ? env : ".";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory '" + dir.string() + "'");
    return dir;
}

template <typename Fn>
void write_artifact(const fs::path& dir, const std::string& name, Fn&& fn) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    fn(out);
    out.flush();
    if (!out) throw UsageError("failed writing '" + path.string() + "'");
    info("wrote ", path.string());
}

void write_json(const fs::path& dir, const std::string& name, const json& doc) {
    write_artifact(dir, name, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

QrelSet load_qrels(const Options& o) {
    QrelsOptions opts;
    opts.binarize_threshold = o.threshold;
    opts.negative_grades = negative_grades_from_string(o.negative_grades);
    auto parsed = read_qrels_file(o.qrels, opts);
    std::size_t rel = 0;
    for (const auto& [key, e] : parsed.qrels.entries()) rel += e.relevant ? 1 : 0;
    info("qrels: ", parsed.qrels.size(), " pairs over ", parsed.qrels.topics().size(), " topics (", rel,
         " relevant); ", parsed.duplicate_lines, " duplicate lines; ", parsed.dropped_negative,
         " negative-grade lines dropped");
    return std::move(parsed.qrels);
}

std::vector<RunRanking> load_runs(const Options& o) {
    auto runs = read_run_directory(o.runs, o.depth);
    std::size_t lines = 0;
    for (const auto& r : runs) {
        for (const auto& [topic, docs] : r.lists) lines += docs.size();
    }
    info("runs: ", runs.size(), " systems, ", lines, " ranked documents (depth cap ", o.depth, ")");
    if (runs.empty()) throw UsageError("no non-empty run files in '" + o.runs + "'");
    return runs;
}

std::vector<JudgmentRecord> load_crowd(const Options& o) {
    auto parsed = read_crowd_file(o.crowd);
    std::set<std::string> workers;
    PairSet pairs;
    for (const auto& j : parsed.records) {
        workers.insert(j.worker_id);
        pairs.insert({j.topic_id, j.doc_id});
    }
    info("crowd: ", parsed.records.size(), " judgments on ", pairs.size(), " pairs by ", workers.size(),
         " workers; ", parsed.duplicates, " duplicate (worker, topic, doc) rows collapsed");
    return std::move(parsed.records);
}

DawidSkeneConfig ds_config(const Options& o) {
    DawidSkeneConfig c;
    c.max_iters = o.ds_max_iters;
    c.tol = o.ds_tol;
    c.smoothing = o.ds_smoothing;
    c.binarize_threshold = o.threshold;
    return c;
}

AggregationResult run_aggregation(const Options& o, const std::vector<JudgmentRecord>& crowd) {
    auto method = aggregator_from_string(o.aggregator);
    auto result = aggregate(method, crowd, ds_config(o));
    if (method == Aggregator::ds) {
        info("dawid-skene: ", result.iterations, " iterations, ", result.converged ? "converged" : "NOT converged",
             result.anchor_flipped ? ", classes flipped to agree with majority vote" : "");
        if (!result.converged) warn("dawid-skene stopped at --ds-max-iters without meeting --ds-tol");
    }
    std::size_t rel = 0;
    for (const auto& [key, e] : result.items) rel += e.relevant ? 1 : 0;
    info(to_string(method), " labels: ", result.items.size(), " pairs, ", rel, " relevant");
    return result;
}

// Crowd pairs the gold set lacks. Under --strict they are an error.
void check_crowd_coverage(const Options& o, const AggregationResult& crowd, const QrelSet& nist) {
    std::size_t outside = 0;
    const PairKey* first = nullptr;
    for (const auto& [key, e] : crowd.items) {
        if (!nist.contains(key)) {
            if (!first) first = &key;
            ++outside;
        }
    }
    if (outside == 0) return;
    std::string msg = std::to_string(outside) + " crowd-judged pairs have no NIST judgment (first: " + first->topic +
                      ", " + first->doc + ")";
    if (o.strict) throw ConsistencyError(msg);
    warn(msg, "; they are left out of every comparison");
}

int cmd_validate(const Options& o) {
    require_path(o.qrels, "--qrels", "validate");
    auto nist = load_qrels(o);
    if (!o.runs.empty()) {
        require_path(o.runs, "--runs", "validate", true);
        auto runs = load_runs(o);
        auto topics = nist.topics();
        for (const auto& r : runs) {
            std::size_t missing = 0;
            for (const auto& t : topics) missing += r.lists.count(t) ? 0 : 1;
            if (missing) info("run ", r.system_id, " retrieves nothing for ", missing, " judged topics");
        }
    }
    if (!o.crowd.empty()) {
        require_path(o.crowd, "--crowd", "validate");
        auto crowd = load_crowd(o);
        auto mv = majority_vote(crowd, o.threshold);
        check_crowd_coverage(o, mv, nist);
        std::size_t uncovered = 0;
        for (const auto& [key, e] : nist.entries()) uncovered += mv.items.count(key) ? 0 : 1;
        info(uncovered, " NIST pairs have no crowd judgment");
    }
    info("inputs are well formed");
    return 0;
}

int cmd_aggregate(const Options& o) {
    require_path(o.crowd, "--crowd", "aggregate");
    auto dir = output_dir(o);
    auto crowd = load_crowd(o);
    auto result = run_aggregation(o, crowd);
    write_artifact(dir, "labels.csv", [&](std::ostream& out) { write_labels_csv(out, result); });
    if (result.method == Aggregator::ds) {
        write_artifact(dir, "workers.csv", [&](std::ostream& out) { write_workers_csv(out, result); });
    }
    return 0;
}

int cmd_analyze(const Options& o) {
    require_path(o.qrels, "--qrels", "analyze");
    require_path(o.crowd, "--crowd", "analyze");
    require_path(o.runs, "--runs", "analyze", true);
    auto dir = output_dir(o);
    auto nist = load_qrels(o);
    auto runs = load_runs(o);
    auto crowd = run_aggregation(o, load_crowd(o));
    check_crowd_coverage(o, crowd, nist);

    auto cells = confusion_matrix(crowd, nist);
    auto category = agreement_by_category(cells);
    PairSet shared;
    for (const auto& [key, e] : crowd.items) {
        if (nist.contains(key)) shared.insert(key);
    }
    auto ranks = average_ranks(runs, shared, kRankCap, avg_rank_mode_from_string(o.avg_rank_mode));
    auto bins = rank_bin_agreement(ranks, crowd, nist);
    auto topics = topic_agreement(crowd, nist);
    info("agreement ", text::format_double(cells.accuracy()), " on ", cells.total(), " pairs; topic std ",
         text::format_double(topics.std));

    write_artifact(dir, "labels.csv", [&](std::ostream& out) { write_labels_csv(out, crowd); });
    if (crowd.method == Aggregator::ds) {
        write_artifact(dir, "workers.csv", [&](std::ostream& out) { write_workers_csv(out, crowd); });
    }
    write_artifact(dir, "confusion.csv", [&](std::ostream& out) { write_confusion_csv(out, cells); });
    write_artifact(dir, "category_agreement.csv", [&](std::ostream& out) { write_category_csv(out, cells); });
    write_artifact(dir, "rank_bins.csv", [&](std::ostream& out) { write_rank_bins_csv(out, bins); });
    write_artifact(dir, "topic_agreement.csv", [&](std::ostream& out) { write_topic_agreement_csv(out, topics); });

    json summary;
    summary["aggregator"] = o.aggregator;
    summary["binarize_threshold"] = o.threshold;
    summary["avg_rank_mode"] = o.avg_rank_mode;
    summary["pairs_compared"] = cells.total();
    summary["accuracy"] = cells.accuracy();
    summary["confusion"] = {{"rr", cells.rr}, {"rn", cells.rn}, {"nr", cells.nr}, {"nn", cells.nn}};
    summary["agree_given_relevant"] = category.agree_given_rel;
    summary["agree_given_nonrelevant"] = category.agree_given_nonrel;
    summary["topic_accuracy_mean"] = topics.mean;
    summary["topic_accuracy_std"] = topics.std;
    if (crowd.method == Aggregator::ds) {
        summary["ds"] = {{"iterations", crowd.iterations},
                         {"converged", crowd.converged},
                         {"anchor_flipped", crowd.anchor_flipped}};
    }
    write_json(dir, "summary.json", summary);
    return 0;
}

int cmd_sweep(const Options& o) {
    require_path(o.qrels, "--qrels", "sweep");
    require_path(o.crowd, "--crowd", "sweep");
    require_path(o.runs, "--runs", "sweep", true);

    SweepConfig cfg;
    try {
        cfg.budgets = parse_budgets(o.budgets);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    cfg.reps_random = o.reps_random;
    cfg.reps_oracle = o.reps_oracle;
    cfg.aggregator = aggregator_from_string(o.aggregator);
    cfg.tau_variant = tau_variant_from_string(o.tau_variant);
    cfg.master_seed = o.seed;
    cfg.oracle_budget_mode = oracle_budget_mode_from_string(o.oracle_budget_mode);
    cfg.statap_depth = o.statap_depth;
    cfg.ds = ds_config(o);
    cfg.threads = o.threads;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::vector<ScheduleMethod> methods;
    for (const auto& m : o.methods) methods.push_back(schedule_method_from_string(m));

    auto dir = output_dir(o);
    auto nist = load_qrels(o);
    auto runs = load_runs(o);
    auto crowd_records = load_crowd(o);

    auto ctx = prepare_sweep(runs, nist, crowd_records, cfg);
    if (ctx.crowd_pairs_outside_nist) {
        std::string msg = std::to_string(ctx.crowd_pairs_outside_nist) + " crowd-judged pairs have no NIST judgment";
        if (o.strict) throw ConsistencyError(msg);
        warn(msg, "; the sweep covers only pairs judged by both");
    }
    if (ctx.nist_pairs_without_crowd) {
        warn(ctx.nist_pairs_without_crowd, " NIST pairs have no crowd judgment; the sweep covers only pairs judged by both");
    }
    info("sweep scope: ", ctx.pairs.size(), " pairs, ", ctx.topics.size(), " topics, ", ctx.system_ids.size(),
         " systems; ", cfg.budgets.size(), " budgets");

    std::vector<SweepResult> results;
    json summary;
    summary["aggregator"] = o.aggregator;
    summary["tau_variant"] = o.tau_variant;
    summary["master_seed"] = o.seed;
    summary["oracle_budget_mode"] = o.oracle_budget_mode;
    summary["budgets"] = cfg.budgets;
    summary["scope"] = {{"pairs", ctx.pairs.size()},
                        {"topics", ctx.topics.size()},
                        {"systems", ctx.system_ids.size()},
                        {"crowd_pairs_outside_nist", ctx.crowd_pairs_outside_nist},
                        {"nist_pairs_without_crowd", ctx.nist_pairs_without_crowd}};
    summary["tau_threshold"] = kTauThreshold;
    json per_method = json::object();
    for (auto m : methods) {
        auto r = sweep(m, ctx, cfg);
        auto reach = first_budget_reaching(r.curve, kTauThreshold);
        info(to_string(m), ": auc ", text::format_double(r.curve.auc), ", tau >= ", kTauThreshold, " at budget ",
             reach ? text::format_double(*reach) : "never");
        per_method[to_string(m)] = {{"auc", r.curve.auc},
                                    {"budget_reaching_tau_threshold", reach ? json(*reach) : json(nullptr)},
                                    {"reps", repetitions(m, cfg)}};
        results.push_back(std::move(r));
    }
    summary["methods"] = per_method;

    write_artifact(dir, "sweep_raw.csv", [&](std::ostream& out) { write_sweep_raw_csv(out, results); });
    write_artifact(dir, "sweep_agg.csv", [&](std::ostream& out) { write_sweep_agg_csv(out, results); });
    write_json(dir, "summary.json", summary);
    return 0;
}

int cmd_synth(const Options& o) {
    SynthConfig cfg;
    cfg.n_topics = o.synth_topics;
    cfg.docs_per_topic = o.synth_docs;
    cfg.n_systems = o.synth_systems;
    cfg.n_workers = o.synth_workers;
    cfg.labels_per_doc = o.synth_labels;
    cfg.prior_relevant = o.synth_prior;
    cfg.topic_difficulty_spread = o.synth_spread;
    cfg.seed = o.seed;
    if (o.synth_adversarial < 0 || o.synth_adversarial > o.synth_workers) {
        throw UsageError("--synth-adversarial must lie in [0, --synth-workers]");
    }
    cfg.worker_reliability.clear();
    for (int w = 0; w < o.synth_workers; ++w) {
        // adversarial workers come last in worker-id order
        if (w >= o.synth_workers - o.synth_adversarial) {
            cfg.worker_reliability.emplace_back(o.synth_adversarial_rate, o.synth_adversarial_rate);
        } else {
            cfg.worker_reliability.emplace_back(o.synth_sensitivity, o.synth_specificity);
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    auto dir = output_dir(o);
    auto data = synth_generate(cfg);
    write_artifact(dir, "qrels.txt", [&](std::ostream& out) { write_qrels(out, data.nist); });
    write_artifact(dir, "crowd.csv", [&](std::ostream& out) { write_crowd(out, data.crowd); });
    std::error_code ec;
    fs::create_directories(dir / "runs", ec);
    if (ec) throw UsageError("cannot create '" + (dir / "runs").string() + "'");
    for (const auto& run : data.runs) {
        write_artifact(dir / "runs", run.system_id + ".run", [&](std::ostream& out) { write_run(out, run); });
    }
    write_artifact(dir, "planted_workers.csv", [&](std::ostream& out) {
        out << "worker_id,sensitivity,specificity\n";
        for (std::size_t w = 0; w < data.worker_ids.size(); ++w) {
            out << data.worker_ids[w] << ',' << text::format_double(data.worker_rates[w].first) << ','
                << text::format_double(data.worker_rates[w].second) << '\n';
        }
    });
    write_artifact(dir, "topic_difficulty.csv", [&](std::ostream& out) {
        out << "topic_id,flip_probability\n";
        for (const auto& [topic, flip] : data.topic_flip) out << topic << ',' << text::format_double(flip) << '\n';
    });
    info("synthetic corpus: ", data.nist.size(), " pairs, ", data.crowd.size(), " crowd judgments, ",
         data.runs.size(), " runs");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{
        "collabjudge: measure crowd vs. trusted-assessor disagreement on relevance judgments and simulate\n"
        "budgeted collaborative judging.\n\n"
        "Every flag may also be given in a TOML-style file passed with --config; keys are flag names\n"
        "without dashes (e.g. reps-random = 20). Command-line flags override the file. The output\n"
        "directory defaults to $" + std::string(kOutEnv) + " or the current directory.\n\n"
        "Exit status: 0 ok, 1 usage error, 2 malformed input (file and line are reported),\n"
        "3 inconsistent inputs."};
    app.set_config("--config", "", "TOML-style config file; flags on the command line take precedence");
    app.require_subcommand(1);

    app.add_flag("-q,--quiet", quiet, "Suppress [info] log lines on stderr");
    app.add_option("--qrels", o.qrels, "NIST qrels file: topic iter doc grade");
    app.add_option("--runs", o.runs, "Directory of TREC run files (one system per file)");
    app.add_option("--crowd", o.crowd, "Crowd judgments CSV with header topic_id,doc_id,worker_id,grade");
    app.add_option("--out", o.out, "Output directory (created if missing)");
    app.add_option("--aggregator", o.aggregator,
                   "Crowd label aggregation: mv (majority vote; a tie counts as nonrelevant) or ds "
                   "(Dawid-Skene EM, initialised from vote fractions)")
        ->check(CLI::IsMember({"mv", "ds"}))
        ->capture_default_str();
    app.add_option("--threshold", o.threshold,
                   "Grades >= this are relevant, in both qrels and crowd data (graded qrels use 1 or 2)")
        ->capture_default_str();
    app.add_option("--negative-grades", o.negative_grades,
                   "Qrels lines with grade < 0: nonrelevant (keep as judged nonrelevant) or unjudged "
                   "(drop them, as trec_eval does)")
        ->check(CLI::IsMember({"nonrelevant", "unjudged"}))
        ->capture_default_str();
    app.add_option("--depth", o.depth, "Keep only the top N documents of each run topic")->capture_default_str();
    app.add_flag("--strict", o.strict,
                 "Treat crowd-judged pairs missing from the qrels as an error (exit 3) instead of "
                 "leaving them out with a warning");
    app.add_option("--ds-max-iters", o.ds_max_iters, "Dawid-Skene iteration cap")->capture_default_str();
    app.add_option("--ds-tol", o.ds_tol, "Dawid-Skene stops when no posterior moves by this much")
        ->capture_default_str();
    app.add_option("--ds-smoothing", o.ds_smoothing,
                   "Pseudo-count added to every worker confusion cell and to the class prior")
        ->capture_default_str();
    app.add_option("--avg-rank-mode", o.avg_rank_mode,
                   "Average rank of a document: absent_as_cap (runs that miss it count as rank 1000) or "
                   "retrieving_only (average over the runs that retrieve it)")
        ->check(CLI::IsMember({"absent_as_cap", "retrieving_only"}))
        ->capture_default_str();
    app.add_option("--method", o.methods,
                   "Schedulers to sweep (repeatable): drbo (statAP-weighted top documents per topic), "
                   "oracle_tbs (lowest crowd-agreement topics first), random")
        ->check(CLI::IsMember({"drbo", "oracle_tbs", "random"}))
        ->capture_default_str();
    app.add_option("--budgets", o.budgets,
                   "Trusted-judgment budget ratios: start:stop:step or a comma list; must run from 0 to 1")
        ->capture_default_str();
    app.add_option("--reps-random", o.reps_random, "Repetitions per budget for random")->capture_default_str();
    app.add_option("--reps-oracle", o.reps_oracle,
                   "Repetitions per budget for oracle_tbs (drbo is deterministic and runs once)")
        ->capture_default_str();
    app.add_option("--seed", o.seed, "Master seed for sweeps and synthetic data")->capture_default_str();
    app.add_option("--tau-variant", o.tau_variant,
                   "Kendall tau flavour: tau_b (tie-corrected) or tau_a (ties count as neither concordant "
                   "nor discordant)")
        ->check(CLI::IsMember({"tau_a", "tau_b"}))
        ->capture_default_str();
    app.add_option("--oracle-budget-mode", o.oracle_budget_mode,
                   "oracle_tbs budget: global (round(rho * all pairs), spent topic by topic) or per_topic "
                   "(sum of round(rho * n_t), the total drbo and random spend)")
        ->check(CLI::IsMember({"global", "per_topic"}))
        ->capture_default_str();
    app.add_option("--statap-depth", o.statap_depth,
                   "Depth of the drbo rank weights; raised to the deepest run rank if shallower")
        ->capture_default_str();
    app.add_option("--threads", o.threads, "Sweep worker threads (0: one per core)")->capture_default_str();

    app.add_option("--synth-topics", o.synth_topics, "synth: topics")->capture_default_str();
    app.add_option("--synth-docs", o.synth_docs, "synth: judged documents per topic")->capture_default_str();
    app.add_option("--synth-systems", o.synth_systems, "synth: runs")->capture_default_str();
    app.add_option("--synth-workers", o.synth_workers, "synth: crowd workers")->capture_default_str();
    app.add_option("--synth-labels", o.synth_labels, "synth: crowd labels per document")->capture_default_str();
    app.add_option("--synth-prior", o.synth_prior, "synth: fraction of relevant documents")->capture_default_str();
    app.add_option("--synth-sensitivity", o.synth_sensitivity, "synth: honest worker sensitivity")
        ->capture_default_str();
    app.add_option("--synth-specificity", o.synth_specificity, "synth: honest worker specificity")
        ->capture_default_str();
    app.add_option("--synth-adversarial", o.synth_adversarial, "synth: number of adversarial workers")
        ->capture_default_str();
    app.add_option("--synth-adversarial-rate", o.synth_adversarial_rate,
                   "synth: sensitivity and specificity of adversarial workers")
        ->capture_default_str();
    app.add_option("--synth-spread", o.synth_spread,
                   "synth: each topic flips crowd labels with a probability drawn from [0, spread]")
        ->capture_default_str();

    auto* validate = app.add_subcommand("validate", "Parse qrels (and optionally runs and crowd CSV) and report counts");
    auto* aggregate_cmd = app.add_subcommand("aggregate", "Aggregate crowd labels: labels.csv (and workers.csv for ds)");
    auto* analyze = app.add_subcommand(
        "analyze",
        "Crowd vs. NIST agreement: confusion.csv, category_agreement.csv, rank_bins.csv, topic_agreement.csv, "
        "labels.csv, summary.json");
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Budget sweep per scheduler, Kendall tau vs. the NIST ranking: sweep_raw.csv, sweep_agg.csv, "
                 "summary.json");
    auto* synth = app.add_subcommand("synth", "Write a seeded synthetic corpus: qrels.txt, runs/, crowd.csv");
    for (auto* sub : {validate, aggregate_cmd, analyze, sweep_cmd, synth}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*validate) return cmd_validate(o);
        if (*aggregate_cmd) return cmd_aggregate(o);
        if (*analyze) return cmd_analyze(o);
        if (*sweep_cmd) return cmd_sweep(o);
        if (*synth) return cmd_synth(o);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const ConsistencyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConsistency;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

#include "collabjudge/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "collabjudge/text.hpp"

namespace collabjudge {

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::nist: return "nist";
        case Provenance::crowd_mv: return "crowd_mv";
        case Provenance::crowd_ds: return "crowd_ds";
    }
    return "unknown";
}

bool QrelSet::set(const PairKey& key, bool relevant, Provenance provenance) {
    auto [it, inserted] = entries_.insert_or_assign(key, QrelEntry{relevant, provenance});
    return !inserted;
}

const QrelEntry* QrelSet::find(const PairKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> QrelSet::topics() const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : entries_) {
        if (out.empty() || out.back() != key.topic) out.push_back(key.topic);
    }
    return out;
}

PairSet QrelSet::keys() const {
    PairSet out;
    for (const auto& [key, entry] : entries_) out.insert(out.end(), key);
    return out;
}

std::map<std::string, std::pair<std::size_t, std::size_t>> QrelSet::topic_counts() const {
    std::map<std::string, std::pair<std::size_t, std::size_t>> out;
    for (const auto& [key, entry] : entries_) {
        auto& c = out[key.topic];
        (entry.relevant ? c.first : c.second)++;
    }
    return out;
}

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
      source_(source),
      line_(line) {}

namespace {

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_skippable(std::string_view line) {
    auto t = text::trim(line);
    return t.empty() || t.front() == '#';
}

template <typename Parse>
auto open_and_parse(const std::filesystem::path& path, Parse&& parse) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return parse(in, path.string());
}

}  // namespace

const char* to_string(NegativeGrades n) { return n == NegativeGrades::nonrelevant ? "nonrelevant" : "unjudged"; }

NegativeGrades negative_grades_from_string(const std::string& s) {
    if (s == "nonrelevant") return NegativeGrades::nonrelevant;
    if (s == "unjudged") return NegativeGrades::unjudged;
    throw std::invalid_argument("unknown negative-grade mode '" + s + "' (expected nonrelevant or unjudged)");
}

QrelsParse parse_qrels(std::istream& in, const QrelsOptions& options, const std::string& source) {
    QrelsParse result;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (is_skippable(line)) continue;
        auto fields = text::split_whitespace(line);
        if (fields.size() != 4) {
            throw ParseError(source, lineno,
                             "expected 4 fields (topic iter doc grade), got " +
                                 std::to_string(fields.size()));
        }
        auto grade = text::parse_int(fields[3]);
        if (!grade) throw ParseError(source, lineno, "non-integer grade '" + std::string(fields[3]) + "'");
        PairKey key{std::string(fields[0]), std::string(fields[2])};
        if (*grade < 0 && options.negative_grades == NegativeGrades::unjudged) {
            ++result.dropped_negative;
            if (result.qrels.erase(key)) ++result.duplicate_lines;
            continue;
        }
        if (result.qrels.set(key, binarize(static_cast<int>(*grade), options.binarize_threshold),
                             Provenance::nist)) {
            ++result.duplicate_lines;
        }
    }
    return result;
}

RunRanking parse_run(std::istream& in, int depth_cap, const std::string& source) {
    if (depth_cap <= 0) throw std::invalid_argument("depth_cap must be positive");
    RunRanking run;
    std::map<std::string, std::set<std::string>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (is_skippable(line)) continue;
        auto fields = text::split_whitespace(line);
        if (fields.size() != 6) {
            throw ParseError(source, lineno,
                             "expected 6 fields (topic Q0 doc rank score tag), got " +
                                 std::to_string(fields.size()));
        }
        auto rank = text::parse_int(fields[3]);
        if (!rank) throw ParseError(source, lineno, "non-integer rank '" + std::string(fields[3]) + "'");
        auto score = text::parse_double(fields[4]);
        if (!score) throw ParseError(source, lineno, "non-numeric score '" + std::string(fields[4]) + "'");
        std::string tag(fields[5]);
        if (run.system_id.empty()) {
            run.system_id = tag;
        } else if (run.system_id != tag) {
            throw ParseError(source, lineno,
                             "inconsistent run tag '" + tag + "' (expected '" + run.system_id + "')");
        }
        std::string topic(fields[0]);
        std::string doc(fields[2]);
        if (!seen[topic].insert(doc).second) {
            throw ParseError(source, lineno, "duplicate document '" + doc + "' in topic '" + topic + "'");
        }
        run.lists[topic].push_back(RankedDoc{std::move(doc), static_cast<int>(*rank), *score});
    }
    for (auto& [topic, docs] : run.lists) {
        std::sort(docs.begin(), docs.end(), [](const RankedDoc& a, const RankedDoc& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id < b.doc_id;
        });
        if (docs.size() > static_cast<std::size_t>(depth_cap)) docs.resize(depth_cap);
        for (std::size_t i = 0; i < docs.size(); ++i) docs[i].rank = static_cast<int>(i + 1);
    }
    return run;
}

CrowdParse parse_crowd(std::istream& in, const std::string& source) {
    CrowdParse result;
    std::string line;
    std::size_t lineno = 0;

    std::ptrdiff_t col_topic = -1, col_doc = -1, col_worker = -1, col_grade = -1;
    std::size_t ncols = 0;
    bool have_header = false;
    while (!have_header && std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (text::trim(line).empty()) continue;
        auto cols = text::split(line, ',');
        ncols = cols.size();
        for (std::size_t i = 0; i < cols.size(); ++i) {
            auto name = text::trim(cols[i]);
            auto idx = static_cast<std::ptrdiff_t>(i);
            if (name == "topic_id") col_topic = idx;
            else if (name == "doc_id") col_doc = idx;
            else if (name == "worker_id") col_worker = idx;
            else if (name == "grade") col_grade = idx;
        }
        have_header = true;
    }
    if (!have_header) throw ParseError(source, lineno, "missing header topic_id,doc_id,worker_id,grade");
    for (auto [name, col] : {std::pair{"topic_id", col_topic}, {"doc_id", col_doc},
                             {"worker_id", col_worker}, {"grade", col_grade}}) {
        if (col < 0) throw ParseError(source, lineno, std::string("header lacks column '") + name + "'");
    }

    struct Key {
        std::string worker, topic, doc;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::hash<std::string> h;
            return h(k.worker) ^ (h(k.topic) * 31) ^ (h(k.doc) * 1000003);
        }
    };
    std::unordered_map<Key, std::size_t, KeyHash> index;
    std::vector<JudgmentRecord> rows;
    std::vector<bool> superseded;

    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (text::trim(line).empty()) continue;
        auto cols = text::split(line, ',');
        if (cols.size() != ncols) {
            throw ParseError(source, lineno,
                             "expected " + std::to_string(ncols) + " columns, got " + std::to_string(cols.size()));
        }
        JudgmentRecord rec;
        rec.topic_id = std::string(text::trim(cols[col_topic]));
        rec.doc_id = std::string(text::trim(cols[col_doc]));
        rec.worker_id = std::string(text::trim(cols[col_worker]));
        auto grade = text::parse_int(text::trim(cols[col_grade]));
        if (!grade) {
            throw ParseError(source, lineno, "non-integer grade '" + std::string(cols[col_grade]) + "'");
        }
        if (rec.topic_id.empty() || rec.doc_id.empty() || rec.worker_id.empty()) {
            throw ParseError(source, lineno, "empty topic_id, doc_id or worker_id");
        }
        rec.grade = static_cast<int>(*grade);
        rec.source = Source::crowd;

        Key key{rec.worker_id, rec.topic_id, rec.doc_id};
        auto [it, inserted] = index.try_emplace(key, rows.size());
        if (!inserted) {
            superseded[it->second] = true;
            it->second = rows.size();
            ++result.duplicates;
        }
        rows.push_back(std::move(rec));
        superseded.push_back(false);
    }
    result.records.reserve(rows.size() - result.duplicates);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!superseded[i]) result.records.push_back(std::move(rows[i]));
    }
    return result;
}

QrelsParse read_qrels_file(const std::filesystem::path& path, const QrelsOptions& options) {
    return open_and_parse(path, [&](std::istream& in, const std::string& name) {
        return parse_qrels(in, options, name);
    });
}

RunRanking read_run_file(const std::filesystem::path& path, int depth_cap) {
    return open_and_parse(path, [&](std::istream& in, const std::string& name) {
        return parse_run(in, depth_cap, name);
    });
}

CrowdParse read_crowd_file(const std::filesystem::path& path) {
    return open_and_parse(path, [&](std::istream& in, const std::string& name) {
        return parse_crowd(in, name);
    });
}

std::vector<RunRanking> read_run_directory(const std::filesystem::path& dir, int depth_cap) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ParseError(dir.string(), 0, "not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename().string().front() != '.') {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RunRanking> runs;
    std::set<std::string> tags;
    for (const auto& f : files) {
        auto run = read_run_file(f, depth_cap);
        if (run.lists.empty()) continue;
        if (!tags.insert(run.system_id).second) {
            throw ParseError(f.string(), 0, "run tag '" + run.system_id + "' already used by another file");
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

void write_qrels(std::ostream& out, const QrelSet& qrels) {
    for (const auto& [key, entry] : qrels.entries()) {
        out << key.topic << " 0 " << key.doc << ' ' << (entry.relevant ? 1 : 0) << '\n';
    }
}

void write_run(std::ostream& out, const RunRanking& run) {
    for (const auto& [topic, docs] : run.lists) {
        for (const auto& d : docs) {
            out << topic << " Q0 " << d.doc_id << ' ' << d.rank << ' ' << text::format_double(d.score)
                << ' ' << run.system_id << '\n';
        }
    }
}

void write_crowd(std::ostream& out, const std::vector<JudgmentRecord>& records) {
    out << "topic_id,doc_id,worker_id,grade\n";
    for (const auto& r : records) {
        out << r.topic_id << ',' << r.doc_id << ',' << r.worker_id << ',' << r.grade << '\n';
    }
}

}  // namespace collabjudge

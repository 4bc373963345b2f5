#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace collabjudge {

// A judged (topic, document) pair. Ordered by topic first, so iterating a
// std::map keyed on PairKey visits topics as contiguous groups.
struct PairKey {
    std::string topic;
    std::string doc;

    auto operator<=>(const PairKey&) const = default;
    bool operator==(const PairKey&) const = default;
};

using PairSet = std::set<PairKey>;

enum class Source { crowd, trusted };

// One raw label from one assessor.
struct JudgmentRecord {
    std::string topic_id;
    std::string doc_id;
    std::string worker_id;
    int grade = 0;
    Source source = Source::crowd;
};

enum class Provenance { nist, crowd_mv, crowd_ds };

const char* to_string(Provenance p);

struct QrelEntry {
    bool relevant = false;
    Provenance provenance = Provenance::nist;

    bool operator==(const QrelEntry&) const = default;
};

// Binary relevance judgments keyed by (topic, doc). Used both for gold NIST
// judgments and for hybrid trusted/crowd judgment sets.
class QrelSet {
public:
    using Map = std::map<PairKey, QrelEntry>;

    QrelSet() = default;
    explicit QrelSet(Map entries) : entries_(std::move(entries)) {}

    // Inserts or overwrites. Returns true when the key already existed.
    bool set(const PairKey& key, bool relevant, Provenance provenance);

    bool erase(const PairKey& key) { return entries_.erase(key) != 0; }

    const QrelEntry* find(const PairKey& key) const;
    bool contains(const PairKey& key) const { return entries_.count(key) != 0; }

    const Map& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    std::vector<std::string> topics() const;
    PairSet keys() const;

    // Per-topic (relevant, nonrelevant) counts.
    std::map<std::string, std::pair<std::size_t, std::size_t>> topic_counts() const;

    bool operator==(const QrelSet&) const = default;

private:
    Map entries_;
};

struct RankedDoc {
    std::string doc_id;
    int rank = 0;
    double score = 0.0;
};

// One system's ranked lists, per topic.
struct RunRanking {
    std::string system_id;
    std::map<std::string, std::vector<RankedDoc>> lists;
};

// Malformed input. Carries the source name and 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);

    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

// Inputs that parse individually but do not fit together (missing labels,
// topics without agreement values, and the like).
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace collabjudge

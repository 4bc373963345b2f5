#pragma once

// Readers and writers for TREC qrels, TREC runs and crowd-judgment CSV.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "collabjudge/types.hpp"

namespace collabjudge {

inline constexpr int kDefaultBinarizeThreshold = 1;
inline constexpr int kDefaultDepthCap = 1000;

// Graded label to binary. Negative codes (spam, unjudgeable) fall below any
// positive threshold and come out nonrelevant.
inline bool binarize(int grade, int threshold = kDefaultBinarizeThreshold) {
    return grade >= threshold;
}

// What a negative grade (spam / unjudgeable code) means. nonrelevant keeps
// the pair as judged nonrelevant; unjudged drops it, which is how trec_eval
// reads such lines.
enum class NegativeGrades { nonrelevant, unjudged };

const char* to_string(NegativeGrades n);
NegativeGrades negative_grades_from_string(const std::string& s);

struct QrelsOptions {
    int binarize_threshold = kDefaultBinarizeThreshold;
    NegativeGrades negative_grades = NegativeGrades::nonrelevant;
};

struct QrelsParse {
    QrelSet qrels;
    std::size_t duplicate_lines = 0;
    std::size_t dropped_negative = 0;
};

struct CrowdParse {
    std::vector<JudgmentRecord> records;
    std::size_t duplicates = 0;
};

// `topic iter doc grade` per line; blank and `#` lines skipped. Later
// duplicates of a (topic, doc) overwrite earlier ones.
QrelsParse parse_qrels(std::istream& in, const QrelsOptions& options = {},
                       const std::string& source = "<qrels>");

// `topic Q0 doc rank score tag` per line. Each topic is re-sorted by
// (score desc, doc asc), re-ranked 1..n and truncated to depth_cap.
RunRanking parse_run(std::istream& in, int depth_cap = kDefaultDepthCap,
                     const std::string& source = "<run>");

// CSV with header `topic_id,doc_id,worker_id,grade` (any column order, extra
// columns ignored). One record per (worker, topic, doc); the last occurrence
// keeps its place in file order.
CrowdParse parse_crowd(std::istream& in, const std::string& source = "<crowd>");

QrelsParse read_qrels_file(const std::filesystem::path& path, const QrelsOptions& options = {});
RunRanking read_run_file(const std::filesystem::path& path, int depth_cap = kDefaultDepthCap);
CrowdParse read_crowd_file(const std::filesystem::path& path);

// Every regular file in `dir`, in file-name order. Two files sharing a
// system tag are rejected.
std::vector<RunRanking> read_run_directory(const std::filesystem::path& dir,
                                           int depth_cap = kDefaultDepthCap);

// TREC qrels with grade 1/0.
void write_qrels(std::ostream& out, const QrelSet& qrels);
void write_run(std::ostream& out, const RunRanking& run);
void write_crowd(std::ostream& out, const std::vector<JudgmentRecord>& records);

}  // namespace collabjudge

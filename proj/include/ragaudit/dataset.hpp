#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ragaudit/types.hpp"
#include "ragaudit/verify.hpp"

namespace ragaudit {

enum class TaskType : std::uint8_t { QA, Summary, Data2Text };

const char* to_string(TaskType task);
std::optional<TaskType> parse_task_type(std::string_view token);

struct GoldSpan {
    CharSpan span;    // code points into the answer
    std::string tag;  // annotation type, kept verbatim

    friend bool operator==(const GoldSpan&, const GoldSpan&) = default;
};

struct Sample {
    std::string id;
    TaskType task_type = TaskType::QA;
    std::string context;
    std::optional<std::string> question;
    std::string answer;
    std::optional<bool> gold_hallucinated;
    std::optional<std::vector<GoldSpan>> gold_answer_spans;
    std::optional<std::vector<std::string>> gold_refuting_evidence;
};

struct LineError {
    std::size_t line_number = 0;  // 1-based
    std::string message;
};

struct LoadReport {
    std::vector<Sample> samples;
    std::vector<LineError> errors;  // rejected lines, in file order
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Recognized `format_tag` values. "native" is this tool's canonical JSONL
// schema; the ragtruth family shares one adapter that accepts the public
// corpus field names (plus common aliases) for the base, "++", and
// refuting-evidence-enhanced variants.
bool is_known_format(std::string_view format_tag);

// Loads a JSONL dataset. Malformed lines are skipped and reported; an
// unreadable file, an unknown format tag, or zero valid records throws
// DatasetError. Gold answer spans are validated against the answer's
// code-point length; offending records are rejected whole.
LoadReport load_dataset(const std::string& path, const std::string& format_tag);

// One JSONL record per audit result with stable field ordering, so reruns
// with identical inputs produce byte-identical files.
void write_results(const std::vector<AuditResult>& results, const std::string& path);
std::string render_result_line(const AuditResult& result);

// Inverse of write_results, faithful enough that write(read(f)) == f.
std::vector<AuditResult> read_results(const std::string& path);

}  // namespace ragaudit

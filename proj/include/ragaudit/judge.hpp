#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragaudit/types.hpp"

namespace ragaudit {

enum class JudgeRole : std::uint8_t { Decompose, Local, Global };

const char* to_string(JudgeRole role);

struct Decoding {
    double temperature = 0.0;
    int seed = 42;
};

struct JudgeRequest {
    JudgeRole role = JudgeRole::Decompose;
    std::optional<std::string> claim;        // required for Local and Global
    std::optional<std::string> question;     // QA tasks only
    std::string passage;                     // sentence / chunk / full context
    std::optional<std::string> focus;        // Global hint, only when local_label is ENT or CON
    std::optional<Label> local_label;        // required for Global
    Decoding decoding;
};

struct TokenUsage {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;

    friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct JudgeResponse {
    JudgeRole role = JudgeRole::Decompose;
    std::vector<std::string> claims;          // Decompose only
    Label label = Label::Baseless;            // Local/Global only
    std::vector<std::string> evidence_texts;  // Local/Global only, verbatim quotes
    bool repaired = false;                    // BASELESS arrived with evidence; it was dropped
    TokenUsage usage;
};

// Base class for judge failures the pipeline degrades gracefully on.
class JudgeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The judge replied but its document violates the response schema.
class JudgeParseError : public JudgeError {
public:
    JudgeParseError(const std::string& message, std::string excerpt_text)
        : JudgeError(message), excerpt(std::move(excerpt_text)) {}
    std::string excerpt;  // leading slice of the offending document
};

// A scripted run hit a request with no recorded response. Deliberately NOT a
// JudgeError: a gap in a test script is a test bug and must abort, not be
// absorbed as a degraded verdict.
class ScriptMissError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws std::invalid_argument when a request breaks the role invariants
// (Local/Global need a claim, Global needs local_label, focus may appear
// only on Global requests whose local_label is ENT or CON).
void validate_request(const JudgeRequest& request);

// Strict structured parse of a judge document for the given role. DECOMPOSE
// documents need a "claims" string array; LOCAL/GLOBAL documents need a
// "label" that is exactly one of the three tokens plus an optional
// "evidence" string array. An optional "usage" object is honored. A BASELESS
// label arriving with evidence is repaired: the evidence is dropped and the
// `repaired` flag set. Anything else malformed throws JudgeParseError
// carrying an excerpt of the document.
JudgeResponse parse_structured(const std::string& raw, JudgeRole role);

// Canonical document for a response; parse_structured(serialize_response(r))
// reproduces r for well-formed payloads.
std::string serialize_response(const JudgeResponse& response);

// Stable identity of a request: role, claim, passage and local label joined
// with unit separators. The question, focus hint and decoding knobs are
// derived from those fields in this pipeline, so they stay out of the key.
std::string request_key(const JudgeRequest& request);
std::uint64_t fnv1a64(std::string_view bytes);
std::string request_key_hash(const JudgeRequest& request);  // 16 hex digits

class Judge {
public:
    virtual ~Judge() = default;
    // Thread-safe; called concurrently from the fan-out executor.
    virtual JudgeResponse submit(const JudgeRequest& request) = 0;
};

// Replays recorded raw documents keyed by request_key_hash. Used by every
// offline test and by the batch CLI in scripted mode.
class ScriptedJudge : public Judge {
public:
    ScriptedJudge() = default;

    // Reads every "<hash>.json" file in `dir` as one recorded document.
    static ScriptedJudge from_directory(const std::string& dir);

    void add_script(const JudgeRequest& shape, const std::string& raw_document);
    void save_directory(const std::string& dir) const;

    std::size_t size() const { return scripts_.size(); }

    JudgeResponse submit(const JudgeRequest& request) override;

private:
    std::unordered_map<std::string, std::string> scripts_;
};

struct RemoteJudgeConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o-mini";
    std::string api_key;  // resolved from an environment variable by the caller
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{250};
    int concurrency = 4;  // in-flight request cap
    bool json_mode = true;
    std::chrono::seconds timeout{120};
};

// Chat-completions client. Each submit renders the role prompt, posts one
// request, and retries transport errors, non-200 statuses and schema-parse
// failures with exponential backoff before giving up with a JudgeError.
class RemoteJudge : public Judge {
public:
    explicit RemoteJudge(RemoteJudgeConfig config);
    ~RemoteJudge() override;

    JudgeResponse submit(const JudgeRequest& request) override;

private:
    struct Impl;
    Impl* impl_;
};

struct PriceTable {
    double prompt_usd_per_1m = 0.0;      // USD per million prompt tokens
    double completion_usd_per_1m = 0.0;  // USD per million completion tokens
};

// Token and request totals, grouped by role. Request counts include failed
// attempts; token counts cover successful responses only.
struct CostLedger {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    std::uint64_t decompose_requests = 0;
    std::uint64_t local_requests = 0;
    std::uint64_t global_requests = 0;

    void count_request(JudgeRole role);
    void add_usage(const TokenUsage& usage);
    void add(const JudgeResponse& response);  // count + usage in one step
    CostLedger& operator+=(const CostLedger& other);

    std::uint64_t total_requests() const {
        return decompose_requests + local_requests + global_requests;
    }
    double cost_usd(const PriceTable& prices) const;

    friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

}  // namespace ragaudit

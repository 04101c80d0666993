#include "ragaudit/judge.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>

#include <json.hpp>

#include <httplib.h>

#include "ragaudit/prompts.hpp"

namespace ragaudit {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(JudgeRole role) {
    switch (role) {
        case JudgeRole::Decompose: return "DECOMPOSE";
        case JudgeRole::Local: return "LOCAL";
        case JudgeRole::Global: return "GLOBAL";
    }
    return "DECOMPOSE";
}

void validate_request(const JudgeRequest& request) {
    switch (request.role) {
        case JudgeRole::Decompose:
            if (request.claim) throw std::invalid_argument("DECOMPOSE request must not carry a claim");
            if (request.local_label || request.focus)
                throw std::invalid_argument("DECOMPOSE request must not carry verification fields");
            break;
        case JudgeRole::Local:
            if (!request.claim) throw std::invalid_argument("LOCAL request requires a claim");
            if (request.local_label || request.focus)
                throw std::invalid_argument("LOCAL request must not carry global-stage fields");
            break;
        case JudgeRole::Global:
            if (!request.claim) throw std::invalid_argument("GLOBAL request requires a claim");
            if (!request.local_label) throw std::invalid_argument("GLOBAL request requires the local label");
            if (request.focus && *request.local_label == Label::Baseless)
                throw std::invalid_argument("GLOBAL request with a BASELESS local label must not carry a focus hint");
            if (!request.focus && *request.local_label != Label::Baseless)
                throw std::invalid_argument("GLOBAL request with a decisive local label requires the focus hint");
            break;
    }
}

namespace {

std::string excerpt_of(const std::string& raw) {
    constexpr std::size_t kMax = 200;
    if (raw.size() <= kMax) return raw;
    return raw.substr(0, kMax) + "...";
}

std::string trim_copy(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(b, e - b + 1);
}

TokenUsage parse_usage_object(const json& doc, const std::string& raw) {
    TokenUsage usage;
    if (!doc.contains("usage")) return usage;
    const json& u = doc["usage"];
    if (!u.is_object()) throw JudgeParseError("'usage' is not an object", excerpt_of(raw));
    for (const char* field : {"prompt_tokens", "completion_tokens"}) {
        if (!u.contains(field)) continue;
        const json& v = u[field];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw JudgeParseError(std::string("'usage.") + field + "' is not a non-negative integer",
                                  excerpt_of(raw));
        const auto value = v.get<std::uint64_t>();
        if (std::string_view(field) == "prompt_tokens")
            usage.prompt_tokens = value;
        else
            usage.completion_tokens = value;
    }
    return usage;
}

}  // namespace

JudgeResponse parse_structured(const std::string& raw, JudgeRole role) {
    json doc = json::parse(raw, nullptr, false);
    if (doc.is_discarded()) throw JudgeParseError("document is not valid JSON", excerpt_of(raw));
    if (!doc.is_object()) throw JudgeParseError("top-level value is not an object", excerpt_of(raw));

    JudgeResponse response;
    response.role = role;
    response.usage = parse_usage_object(doc, raw);

    if (role == JudgeRole::Decompose) {
        if (!doc.contains("claims") || !doc["claims"].is_array())
            throw JudgeParseError("missing 'claims' string array", excerpt_of(raw));
        for (const json& item : doc["claims"]) {
            if (!item.is_string())
                throw JudgeParseError("'claims' contains a non-string element", excerpt_of(raw));
            std::string text = trim_copy(item.get<std::string>());
            if (!text.empty()) response.claims.push_back(std::move(text));
        }
        return response;
    }

    if (!doc.contains("label") || !doc["label"].is_string())
        throw JudgeParseError("missing 'label' string", excerpt_of(raw));
    const std::string token = doc["label"].get<std::string>();
    const auto label = parse_label(token);
    if (!label)
        throw JudgeParseError("label '" + token + "' is outside {ENTAILED, CONTRADICTED, BASELESS}",
                              excerpt_of(raw));
    response.label = *label;

    if (doc.contains("evidence")) {
        if (!doc["evidence"].is_array())
            throw JudgeParseError("'evidence' is not an array", excerpt_of(raw));
        for (const json& item : doc["evidence"]) {
            if (!item.is_string())
                throw JudgeParseError("'evidence' contains a non-string element", excerpt_of(raw));
            std::string text = trim_copy(item.get<std::string>());
            if (!text.empty()) response.evidence_texts.push_back(std::move(text));
        }
    }

    // A BASELESS verdict that quotes evidence contradicts itself; keep the
    // label, drop the quotes, and mark the response so the verdict is flagged.
    if (response.label == Label::Baseless && !response.evidence_texts.empty()) {
        response.evidence_texts.clear();
        response.repaired = true;
    }
    return response;
}

std::string serialize_response(const JudgeResponse& response) {
    ordered_json doc;
    if (response.role == JudgeRole::Decompose) {
        doc["claims"] = response.claims;
    } else {
        doc["label"] = to_string(response.label);
        doc["evidence"] = response.evidence_texts;
    }
    if (response.usage.prompt_tokens != 0 || response.usage.completion_tokens != 0) {
        doc["usage"] = {{"prompt_tokens", response.usage.prompt_tokens},
                        {"completion_tokens", response.usage.completion_tokens}};
    }
    return doc.dump();
}

std::string request_key(const JudgeRequest& request) {
    std::string key;
    key += to_string(request.role);
    key += '\x1f';
    key += request.claim.value_or("");
    key += '\x1f';
    key += request.passage;
    key += '\x1f';
    key += request.local_label ? to_string(*request.local_label) : "";
    return key;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::string request_key_hash(const JudgeRequest& request) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(request_key(request))));
    return std::string(buf);
}

ScriptedJudge ScriptedJudge::from_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    ScriptedJudge judge;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw std::runtime_error("script directory does not exist: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    for (const fs::path& p : files) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read script file: " + p.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        judge.scripts_[p.stem().string()] = buf.str();
    }
    return judge;
}

void ScriptedJudge::add_script(const JudgeRequest& shape, const std::string& raw_document) {
    validate_request(shape);
    scripts_[request_key_hash(shape)] = raw_document;
}

void ScriptedJudge::save_directory(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& [hash, raw] : scripts_) {
        std::ofstream out(fs::path(dir) / (hash + ".json"), std::ios::binary);
        if (!out) throw std::runtime_error("cannot write script file under: " + dir);
        out << raw;
    }
}

JudgeResponse ScriptedJudge::submit(const JudgeRequest& request) {
    validate_request(request);
    const std::string hash = request_key_hash(request);
    auto it = scripts_.find(hash);
    if (it == scripts_.end()) {
        std::string what = "no scripted response for ";
        what += to_string(request.role);
        what += " request ";
        what += hash;
        if (request.claim) what += " (claim: \"" + *request.claim + "\")";
        throw ScriptMissError(what);
    }
    return parse_structured(it->second, request.role);
}

// ---------------------------------------------------------------------------
// Remote backend

struct RemoteJudge::Impl {
    RemoteJudgeConfig config;
    std::string host;         // scheme://authority
    std::string path_prefix;  // e.g. "/v1"
    std::counting_semaphore<4096> slots;

    explicit Impl(RemoteJudgeConfig cfg)
        : config(std::move(cfg)), slots(std::max(1, std::min(config.concurrency, 4096))) {
        std::string url = config.base_url;
        while (!url.empty() && url.back() == '/') url.pop_back();
        const std::size_t scheme = url.find("://");
        const std::size_t path_start =
            scheme == std::string::npos ? url.find('/') : url.find('/', scheme + 3);
        if (path_start == std::string::npos) {
            host = url;
        } else {
            host = url.substr(0, path_start);
            path_prefix = url.substr(path_start);
        }
    }
};

RemoteJudge::RemoteJudge(RemoteJudgeConfig config) : impl_(new Impl(std::move(config))) {
    if (impl_->config.api_key.empty()) {
        delete impl_;
        throw std::invalid_argument("remote judge requires an API key");
    }
}

RemoteJudge::~RemoteJudge() { delete impl_; }

JudgeResponse RemoteJudge::submit(const JudgeRequest& request) {
    validate_request(request);
    const PromptMessages messages = render_prompt(request);

    ordered_json body;
    body["model"] = impl_->config.model;
    body["temperature"] = request.decoding.temperature;
    body["seed"] = request.decoding.seed;
    body["messages"] = ordered_json::array({
        ordered_json{{"role", "system"}, {"content", messages.system}},
        ordered_json{{"role", "user"}, {"content", messages.user}},
    });
    if (impl_->config.json_mode) body["response_format"] = ordered_json{{"type", "json_object"}};
    const std::string payload = body.dump();

    impl_->slots.acquire();
    struct Release {
        std::counting_semaphore<4096>* s;
        ~Release() { s->release(); }
    } release{&impl_->slots};

    std::string last_error = "no attempt made";
    const int attempts = std::max(1, impl_->config.max_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = impl_->config.backoff_base * (1LL << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(impl_->host);
        client.set_connection_timeout(impl_->config.timeout);
        client.set_read_timeout(impl_->config.timeout);
        client.set_write_timeout(impl_->config.timeout);
        client.set_bearer_token_auth(impl_->config.api_key);

        auto res = client.Post(impl_->path_prefix + "/chat/completions", payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + excerpt_of(res->body);
            continue;
        }
        json envelope = json::parse(res->body, nullptr, false);
        if (envelope.is_discarded() || !envelope.contains("choices") || !envelope["choices"].is_array() ||
            envelope["choices"].empty() || !envelope["choices"][0].contains("message") ||
            !envelope["choices"][0]["message"].contains("content") ||
            !envelope["choices"][0]["message"]["content"].is_string()) {
            last_error = "malformed completion envelope: " + excerpt_of(res->body);
            continue;
        }
        const std::string content = envelope["choices"][0]["message"]["content"].get<std::string>();
        JudgeResponse response;
        try {
            response = parse_structured(content, request.role);
        } catch (const JudgeParseError& e) {
            last_error = std::string("schema parse failure: ") + e.what() + " in " + excerpt_of(content);
            continue;
        }
        if (envelope.contains("usage") && envelope["usage"].is_object()) {
            const json& u = envelope["usage"];
            if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number())
                response.usage.prompt_tokens = u["prompt_tokens"].get<std::uint64_t>();
            if (u.contains("completion_tokens") && u["completion_tokens"].is_number())
                response.usage.completion_tokens = u["completion_tokens"].get<std::uint64_t>();
        }
        return response;
    }
    throw JudgeError("judge call failed after " + std::to_string(attempts) +
                     " attempt(s); last error: " + last_error);
}

void CostLedger::count_request(JudgeRole role) {
    switch (role) {
        case JudgeRole::Decompose: ++decompose_requests; break;
        case JudgeRole::Local: ++local_requests; break;
        case JudgeRole::Global: ++global_requests; break;
    }
}

void CostLedger::add_usage(const TokenUsage& usage) {
    prompt_tokens += usage.prompt_tokens;
    completion_tokens += usage.completion_tokens;
}

void CostLedger::add(const JudgeResponse& response) {
    count_request(response.role);
    add_usage(response.usage);
}

CostLedger& CostLedger::operator+=(const CostLedger& other) {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    decompose_requests += other.decompose_requests;
    local_requests += other.local_requests;
    global_requests += other.global_requests;
    return *this;
}

double CostLedger::cost_usd(const PriceTable& prices) const {
    return static_cast<double>(prompt_tokens) / 1e6 * prices.prompt_usd_per_1m +
           static_cast<double>(completion_tokens) / 1e6 * prices.completion_usd_per_1m;
}

}  // namespace ragaudit

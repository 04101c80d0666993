#include <doctest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ragaudit/judge.hpp"
#include "ragaudit/prompts.hpp"
#include "support/fixtures.hpp"

using namespace ragaudit;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

JudgeRequest local_request(std::string claim, std::string passage) {
    JudgeRequest request;
    request.role = JudgeRole::Local;
    request.claim = std::move(claim);
    request.passage = std::move(passage);
    return request;
}

JudgeRequest global_request(std::string claim, std::string passage, Label local,
                            std::optional<std::string> focus = std::nullopt) {
    JudgeRequest request;
    request.role = JudgeRole::Global;
    request.claim = std::move(claim);
    request.passage = std::move(passage);
    request.local_label = local;
    request.focus = std::move(focus);
    return request;
}

}  // namespace

TEST_CASE("role names") {
    CHECK(std::string(to_string(JudgeRole::Decompose)) == "DECOMPOSE");
    CHECK(std::string(to_string(JudgeRole::Local)) == "LOCAL");
    CHECK(std::string(to_string(JudgeRole::Global)) == "GLOBAL");
}

TEST_CASE("request validation") {
    JudgeRequest decompose;
    decompose.role = JudgeRole::Decompose;
    decompose.passage = "A sentence.";
    CHECK_NOTHROW(validate_request(decompose));
    decompose.claim = "stray";
    CHECK_THROWS_AS(validate_request(decompose), std::invalid_argument);

    JudgeRequest local = local_request("c", "p");
    CHECK_NOTHROW(validate_request(local));
    local.claim.reset();
    CHECK_THROWS_AS(validate_request(local), std::invalid_argument);
    local = local_request("c", "p");
    local.focus = "hint";
    CHECK_THROWS_AS(validate_request(local), std::invalid_argument);

    CHECK_NOTHROW(validate_request(global_request("c", "ctx", Label::Baseless)));
    CHECK_NOTHROW(validate_request(global_request("c", "ctx", Label::Entailed, "chunk")));
    CHECK_NOTHROW(validate_request(global_request("c", "ctx", Label::Contradicted, "chunk")));
    // a decisive local label must carry the focus hint, an indecisive one must not
    CHECK_THROWS_AS(validate_request(global_request("c", "ctx", Label::Entailed)),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate_request(global_request("c", "ctx", Label::Baseless, "chunk")),
                    std::invalid_argument);
    JudgeRequest global = global_request("c", "ctx", Label::Entailed, "chunk");
    global.local_label.reset();
    CHECK_THROWS_AS(validate_request(global), std::invalid_argument);
}

TEST_CASE("verdict document parsing") {
    SUBCASE("well-formed local verdict") {
        const auto r = parse_structured(R"({"label": "ENTAILED", "evidence": ["a quote"]})",
                                        JudgeRole::Local);
        CHECK(r.role == JudgeRole::Local);
        CHECK(r.label == Label::Entailed);
        CHECK(r.evidence_texts == std::vector<std::string>{"a quote"});
        CHECK_FALSE(r.repaired);
        CHECK(r.usage == TokenUsage{});
    }

    SUBCASE("evidence strings are trimmed and blanks dropped") {
        const auto r = parse_structured(
            R"({"label": "CONTRADICTED", "evidence": ["  x ", "", "   "]})", JudgeRole::Local);
        CHECK(r.evidence_texts == std::vector<std::string>{"x"});
    }

    SUBCASE("label tokens are exact") {
        CHECK_THROWS_AS(parse_structured(R"({"label": "MAYBE"})", JudgeRole::Local),
                        JudgeParseError);
        CHECK_THROWS_AS(parse_structured(R"({"label": "entailed"})", JudgeRole::Local),
                        JudgeParseError);
        CHECK_THROWS_AS(parse_structured(R"({"label": "ENTAILED "})", JudgeRole::Local),
                        JudgeParseError);
        CHECK_THROWS_AS(parse_structured(R"({"label": 3})", JudgeRole::Local), JudgeParseError);
        CHECK_THROWS_AS(parse_structured(R"({"evidence": []})", JudgeRole::Local),
                        JudgeParseError);
        try {
            parse_structured(R"({"label": "MAYBE"})", JudgeRole::Local);
            FAIL("expected JudgeParseError");
        } catch (const JudgeParseError& e) {
            CHECK(e.excerpt.find("MAYBE") != std::string::npos);
            CHECK(std::string(e.what()).find("MAYBE") != std::string::npos);
        }
    }

    SUBCASE("non-document input") {
        CHECK_THROWS_AS(parse_structured("not json at all", JudgeRole::Local), JudgeParseError);
        CHECK_THROWS_AS(parse_structured(R"(["ENTAILED"])", JudgeRole::Local), JudgeParseError);
        CHECK_THROWS_AS(parse_structured("", JudgeRole::Local), JudgeParseError);
        const std::string garbage(300, '@');
        try {
            parse_structured(garbage, JudgeRole::Local);
            FAIL("expected JudgeParseError");
        } catch (const JudgeParseError& e) {
            CHECK(e.excerpt.size() == 203);  // 200-char slice plus ellipsis
            CHECK(e.excerpt.substr(200) == "...");
        }
    }

    SUBCASE("malformed evidence") {
        CHECK_THROWS_AS(parse_structured(R"({"label": "ENTAILED", "evidence": "quote"})",
                                         JudgeRole::Local),
                        JudgeParseError);
        CHECK_THROWS_AS(parse_structured(R"({"label": "ENTAILED", "evidence": [1]})",
                                         JudgeRole::Local),
                        JudgeParseError);
    }

    SUBCASE("a baseless verdict quoting evidence is repaired") {
        const auto r = parse_structured(R"({"label": "BASELESS", "evidence": ["stray quote"]})",
                                        JudgeRole::Global);
        CHECK(r.label == Label::Baseless);
        CHECK(r.evidence_texts.empty());
        CHECK(r.repaired);

        const auto clean = parse_structured(R"({"label": "BASELESS", "evidence": []})",
                                            JudgeRole::Global);
        CHECK_FALSE(clean.repaired);
    }

    SUBCASE("usage object") {
        const auto r = parse_structured(
            R"({"label": "ENTAILED", "usage": {"prompt_tokens": 10, "completion_tokens": 3}})",
            JudgeRole::Local);
        CHECK(r.usage == TokenUsage{10, 3});
        CHECK_THROWS_AS(parse_structured(R"({"label": "ENTAILED", "usage": 5})", JudgeRole::Local),
                        JudgeParseError);
        CHECK_THROWS_AS(
            parse_structured(R"({"label": "ENTAILED", "usage": {"prompt_tokens": -1}})",
                             JudgeRole::Local),
            JudgeParseError);
        CHECK_THROWS_AS(
            parse_structured(R"({"label": "ENTAILED", "usage": {"prompt_tokens": "10"}})",
                             JudgeRole::Local),
            JudgeParseError);
    }

    SUBCASE("decompose documents") {
        const auto r = parse_structured(R"({"claims": [" First claim. ", "", "Second claim."]})",
                                        JudgeRole::Decompose);
        CHECK(r.role == JudgeRole::Decompose);
        CHECK(r.claims == std::vector<std::string>{"First claim.", "Second claim."});
        CHECK_THROWS_AS(parse_structured(R"({"label": "ENTAILED"})", JudgeRole::Decompose),
                        JudgeParseError);
        CHECK_THROWS_AS(parse_structured(R"({"claims": "one"})", JudgeRole::Decompose),
                        JudgeParseError);
        CHECK_THROWS_AS(parse_structured(R"({"claims": [7]})", JudgeRole::Decompose),
                        JudgeParseError);
    }
}

TEST_CASE("serialize then parse is the identity") {
    std::vector<JudgeResponse> cases;
    {
        JudgeResponse r;
        r.role = JudgeRole::Decompose;
        r.claims = {"The sky is blue.", "Water is wet."};
        r.usage = {120, 40};
        cases.push_back(r);
    }
    {
        JudgeResponse r;
        r.role = JudgeRole::Local;
        r.label = Label::Entailed;
        r.evidence_texts = {"quote one", "quote two"};
        cases.push_back(r);
    }
    {
        JudgeResponse r;
        r.role = JudgeRole::Global;
        r.label = Label::Contradicted;
        r.evidence_texts = {"caf\xC3\xA9 ouvert"};
        r.usage = {200, 30};
        cases.push_back(r);
    }
    {
        JudgeResponse r;
        r.role = JudgeRole::Local;
        r.label = Label::Baseless;
        cases.push_back(r);
    }
    for (const JudgeResponse& original : cases) {
        const auto round = parse_structured(serialize_response(original), original.role);
        CHECK(round.role == original.role);
        CHECK(round.claims == original.claims);
        CHECK(round.label == original.label);
        CHECK(round.evidence_texts == original.evidence_texts);
        CHECK(round.repaired == original.repaired);
        CHECK(round.usage == original.usage);
    }
}

TEST_CASE("request keys and hashes") {
    const auto req = local_request("The sky is green.", "The sky is blue.");
    CHECK(request_key(req) == "LOCAL\x1fThe sky is green.\x1fThe sky is blue.\x1f");
    CHECK(request_key_hash(req) == "c971cd832f084484");

    // canonical FNV-1a 64 vectors
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 12638187200555641996ull);
    CHECK(fnv1a64("foobar") == 9625390261332436968ull);

    // independent re-implementation over a spread of inputs
    const auto oracle = [](std::string_view bytes) {
        unsigned long long h = 0xcbf29ce484222325ull;
        for (char c : bytes) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
        return static_cast<std::uint64_t>(h);
    };
    for (std::string_view s : {"", "x", "claim", "\x1f", "caf\xC3\xA9", "a longer sentence."})
        CHECK(fnv1a64(s) == oracle(s));

    // field boundaries matter: moving a character across the separator changes the key
    CHECK(request_key_hash(local_request("ab", "c")) != request_key_hash(local_request("a", "bc")));
    // role and local label both participate
    CHECK(request_key(local_request("c", "p")) !=
          request_key(global_request("c", "p", Label::Baseless)));
    CHECK(request_key(global_request("c", "p", Label::Entailed, "f")) !=
          request_key(global_request("c", "p", Label::Contradicted, "f")));
    // the focus hint is derived from (claim, passage, label), so it stays out
    CHECK(request_key(global_request("c", "p", Label::Entailed, "f1")) ==
          request_key(global_request("c", "p", Label::Entailed, "f2")));
}

TEST_CASE("scripted judge") {
    ScriptedJudge judge;
    const auto shape = local_request("The trial lasts 14 days.", "Some chunk text.");
    judge.add_script(shape, R"({"label": "ENTAILED", "evidence": ["14 days"]})");
    REQUIRE(judge.size() == 1);

    SUBCASE("replays the recorded document") {
        const auto r = judge.submit(shape);
        CHECK(r.label == Label::Entailed);
        CHECK(r.evidence_texts == std::vector<std::string>{"14 days"});
    }

    SUBCASE("is a pure function of the request key") {
        const auto a = judge.submit(shape);
        const auto b = judge.submit(shape);
        CHECK(a.label == b.label);
        CHECK(a.evidence_texts == b.evidence_texts);
        CHECK(a.usage == b.usage);
    }

    SUBCASE("a missing script is a hard error, not a judge failure") {
        const auto other = local_request("Another claim.", "Some chunk text.");
        CHECK_THROWS_AS(judge.submit(other), ScriptMissError);
        try {
            judge.submit(other);
        } catch (const ScriptMissError& e) {
            CHECK(std::string(e.what()).find("Another claim.") != std::string::npos);
            CHECK(std::string(e.what()).find("LOCAL") != std::string::npos);
            CHECK(dynamic_cast<const JudgeError*>(&e) == nullptr);
        }
    }

    SUBCASE("directory round-trip") {
        const auto dir = fixtures::scratch_dir("scripts-roundtrip");
        judge.add_script(global_request("The trial lasts 14 days.", "full context",
                                        Label::Entailed, "Some chunk text."),
                         R"({"label": "ENTAILED", "evidence": []})");
        judge.save_directory(dir.string());
        auto reloaded = ScriptedJudge::from_directory(dir.string());
        CHECK(reloaded.size() == 2);
        const auto r = reloaded.submit(shape);
        CHECK(r.label == Label::Entailed);
        CHECK(r.evidence_texts == std::vector<std::string>{"14 days"});
        std::filesystem::remove_all(dir);
    }

    SUBCASE("missing directory") {
        CHECK_THROWS_AS(ScriptedJudge::from_directory("/nonexistent/scripts"),
                        std::runtime_error);
    }
}

TEST_CASE("cost ledger") {
    CostLedger ledger;
    JudgeResponse decompose;
    decompose.role = JudgeRole::Decompose;
    decompose.usage = {1000, 500};
    JudgeResponse local;
    local.role = JudgeRole::Local;
    local.usage = {1000, 500};
    ledger.add(decompose);
    ledger.add(local);
    ledger.count_request(JudgeRole::Global);  // a failed call: counted, no tokens

    CHECK(ledger.prompt_tokens == 2000);
    CHECK(ledger.completion_tokens == 1000);
    CHECK(ledger.decompose_requests == 1);
    CHECK(ledger.local_requests == 1);
    CHECK(ledger.global_requests == 1);
    CHECK(ledger.total_requests() == 3);

    // 2000 prompt tokens at $0.15/1M plus 1000 completion tokens at $0.60/1M
    const PriceTable prices{0.15, 0.6};
    CHECK(ledger.cost_usd(prices) == doctest::Approx(0.0009).epsilon(1e-12));
    CHECK(CostLedger{}.cost_usd(prices) == 0.0);

    CostLedger other;
    other.add(local);
    ledger += other;
    CHECK(ledger.prompt_tokens == 3000);
    CHECK(ledger.local_requests == 2);
    CHECK(ledger.total_requests() == 4);
}

namespace {

// In-process chat-completion endpoint for exercising the remote backend.
struct TestServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit TestServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

std::string envelope(const std::string& content, std::uint64_t prompt = 0,
                     std::uint64_t completion = 0) {
    ordered_json doc;
    doc["choices"] = ordered_json::array({ordered_json{{"message", {{"content", content}}}}});
    if (prompt || completion)
        doc["usage"] = {{"prompt_tokens", prompt}, {"completion_tokens", completion}};
    return doc.dump();
}

RemoteJudgeConfig fast_config(const std::string& base_url) {
    RemoteJudgeConfig config;
    config.base_url = base_url;
    config.model = "test-model";
    config.api_key = "test-key";
    config.max_retries = 3;
    config.backoff_base = std::chrono::milliseconds(1);
    return config;
}

}  // namespace

TEST_CASE("remote judge happy path sends the wire format and reads the envelope") {
    std::string seen_auth;
    std::string seen_body;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        res.set_content(envelope(R"({"label": "CONTRADICTED", "evidence": ["the quote"],)"
                                 R"( "usage": {"prompt_tokens": 1, "completion_tokens": 1}})",
                                 77, 33),
                        "application/json");
    });

    RemoteJudge judge(fast_config(server.base_url()));
    auto request = local_request("The sky is green.", "The sky is blue today.");
    request.question = "What color is the sky?";
    const auto response = judge.submit(request);

    CHECK(response.label == Label::Contradicted);
    CHECK(response.evidence_texts == std::vector<std::string>{"the quote"});
    // the envelope's usage wins over whatever the document claims
    CHECK(response.usage == TokenUsage{77, 33});

    CHECK(seen_auth == "Bearer test-key");
    const json body = json::parse(seen_body);
    CHECK(body["model"] == "test-model");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["seed"] == 42);
    CHECK(body["response_format"]["type"] == "json_object");
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["role"] == "user");
    const auto user = body["messages"][1]["content"].get<std::string>();
    CHECK(user.find("The sky is green.") != std::string::npos);
    CHECK(user.find("The sky is blue today.") != std::string::npos);
    CHECK(user.find("What color is the sky?") != std::string::npos);
}

TEST_CASE("remote judge retries transient failures") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        const int n = ++calls;
        if (n < 3) {
            res.status = 500;
            res.set_content("overloaded", "text/plain");
            return;
        }
        res.set_content(envelope(R"({"label": "ENTAILED", "evidence": []})"), "application/json");
    });

    RemoteJudge judge(fast_config(server.base_url()));
    const auto response = judge.submit(local_request("c", "p"));
    CHECK(response.label == Label::Entailed);
    CHECK(calls.load() == 3);
}

TEST_CASE("remote judge gives up after the retry budget") {
    SUBCASE("persistent server errors") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            ++calls;
            res.status = 503;
        });
        RemoteJudge judge(fast_config(server.base_url()));
        CHECK_THROWS_AS(judge.submit(local_request("c", "p")), JudgeError);
        CHECK(calls.load() == 3);
    }

    SUBCASE("persistently malformed verdict documents") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            ++calls;
            res.set_content(envelope(R"({"label": "MAYBE"})"), "application/json");
        });
        RemoteJudge judge(fast_config(server.base_url()));
        try {
            judge.submit(local_request("c", "p"));
            FAIL("expected JudgeError");
        } catch (const JudgeError& e) {
            CHECK(std::string(e.what()).find("3 attempt(s)") != std::string::npos);
            CHECK(std::string(e.what()).find("MAYBE") != std::string::npos);
        }
        CHECK(calls.load() == 3);
    }

    SUBCASE("malformed completion envelope") {
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"choices": []})", "application/json");
        });
        auto config = fast_config(server.base_url());
        config.max_retries = 1;
        RemoteJudge judge(config);
        CHECK_THROWS_AS(judge.submit(local_request("c", "p")), JudgeError);
    }
}

TEST_CASE("remote judge caps in-flight requests") {
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        const int now = ++in_flight;
        int expected = peak.load();
        while (now > expected && !peak.compare_exchange_weak(expected, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(40));
        --in_flight;
        res.set_content(envelope(R"({"label": "BASELESS"})"), "application/json");
    });

    auto config = fast_config(server.base_url());
    config.concurrency = 2;
    RemoteJudge judge(config);

    std::vector<std::thread> callers;
    callers.reserve(6);
    for (int i = 0; i < 6; ++i) {
        callers.emplace_back([&judge, i] {
            judge.submit(local_request("claim " + std::to_string(i), "passage"));
        });
    }
    for (auto& t : callers) t.join();
    CHECK(peak.load() <= 2);
    CHECK(peak.load() >= 1);
}

TEST_CASE("remote judge requires an api key") {
    RemoteJudgeConfig config;
    config.api_key = "";
    CHECK_THROWS_AS(RemoteJudge{config}, std::invalid_argument);
}

TEST_CASE("prompt rendering") {
    CHECK(std::string(kPromptTemplateVersion) == "ragaudit-prompts-v1");

    JudgeRequest decompose;
    decompose.role = JudgeRole::Decompose;
    decompose.passage = "The trial lasts 14 days and includes priority email support.";
    const auto dp = render_prompt(decompose);
    CHECK(dp.system.find("claims") != std::string::npos);
    CHECK(dp.user.find(decompose.passage) != std::string::npos);

    const auto lp = render_prompt(local_request("A claim.", "A chunk."));
    CHECK(lp.system.find("ENTAILED") != std::string::npos);
    CHECK(lp.system.find("CONTRADICTED") != std::string::npos);
    CHECK(lp.system.find("BASELESS") != std::string::npos);
    CHECK(lp.user.find("A claim.") != std::string::npos);
    CHECK(lp.user.find("A chunk.") != std::string::npos);

    const auto focused =
        render_prompt(global_request("A claim.", "Full context.", Label::Entailed, "The chunk."));
    CHECK(focused.user.find("The chunk.") != std::string::npos);
    CHECK(focused.user.find("ENTAILED") != std::string::npos);
    const auto unfocused = render_prompt(global_request("A claim.", "Full context.", Label::Baseless));
    CHECK(unfocused.user.find("BASELESS") != std::string::npos);
    CHECK(unfocused.user.find("The chunk.") == std::string::npos);

    CHECK_THROWS_AS(render_prompt(global_request("c", "ctx", Label::Entailed)),
                    std::invalid_argument);
}

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "recall/error.hpp"
#include "recall/llm.hpp"

using namespace recall;
using llm::Bindings;
using llm::RoleId;
using llm::ScriptEntry;
using llm::ScriptedBackend;

TEST_CASE("template rendering binds placeholders and reports unbound ones") {
    CHECK(llm::render_template("do {verb} the {noun}", {{"verb", "move"}, {"noun", "mug"}}) ==
          "do move the mug");
    CHECK_THROWS_WITH_AS(llm::render_template("{trajectory}", {}),
                         doctest::Contains("{trajectory}"), Error);
    // extra bindings are ignored; literal braces survive
    CHECK(llm::render_template("a { b } c", {{"unused", "x"}}) == "a { b } c");
}

TEST_CASE("default templates render for every role") {
    const auto lib = llm::PromptLibrary::defaults();
    const Bindings everything = {
        {"env_description", "room"},     {"few_shot", "example"},
        {"focus_points", "1. focus"},    {"trajectory", "steps"},
        {"reflections", "lessons"},      {"success_trajectory", "win"},
        {"fail_trajectories", "losses"}, {"existing_tips", "1. tip"},
        {"key_information", "ki"},       {"similar_trajectories", "st"},
        {"tips", "1. tip"},
    };
    for (const auto* prompt : {&lib.focus, &lib.react, &lib.reflect, &lib.tips_compare,
                               &lib.tips_supplement, &lib.tips_success, &lib.tips_align,
                               &lib.kie, &lib.kir, &lib.policy}) {
        CHECK_FALSE(llm::render_template(prompt->user_template, everything).empty());
        CHECK_FALSE(prompt->system_text.empty());
    }
}

TEST_CASE("parse_numbered_list handles the common list shapes") {
    const auto items =
        llm::parse_numbered_list("1. check desk first\n2. open drawers in order", 5);
    REQUIRE(items.size() == 2);
    CHECK(items[0] == "check desk first");
    CHECK(items[1] == "open drawers in order");

    const auto dashed = llm::parse_numbered_list("- alpha\n* beta\n3) gamma", 5);
    REQUIRE(dashed.size() == 3);
    CHECK(dashed[2] == "gamma");
}

TEST_CASE("parse_numbered_list truncates to max_items") {
    std::string seven;
    for (int i = 1; i <= 7; ++i) seven += std::to_string(i) + ". tip " + std::to_string(i) + "\n";
    const auto items = llm::parse_numbered_list(seven, 5);
    REQUIRE(items.size() == 5);
    CHECK(items.back() == "tip 5");
}

TEST_CASE("parse_numbered_list rejects marker-free text") {
    CHECK_THROWS_WITH_AS(llm::parse_numbered_list("no tips", 5),
                         doctest::Contains("unparseable list"), ParseError);
    CHECK_THROWS_AS(llm::parse_numbered_list("1. x", 0), Error);
}

TEST_CASE("parse_numbered_list is idempotent on its own output") {
    const std::string text = "1. first tip\n- second tip\n3) third tip\n\nnoise";
    const auto once = llm::parse_numbered_list(text, 10);
    std::string rejoined;
    for (size_t i = 0; i < once.size(); ++i) {
        rejoined += std::to_string(i + 1) + ". " + once[i] + "\n";
    }
    CHECK(llm::parse_numbered_list(rejoined, 10) == once);
}

TEST_CASE("thought/action parsing") {
    const auto both = llm::parse_thought_action("think: mug is on desk\ntake mug from desk");
    CHECK(both.thought == "mug is on desk");
    CHECK(both.action == "take mug from desk");

    const auto action_only = llm::parse_thought_action("go to desk 1");
    CHECK(action_only.thought.empty());
    CHECK(action_only.action == "go to desk 1");

    const auto thought_only = llm::parse_thought_action("think: hmm\nthink: still thinking");
    CHECK(thought_only.action.empty());

    CHECK(llm::parse_thought_action("").action.empty());
}

TEST_CASE("scripted backend plays back per role in position order") {
    ScriptedBackend backend({{RoleId::ReAct, "", "first"},
                             {RoleId::Reflect, "", "lesson"},
                             {RoleId::ReAct, "", "second"}});
    const llm::RolePrompt dummy;
    CHECK(backend.complete(RoleId::ReAct, "s", "u", dummy).text == "first");
    CHECK(backend.complete(RoleId::Reflect, "s", "u", dummy).text == "lesson");
    CHECK(backend.complete(RoleId::ReAct, "s", "u", dummy).text == "second");
    CHECK_THROWS_WITH_AS(backend.complete(RoleId::ReAct, "s", "u", dummy),
                         doctest::Contains("exhausted"), Error);
}

TEST_CASE("scripted expect substrings assert against the rendered prompt") {
    ScriptedBackend backend({{RoleId::Policy, "focus points", "go"}});
    const llm::RolePrompt dummy;
    CHECK_THROWS_WITH_AS(backend.complete(RoleId::Policy, "sys", "no match here", dummy),
                         doctest::Contains("expectation failed"), Error);

    ScriptedBackend ok({{RoleId::Policy, "focus points", "go"}});
    CHECK(ok.complete(RoleId::Policy, "sys", "the focus points are", dummy).text == "go");
}

TEST_CASE("script JSONL round-trips") {
    const std::string jsonl =
        "{\"role\":\"ReAct\",\"expect\":\"drawer\",\"response\":\"open drawer 1\"}\n"
        "{\"role\":\"Tips\",\"response\":\"1. a tip\"}\n";
    const auto entries = ScriptedBackend::parse_jsonl(jsonl);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].role == RoleId::ReAct);
    CHECK(entries[0].expect == "drawer");
    CHECK(entries[1].role == RoleId::Tips);
    CHECK(llm::script_to_jsonl(entries) == jsonl);

    CHECK_THROWS_AS(ScriptedBackend::parse_jsonl("{\"role\":\"Nope\",\"response\":\"x\"}"),
                    ParseError);
    CHECK_THROWS_AS(ScriptedBackend::parse_jsonl("{\"role\":\"Tips\"}"), ParseError);
}

TEST_CASE("gateway records every call and fails loudly on empty responses") {
    auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptEntry>{
        {RoleId::Reflect, "", "a lesson"},
        {RoleId::Reflect, "", ""},
    });
    llm::Gateway gateway(llm::PromptLibrary::defaults(), backend);
    CHECK(gateway.complete(RoleId::Reflect, {{"trajectory", "t"}}) == "a lesson");
    CHECK_THROWS_WITH_AS(gateway.complete(RoleId::Reflect, {{"trajectory", "t"}}),
                         doctest::Contains("empty response"), Error);
    // unbound placeholder fails before reaching the backend
    CHECK_THROWS_AS(gateway.complete(RoleId::Reflect, {}), Error);

    const auto trace = gateway.trace_snapshot();
    REQUIRE(trace.size() == 2);  // two backend calls; the render failure never called out
    CHECK(trace[0].response_text == "a lesson");
    CHECK(trace[0].error.empty());
    CHECK(trace[0].latency_ms == 0.0);
    CHECK_FALSE(trace[1].error.empty());
}

TEST_CASE("backend config validation names fields") {
    llm::BackendConfig config;
    config.kind = "remote";
    CHECK_THROWS_WITH(config.validate(), doctest::Contains("backend.base_url"));
    config.kind = "scripted";
    config.script_path = "";
    CHECK_THROWS_WITH(config.validate(), doctest::Contains("backend.script_path"));
    config.kind = "neither";
    CHECK_THROWS_WITH(config.validate(), doctest::Contains("backend.kind"));
}

namespace {

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit TestServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        thread.join();
    }
};

}  // namespace

TEST_CASE("remote backend speaks the chat-completions protocol") {
    std::atomic<int> calls{0};
    std::string seen_body;
    std::string seen_auth;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        seen_body = req.body;
        seen_auth = req.get_header_value("Authorization");
        nlohmann::json reply = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "go to desk 1"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });

    setenv("RECALL_TEST_KEY", "sk-test", 1);
    llm::BackendConfig config;
    config.kind = "remote";
    config.base_url = "http://127.0.0.1:" + std::to_string(server.port) + "/v1";
    config.api_key_env_var = "RECALL_TEST_KEY";
    config.max_retries = 0;
    config.model_by_role["Policy"] = "test-model-policy";
    llm::RemoteBackend backend(config);

    llm::RolePrompt prompt;
    prompt.role = RoleId::Policy;
    prompt.temperature = 0.0;
    prompt.max_output_tokens = 64;
    const auto result = backend.complete(RoleId::Policy, "system text", "user text", prompt);
    CHECK(result.text == "go to desk 1");
    CHECK(result.attempt_count == 1);
    CHECK(calls == 1);
    CHECK(seen_auth == "Bearer sk-test");

    const auto body = nlohmann::json::parse(seen_body);
    CHECK(body["model"] == "test-model-policy");
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == "system text");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["max_tokens"] == 64);
}

TEST_CASE("remote backend retries server errors then succeeds") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 500;
            res.set_content("overloaded", "text/plain");
            return;
        }
        nlohmann::json reply = {
            {"choices", {{{"message", {{"content", "recovered"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });

    llm::BackendConfig config;
    config.kind = "remote";
    config.base_url = "http://127.0.0.1:" + std::to_string(server.port) + "/v1";
    config.max_retries = 2;
    llm::RemoteBackend backend(config);
    const auto result =
        backend.complete(RoleId::ReAct, "s", "u", llm::RolePrompt{});
    CHECK(result.text == "recovered");
    CHECK(result.attempt_count == 3);
    CHECK(calls == 3);
}

TEST_CASE("remote backend surfaces transport failure after its retry budget") {
    llm::BackendConfig config;
    config.kind = "remote";
    config.base_url = "http://127.0.0.1:9";  // discard port; nothing listens
    config.max_retries = 1;
    config.timeout_s = 1.0;
    llm::RemoteBackend backend(config);
    CHECK_THROWS_WITH_AS(backend.complete(RoleId::ReAct, "s", "u", llm::RolePrompt{}),
                         doctest::Contains("after 2 attempt"), TransportError);

    // the gateway records the failed call exactly once
    auto shared = std::make_shared<llm::RemoteBackend>(config);
    llm::Gateway gateway(llm::PromptLibrary::defaults(), shared);
    CHECK_THROWS_AS(gateway.complete(RoleId::Reflect, {{"trajectory", "t"}}), TransportError);
    const auto trace = gateway.trace_snapshot();
    REQUIRE(trace.size() == 1);
    CHECK_FALSE(trace[0].error.empty());
}

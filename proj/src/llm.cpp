#include "recall/llm.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "recall/error.hpp"

namespace recall::llm {

using nlohmann::ordered_json;

namespace {

// One POST against an OpenAI-compatible endpoint. Transport failures land in
// *transport_error; HTTP-level outcomes in *status / *response_body.
void perform_http_post(const std::string& origin, const std::string& path,
                       const std::string& payload, const std::string& api_key,
                       double timeout_s, std::string* response_body, int* status,
                       std::string* transport_error) {
    httplib::Client client(origin);
    const auto timeout = std::chrono::duration<double>(timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    httplib::Headers headers;
    if (!api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key);
    }
    auto result = client.Post(path, headers, payload, "application/json");
    if (!result) {
        *transport_error = "transport: " + httplib::to_string(result.error());
        return;
    }
    *status = result->status;
    *response_body = result->body;
}

}  // namespace

// ============================================================================
// Roles
// ============================================================================

const char* role_name(RoleId role) {
    switch (role) {
        case RoleId::Focus: return "Focus";
        case RoleId::ReAct: return "ReAct";
        case RoleId::Reflect: return "Reflect";
        case RoleId::Tips: return "Tips";
        case RoleId::KIE: return "KIE";
        case RoleId::KIR: return "KIR";
        case RoleId::Policy: return "Policy";
    }
    return "?";
}

std::optional<RoleId> role_from_name(const std::string& name) {
    static const std::map<std::string, RoleId> table = {
        {"Focus", RoleId::Focus}, {"ReAct", RoleId::ReAct},   {"Reflect", RoleId::Reflect},
        {"Tips", RoleId::Tips},   {"KIE", RoleId::KIE},       {"KIR", RoleId::KIR},
        {"Policy", RoleId::Policy}};
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

// ============================================================================
// Template rendering
// ============================================================================

std::string render_template(const std::string& tmpl, const Bindings& bindings) {
    std::string out;
    out.reserve(tmpl.size());
    size_t i = 0;
    while (i < tmpl.size()) {
        const char c = tmpl[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        // placeholder: '{' [a-z_]+ '}'; anything else is literal text
        size_t j = i + 1;
        while (j < tmpl.size() && (std::islower(static_cast<unsigned char>(tmpl[j])) || tmpl[j] == '_')) {
            ++j;
        }
        if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
            const std::string name = tmpl.substr(i + 1, j - i - 1);
            auto it = bindings.find(name);
            if (it == bindings.end()) {
                throw Error("unbound placeholder {" + name + "}");
            }
            out += it->second;
            i = j + 1;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    if (out.empty()) {
        throw Error("rendered prompt is empty");
    }
    return out;
}

// ============================================================================
// Default prompt templates
// ============================================================================

PromptLibrary PromptLibrary::defaults() {
    PromptLibrary lib;

    const std::string agent_system =
        "You control an agent in an interactive text environment. At each turn you may "
        "write one line starting with 'think:' followed by your reasoning, then write "
        "exactly one action command for the environment. Output nothing else.";

    lib.focus.role = RoleId::Focus;
    lib.focus.system_text =
        "You prepare an agent for work in an interactive text environment. You study the "
        "environment description and example episodes, then write down what the agent "
        "should pay attention to.";
    lib.focus.user_template =
        "Environment description:\n{env_description}\n\n"
        "Example episodes:\n{few_shot}\n\n"
        "Write the most important points an agent should keep in mind when solving tasks "
        "in this environment. Answer with a numbered list of short, concrete points "
        "(at most 8).";

    lib.react.role = RoleId::ReAct;
    lib.react.system_text = agent_system;
    lib.react.user_template =
        "Environment description:\n{env_description}\n\n"
        "Example episodes:\n{few_shot}\n\n"
        "Focus points:\n{focus_points}\n\n"
        "Lessons from earlier attempts at this task:\n{reflections}\n\n"
        "Current episode so far:\n{trajectory}\n\n"
        "Produce the next step.";

    lib.reflect.role = RoleId::Reflect;
    lib.reflect.system_text =
        "You review a failed episode and write a short lesson for the next attempt.";
    lib.reflect.user_template =
        "The following episode failed:\n\n{trajectory}\n\n"
        "In a few sentences, explain what went wrong and state concretely what to do "
        "differently on the next attempt.";

    const std::string tips_system = "You distill reusable tips from agent episodes.";

    lib.tips_compare.role = RoleId::Tips;
    lib.tips_compare.system_text = tips_system;
    lib.tips_compare.user_template =
        "A task was attempted several times. The failed attempts:\n\n{fail_trajectories}\n\n"
        "The successful attempt:\n\n{success_trajectory}\n\n"
        "Compare the failures with the success and write tips that would prevent the "
        "observed mistakes. Answer with a numbered list of at most 5 one-sentence tips.";

    lib.tips_supplement.role = RoleId::Tips;
    lib.tips_supplement.system_text = tips_system;
    lib.tips_supplement.user_template =
        "The successful episode:\n\n{success_trajectory}\n\n"
        "Tips already recorded for this task:\n\n{existing_tips}\n\n"
        "Study the successful episode and add tips about what made it work that the "
        "recorded tips do not already cover. Answer with a numbered list of at most 3 "
        "one-sentence tips.";

    lib.tips_success.role = RoleId::Tips;
    lib.tips_success.system_text = tips_system;
    lib.tips_success.user_template =
        "The task was solved on the first attempt:\n\n{success_trajectory}\n\n"
        "Write tips capturing what made this episode work, phrased so they apply to "
        "similar tasks. Answer with a numbered list of at most 3 one-sentence tips.";

    lib.tips_align.role = RoleId::Tips;
    lib.tips_align.system_text =
        "You adapt tips written for one environment so they apply to another.";
    lib.tips_align.user_template =
        "Tips collected in a different environment:\n\n{existing_tips}\n\n"
        "Target environment:\n\n{env_description}\n\n"
        "Rewrite each tip so it makes sense in the target environment, keeping the "
        "underlying advice. Answer with a numbered list, one rewritten tip per item.";

    lib.kie.role = RoleId::KIE;
    lib.kie.system_text =
        "You summarize the current state of an agent episode into structured key "
        "information.";
    lib.kie.user_template =
        "Current episode:\n\n{trajectory}\n\n"
        "Summarize the episode under these headings, each on its own line:\n"
        "location: <where the agent is and what state it is in>\n"
        "inventory: <what the agent is carrying>\n"
        "completed: <subgoals already achieved>\n"
        "pending: <subgoals still open>\n"
        "anomaly: <what looked wrong in the most recent observations>";

    lib.kir.role = RoleId::KIR;
    lib.kir.system_text =
        "You help an agent recover when its plan has derailed. Ask yourself the "
        "questions that matter, answer them, then commit to a corrective plan.";
    lib.kir.user_template =
        "Current episode:\n\n{trajectory}\n\n"
        "Key information:\n\n{key_information}\n\n"
        "Successful episodes of similar tasks:\n\n{similar_trajectories}\n\n"
        "Write a short self-check as 'Q: ...' / 'A: ...' pairs, then a final line "
        "starting with 'plan:' giving the corrective plan for the next steps.";

    lib.policy.role = RoleId::Policy;
    lib.policy.system_text = agent_system;
    lib.policy.user_template =
        "Environment description:\n{env_description}\n\n"
        "Example episodes:\n{few_shot}\n\n"
        "Tips from similar tasks:\n{tips}\n\n"
        "Successful episodes of similar tasks:\n{similar_trajectories}\n\n"
        "Current episode so far:\n{trajectory}\n\n"
        "Produce the next step.";

    return lib;
}

const RolePrompt& PromptLibrary::for_role(RoleId role) const {
    switch (role) {
        case RoleId::Focus: return focus;
        case RoleId::ReAct: return react;
        case RoleId::Reflect: return reflect;
        case RoleId::Tips: return tips_compare;
        case RoleId::KIE: return kie;
        case RoleId::KIR: return kir;
        case RoleId::Policy: return policy;
    }
    return policy;
}

// ============================================================================
// Scripted backend
// ============================================================================

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries) {
    for (auto& e : entries) {
        streams_[e.role].push_back(std::move(e));
    }
}

std::vector<ScriptEntry> ScriptedBackend::parse_jsonl(const std::string& text) {
    std::vector<ScriptEntry> entries;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("script line " + std::to_string(line_no) + ": " + e.what());
        }
        ScriptEntry entry;
        const auto name = j.value("role", std::string());
        const auto role = role_from_name(name);
        if (!role) {
            throw ParseError("script line " + std::to_string(line_no) + ": unknown role '" +
                             name + "'");
        }
        entry.role = *role;
        entry.expect = j.value("expect", std::string());
        if (!j.contains("response")) {
            throw ParseError("script line " + std::to_string(line_no) + ": missing 'response'");
        }
        entry.response = j.at("response").get<std::string>();
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open script '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::make_shared<ScriptedBackend>(parse_jsonl(buf.str()));
}

CompletionResult ScriptedBackend::complete(RoleId role, const std::string& system_text,
                                           const std::string& user_text,
                                           const RolePrompt& prompt) {
    (void)prompt;
    std::lock_guard<std::mutex> lock(mutex_);
    auto& cursor = cursors_[role];
    const auto it = streams_.find(role);
    const size_t available = it == streams_.end() ? 0 : it->second.size();
    if (cursor >= available) {
        throw Error(std::string("scripted backend exhausted for role ") + role_name(role) +
                    " (call " + std::to_string(cursor + 1) + ", scripted " +
                    std::to_string(available) + ")");
    }
    const ScriptEntry& entry = it->second[cursor];
    if (!entry.expect.empty()) {
        const std::string rendered = system_text + "\n\n" + user_text;
        if (rendered.find(entry.expect) == std::string::npos) {
            throw Error(std::string("scripted expectation failed for role ") + role_name(role) +
                        " call " + std::to_string(cursor + 1) + ": prompt does not contain \"" +
                        entry.expect + "\"");
        }
    }
    ++cursor;
    return CompletionResult{entry.response, 1, 0.0};
}

size_t ScriptedBackend::remaining(RoleId role) const {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = streams_.find(role);
    if (it == streams_.end()) return 0;
    const auto cur = cursors_.find(role);
    const size_t used = cur == cursors_.end() ? 0 : cur->second;
    return it->second.size() - used;
}

std::string script_to_jsonl(const std::vector<ScriptEntry>& entries) {
    std::ostringstream out;
    for (const auto& e : entries) {
        ordered_json j;
        j["role"] = role_name(e.role);
        if (!e.expect.empty()) j["expect"] = e.expect;
        j["response"] = e.response;
        out << j.dump() << "\n";
    }
    return out.str();
}

// ============================================================================
// Backend config and remote backend
// ============================================================================

void BackendConfig::validate() const {
    if (kind != "scripted" && kind != "remote") {
        throw Error("backend.kind must be 'scripted' or 'remote', got '" + kind + "'");
    }
    if (kind == "remote") {
        if (base_url.empty()) throw Error("backend.base_url is required for a remote backend");
        if (api_key_env_var.empty()) {
            throw Error("backend.api_key_env_var is required for a remote backend");
        }
    }
    if (kind == "scripted" && script_path.empty()) {
        throw Error("backend.script_path is required for a scripted backend");
    }
    if (max_retries < 0) throw Error("backend.max_retries must be >= 0");
    if (timeout_s <= 0) throw Error("backend.timeout_s must be > 0");
}

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw Error("backend.base_url is required for a remote backend");
    }
    if (const char* key = std::getenv(config_.api_key_env_var.c_str())) {
        api_key_ = key;
    }
}

std::string RemoteBackend::id() const { return "remote:" + config_.base_url; }

CompletionResult RemoteBackend::complete(RoleId role, const std::string& system_text,
                                         const std::string& user_text,
                                         const RolePrompt& prompt) {
    const auto started = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         started)
            .count();
    };

    // split base_url into origin and path prefix
    std::string origin = config_.base_url;
    std::string path_prefix;
    const auto scheme_end = origin.find("://");
    if (scheme_end != std::string::npos) {
        const auto slash = origin.find('/', scheme_end + 3);
        if (slash != std::string::npos) {
            path_prefix = origin.substr(slash);
            origin = origin.substr(0, slash);
        }
    }
    while (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();

    std::string model = config_.default_model;
    if (auto it = config_.model_by_role.find(role_name(role)); it != config_.model_by_role.end()) {
        model = it->second;
    }

    ordered_json body;
    body["model"] = model;
    body["messages"] = ordered_json::array();
    body["messages"].push_back({{"role", "system"}, {"content", system_text}});
    body["messages"].push_back({{"role", "user"}, {"content", user_text}});
    body["temperature"] = prompt.temperature;
    body["max_tokens"] = prompt.max_output_tokens;
    const std::string payload = body.dump();

    std::string last_error;
    const int max_attempts = config_.max_retries + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50 * (attempt - 1)));
        }
        std::string response_body;
        int status = 0;
        std::string transport_error;
        perform_http_post(origin, path_prefix + "/chat/completions", payload, api_key_,
                          config_.timeout_s, &response_body, &status, &transport_error);
        if (!transport_error.empty()) {
            last_error = transport_error;
            continue;
        }
        if (status != 200) {
            last_error = "HTTP " + std::to_string(status) +
                         (response_body.empty() ? "" : (": " + response_body.substr(0, 200)));
            continue;
        }
        try {
            const auto j = ordered_json::parse(response_body);
            const std::string text =
                j.at("choices").at(0).at("message").at("content").get<std::string>();
            if (text.empty()) {
                last_error = "empty completion content";
                continue;
            }
            return CompletionResult{text, attempt, elapsed_ms()};
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed completion body: ") + e.what();
            continue;
        }
    }
    throw TransportError(std::string("remote completion for role ") + role_name(role) +
                         " failed after " + std::to_string(max_attempts) +
                         " attempt(s): " + last_error);
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
    config.validate();
    if (config.kind == "scripted") {
        return ScriptedBackend::from_file(config.script_path);
    }
    return std::make_shared<RemoteBackend>(config);
}

// ============================================================================
// Gateway
// ============================================================================

Gateway::Gateway(PromptLibrary library, std::shared_ptr<Backend> backend)
    : library_(std::move(library)), backend_(std::move(backend)) {}

std::string Gateway::complete(RoleId role, const Bindings& bindings) {
    return complete(library_.for_role(role), bindings);
}

std::string Gateway::complete(const RolePrompt& prompt, const Bindings& bindings) {
    const std::string user_text = render_template(prompt.user_template, bindings);
    GenerationRecord record;
    record.role = prompt.role;
    record.rendered_prompt = prompt.system_text + "\n\n" + user_text;
    record.backend_id = backend_->id();
    try {
        CompletionResult result = backend_->complete(prompt.role, prompt.system_text,
                                                     user_text, prompt);
        record.response_text = result.text;
        record.latency_ms = result.latency_ms;
        record.attempt_count = result.attempt_count;
        if (result.text.empty()) {
            record.error = "empty response";
        }
    } catch (const std::exception& e) {
        record.error = e.what();
        {
            std::lock_guard<std::mutex> lock(trace_mutex_);
            trace_.push_back(record);
        }
        throw;
    }
    {
        std::lock_guard<std::mutex> lock(trace_mutex_);
        trace_.push_back(record);
    }
    if (record.response_text.empty()) {
        throw Error(std::string("empty response from backend for role ") +
                    role_name(prompt.role));
    }
    return record.response_text;
}

std::vector<GenerationRecord> Gateway::trace_snapshot() const {
    std::lock_guard<std::mutex> lock(trace_mutex_);
    return trace_;
}

size_t Gateway::trace_size() const {
    std::lock_guard<std::mutex> lock(trace_mutex_);
    return trace_.size();
}

void Gateway::write_trace_jsonl(const std::filesystem::path& path) const {
    const auto snapshot = trace_snapshot();
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    for (const auto& r : snapshot) {
        ordered_json j;
        j["role"] = role_name(r.role);
        j["backend_id"] = r.backend_id;
        j["attempt_count"] = r.attempt_count;
        j["latency_ms"] = r.latency_ms;
        j["rendered_prompt"] = r.rendered_prompt;
        j["response_text"] = r.response_text;
        j["error"] = r.error;
        out << j.dump() << "\n";
    }
}

// ============================================================================
// Response parsing
// ============================================================================

namespace {

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

}  // namespace

std::vector<std::string> parse_numbered_list(const std::string& text, int max_items) {
    if (max_items < 1) {
        throw Error("parse_numbered_list: max_items must be >= 1");
    }
    std::vector<std::string> items;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        std::string item;
        if (line[0] == '-' || line[0] == '*') {
            item = trim(line.substr(1));
        } else if (std::isdigit(static_cast<unsigned char>(line[0]))) {
            size_t i = 0;
            while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
            if (i < line.size() && (line[i] == '.' || line[i] == ')')) {
                item = trim(line.substr(i + 1));
            } else {
                continue;
            }
        } else {
            continue;
        }
        if (!item.empty()) items.push_back(std::move(item));
        if (items.size() == static_cast<size_t>(max_items)) break;
    }
    if (items.empty()) {
        throw ParseError("unparseable list: no numbered or bulleted items found");
    }
    return items;
}

ThoughtAction parse_thought_action(const std::string& response) {
    ThoughtAction result;
    std::istringstream in(response);
    std::string raw;
    while (std::getline(in, raw)) {
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.rfind("think:", 0) == 0) {
            const std::string thought = trim(line.substr(6));
            if (result.thought.empty()) {
                result.thought = thought;
            } else {
                result.thought += " " + thought;
            }
            continue;
        }
        result.action = line;
        break;
    }
    return result;
}

}  // namespace recall::llm

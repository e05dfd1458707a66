#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace recall::llm {

// ============================================================================
// Roles and prompt templates
// ============================================================================

enum class RoleId { Focus, ReAct, Reflect, Tips, KIE, KIR, Policy };

const char* role_name(RoleId role);
std::optional<RoleId> role_from_name(const std::string& name);

// A template tagged with the role whose model assignment and scripted
// playback stream it uses. Several templates may share a role (the Tips
// role has compare / supplement / first-try / alignment variants).
struct RolePrompt {
    RoleId role = RoleId::Policy;
    std::string system_text;
    std::string user_template;  // named {placeholder} slots
    int max_output_tokens = 1024;
    double temperature = 0.0;
};

using Bindings = std::map<std::string, std::string>;

// Substitutes {name} slots. Throws naming the placeholder when a slot has
// no binding; bindings without a matching slot are ignored.
std::string render_template(const std::string& tmpl, const Bindings& bindings);

// Default templates for every role plus the Tips variants.
struct PromptLibrary {
    RolePrompt focus;
    RolePrompt react;
    RolePrompt reflect;
    RolePrompt tips_compare;
    RolePrompt tips_supplement;
    RolePrompt tips_success;
    RolePrompt tips_align;
    RolePrompt kie;
    RolePrompt kir;
    RolePrompt policy;

    static PromptLibrary defaults();

    // The unambiguous template for a role (Tips maps to the compare variant).
    const RolePrompt& for_role(RoleId role) const;
};

// ============================================================================
// Backends
// ============================================================================

struct CompletionResult {
    std::string text;
    int attempt_count = 1;
    double latency_ms = 0.0;  // transport latency; 0 for scripted playback
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    virtual CompletionResult complete(RoleId role, const std::string& system_text,
                                      const std::string& user_text,
                                      const RolePrompt& prompt) = 0;
    // Scripted playback must stay single-threaded to preserve order.
    virtual bool requires_serial_execution() const { return false; }
};

// One line of a playback script: {role, expect?, response}.
struct ScriptEntry {
    RoleId role = RoleId::Policy;
    std::string expect;  // substring asserted against the rendered prompt
    std::string response;
};

// Position-deterministic playback per role: the n-th call for a role yields
// the n-th scripted response for that role. A mismatched "expect" substring
// or an exhausted stream is an error.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptEntry> entries);

    static std::vector<ScriptEntry> parse_jsonl(const std::string& text);
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    std::string id() const override { return "scripted"; }
    CompletionResult complete(RoleId role, const std::string& system_text,
                              const std::string& user_text,
                              const RolePrompt& prompt) override;
    bool requires_serial_execution() const override { return true; }

    size_t remaining(RoleId role) const;

private:
    std::map<RoleId, std::vector<ScriptEntry>> streams_;
    std::map<RoleId, size_t> cursors_;
    mutable std::mutex mutex_;
};

// Serializes a script back to JSON lines (the inverse of from_jsonl).
std::string script_to_jsonl(const std::vector<ScriptEntry>& entries);

struct BackendConfig {
    std::string kind = "scripted";  // scripted|remote
    std::string base_url;
    std::map<std::string, std::string> model_by_role;  // role name -> model
    std::string default_model = "gpt-4-turbo";
    std::string api_key_env_var = "RECALL_API_KEY";
    double timeout_s = 30.0;
    int max_retries = 2;
    std::string script_path;  // scripted only

    void validate() const;  // throws naming the offending field
};

// OpenAI-compatible chat-completions client with bounded retries.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(BackendConfig config);

    std::string id() const override;
    CompletionResult complete(RoleId role, const std::string& system_text,
                              const std::string& user_text,
                              const RolePrompt& prompt) override;

private:
    BackendConfig config_;
    std::string api_key_;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

// ============================================================================
// Gateway
// ============================================================================

struct GenerationRecord {
    RoleId role = RoleId::Policy;
    std::string rendered_prompt;  // system + user, as sent
    std::string response_text;
    std::string backend_id;
    double latency_ms = 0.0;
    int attempt_count = 1;
    std::string error;  // non-empty when the call failed
};

// Renders templates, invokes the backend, and appends one GenerationRecord
// per call (successful or not). Trace appends are serialized.
class Gateway {
public:
    Gateway(PromptLibrary library, std::shared_ptr<Backend> backend);

    std::string complete(RoleId role, const Bindings& bindings);
    std::string complete(const RolePrompt& prompt, const Bindings& bindings);

    const PromptLibrary& library() const { return library_; }
    Backend& backend() { return *backend_; }
    bool scripted() const { return backend_->requires_serial_execution(); }

    std::vector<GenerationRecord> trace_snapshot() const;
    size_t trace_size() const;
    void write_trace_jsonl(const std::filesystem::path& path) const;

private:
    PromptLibrary library_;
    std::shared_ptr<Backend> backend_;
    std::vector<GenerationRecord> trace_;
    mutable std::mutex trace_mutex_;
};

// ============================================================================
// Response parsing helpers
// ============================================================================

// Extracts items from "1. ..." / "1) ..." / "- ..." / "* ..." lines, trims
// whitespace, drops empties, truncates to max_items. Zero parsed items is
// an "unparseable list" error; the caller decides whether to retry.
std::vector<std::string> parse_numbered_list(const std::string& text, int max_items);

// Splits a policy/ReAct completion into (thought, action). The thought is
// the text of leading "think: ..." lines; the action is the first other
// non-empty line, passed to the environment verbatim.
struct ThoughtAction {
    std::string thought;
    std::string action;  // empty when the response held no action line
};
ThoughtAction parse_thought_action(const std::string& response);

}  // namespace recall::llm

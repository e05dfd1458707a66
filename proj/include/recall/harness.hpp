#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "recall/collector.hpp"
#include "recall/llm.hpp"
#include "recall/memory.hpp"
#include "recall/planner.hpp"
#include "recall/tipper.hpp"

namespace recall::harness {

// ============================================================================
// Configuration
// ============================================================================

// One human-editable document; every framework parameter is a named field
// defaulted to its standard value, so ablations are one-line edits. All
// randomness flows from the single seed.
struct RunConfig {
    std::string env_name = "minihouse";  // minihouse | echo | external
    int step_budget = 0;                 // 0 = environment default
    std::string env_description;         // overrides the environment's own text
    std::string env_few_shot;

    llm::BackendConfig backend;

    collector::CollectorConfig collection;  // Z defaults to 3
    tipper::TipperConfig tips;              // caps default to 5 / 3
    planner::TriggerPolicy trigger;
    planner::PlannerConfig planner;

    int k = 2;                  // retrieval scope
    int retrieval_dimension = 256;

    uint64_t seed = 0;
    int n_folds = 4;
    std::string direction = "a";  // a: train on first half of folds; b: swapped
    int jobs = 1;                 // concurrent episodes (scripted forces 1)

    int task_count = 12;          // generated MiniHouse tasks
    std::string tasks_file;       // JSONL task list overriding generation

    // external environment attachment
    std::string external_host;
    int external_port = 0;
    std::vector<std::string> external_command;
    int wire_timeout_ms = 30000;

    std::filesystem::path output_dir = "out";

    static RunConfig from_json_text(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);
    void validate() const;  // throws naming the offending field path
};

// ============================================================================
// Folds and metrics
// ============================================================================

// Deterministic shuffle by seed, then round-robin fold labels (sizes differ
// by at most 1). Throws when tasks are fewer than folds or n_folds < 2.
std::vector<memory::TaskSpec> split_folds(std::vector<memory::TaskSpec> tasks, int n_folds,
                                          uint64_t seed);

// Folds whose tasks are trained on for a direction ("a" or "b").
bool fold_is_train(int fold, int n_folds, const std::string& direction);

struct EpisodeResult {
    std::string task_id;
    int fold = 0;
    bool succeeded = false;
    double reward = 0.0;
    int steps = 0;
    int trigger_firings = 0;
    int corrections = 0;
    bool aborted = false;
    std::string abort_reason;
};

struct FoldStats {
    int fold = 0;
    int episodes = 0;
    double success_rate = 0.0;
    double mean_reward = 0.0;
};

struct MetricsReport {
    int episodes = 0;
    int succeeded = 0;
    double success_rate = 0.0;
    double mean_reward = 0.0;
    double success_rate_stderr = 0.0;  // standard error across folds (0 with <2 folds)
    std::vector<FoldStats> folds;
    int trigger_firings = 0;
    int corrections = 0;
    int aborted = 0;
    std::vector<EpisodeResult> per_task;

    std::string to_json_text() const;
    std::string to_text() const;
};

MetricsReport compute_metrics(const std::vector<EpisodeResult>& results);
// Convenience form when only trajectories are at hand (single fold).
MetricsReport compute_metrics(const std::vector<memory::Trajectory>& trajectories);

// ============================================================================
// Task sources
// ============================================================================

std::vector<memory::TaskSpec> load_tasks_jsonl(const std::filesystem::path& path);
void save_tasks_jsonl(const std::vector<memory::TaskSpec>& tasks,
                      const std::filesystem::path& path);

// The config's task set with fold labels applied (generated or loaded).
std::vector<memory::TaskSpec> resolve_tasks(const RunConfig& config);

// Environment factory for the configured env_name.
env::EnvFactory make_env_factory(const RunConfig& config);

// Spec used for Focus prompts and budgets (for external envs this probes
// the peer once).
env::EnvironmentSpec resolve_env_spec(const RunConfig& config);

// ============================================================================
// Commands (shared by the CLI and the integration tests)
// ============================================================================

// Exit codes: 0 ok, 1 task failures present (aborted episodes), 2 fatal.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTaskFailures = 1;
inline constexpr int kExitFatal = 2;

struct CommandResult {
    int exit_code = kExitFatal;
    std::string summary;  // one line
};

CommandResult cmd_collect(const RunConfig& config);
CommandResult cmd_tips(const RunConfig& config, const std::filesystem::path& pool_path);
CommandResult cmd_eval(const RunConfig& config, const std::filesystem::path& pool_path,
                       const std::optional<std::filesystem::path>& tips_path,
                       bool react_baseline = false);
CommandResult cmd_report(const std::vector<std::filesystem::path>& metrics_files,
                         const std::filesystem::path& out_path);
CommandResult cmd_align_tips(const RunConfig& config, const std::filesystem::path& tips_path,
                             const std::string& target_env_name,
                             const std::string& target_description,
                             const std::filesystem::path& out_path);

}  // namespace recall::harness

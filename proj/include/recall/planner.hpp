#pragma once

#include <string>
#include <utility>
#include <vector>

#include "recall/environment.hpp"
#include "recall/llm.hpp"
#include "recall/memory.hpp"
#include "recall/retrieval.hpp"
#include "recall/trace.hpp"

namespace recall::planner {

// When to run the reflection path: pattern-match the latest observation
// and watch for repeated identical steps, with a cooldown and a
// per-episode cap against reflection storms.
struct TriggerPolicy {
    struct Pattern {
        bool is_regex = false;
        std::string text = "Nothing happens.";
    };
    bool enabled = true;
    std::vector<Pattern> anomaly_patterns = {Pattern{}};
    int repeat_threshold = 2;  // consecutive identical (action, observation) pairs
    int cooldown_steps = 2;    // minimum steps between firings
    int max_firings = 3;       // per episode

    void validate() const;  // thresholds >= 1
};

struct TriggerState {
    int firings = 0;
    int last_fired_step = -(1 << 20);
};

// Fires iff (the latest observation matches an anomaly pattern OR the last
// repeat_threshold steps are identical action/observation pairs) AND the
// cooldown elapsed AND firings < max_firings. steps includes the current one.
bool check_trigger(const TriggerPolicy& policy, const std::vector<memory::Step>& steps,
                   const TriggerState& state);

struct EpisodeContext {
    std::string et;  // concatenated tips of retrieved tasks
    std::string st;  // concatenated success-trajectory text
    std::vector<std::pair<std::string, double>> retrieved;  // (task_id, similarity)
};

struct KeyInformation {
    std::string state_summary;  // current location / state, plus unparsed remainder
    std::string inventory;
    std::string completed;
    std::string pending;
    std::string anomaly;

    bool any_section() const;
};

struct ReflectionOutcome {
    std::vector<std::pair<std::string, std::string>> qa;
    std::string plan;  // empty when no usable plan was produced
};

// lenient header parsing; prose without headers lands in state_summary
KeyInformation parse_key_information(const std::string& text);
// "Q:"/"A:" pairs plus the final "plan:" block
ReflectionOutcome parse_reflection(const std::string& text);

struct EpisodeOutcome {
    memory::Trajectory trajectory;
    bool aborted = false;
    std::string abort_reason;
    int trigger_firings = 0;
    int corrections = 0;
};

struct PlannerConfig {
    int st_tail_steps = 40;      // ST entries are tail-truncated
    int max_context_chars = 0;   // 0 = unbounded; else ET+ST stay under this
};

// Evaluation-time planning with retrieved context, anomaly-triggered key
// information extraction, self-QA reflection, and correction injection.
class Planner {
public:
    Planner(llm::Gateway& gateway, PlannerConfig config = {});

    // ET/ST in similarity-descending retrieval order. Retrieved tasks
    // missing from the tips dictionary contribute trajectory only.
    EpisodeContext assemble_context(const memory::TaskSpec& task,
                                    const retrieval::RetrievalIndex& index,
                                    const memory::TipsDictionary& tips,
                                    const memory::ExperiencePool& pool, int k,
                                    trace::EpisodeTrace* trace = nullptr);

    // One Policy-role completion for the next step.
    llm::ThoughtAction plan_step(const EpisodeContext& ctx, const memory::Trajectory& live,
                                 const env::EnvironmentSpec& spec);

    // KIE call with one retry; a still-unusable output yields a
    // KeyInformation with no sections (the caller skips reflection).
    KeyInformation extract_key_information(const memory::Trajectory& traj);

    // KIR call with one retry on a missing plan block.
    ReflectionOutcome reflect_key_information(const memory::Trajectory& traj,
                                              const KeyInformation& ki,
                                              const std::string& st_text);

    EpisodeOutcome run_episode(const memory::TaskSpec& task, const EpisodeContext& ctx,
                               env::Environment& environment, const TriggerPolicy& trigger,
                               trace::EpisodeTrace* trace = nullptr);

    // Same loop with empty ET/ST and the trigger disabled.
    EpisodeOutcome run_react_baseline(const memory::TaskSpec& task,
                                      env::Environment& environment,
                                      trace::EpisodeTrace* trace = nullptr);

    const PlannerConfig& config() const { return config_; }

private:
    llm::Gateway& gateway_;
    PlannerConfig config_;
};

}  // namespace recall::planner

#pragma once

#include <map>
#include <string>
#include <vector>

#include "recall/environment.hpp"
#include "recall/llm.hpp"
#include "recall/memory.hpp"
#include "recall/trace.hpp"

namespace recall::collector {

struct CollectorConfig {
    int max_reflection_retries = 3;  // Z: trials run until success or trial index Z
    int reflection_char_cap = 1200;  // each reflection truncated before concatenation
    int focus_max_items = 8;
};

struct TrialOutcome {
    memory::Trajectory trajectory;
    bool aborted = false;  // model transport failure; trial counts as consumed
    std::string abort_reason;
};

struct CollectResult {
    memory::ExperiencePool pool;
    // per-task reflection texts ν, in trial order (the ReflectionLog)
    std::map<std::string, std::vector<std::string>> reflection_log;
    int aborted_trials = 0;
};

// Focus-driven experience collection: generate run-level focus points once,
// then retry each training task with accumulated reflections until it
// succeeds or the trial budget is spent.
class Collector {
public:
    Collector(llm::Gateway& gateway, CollectorConfig config = {});

    // Parsed focus-point list (at most focus_max_items). One retry on
    // unparseable output, then the error surfaces to the caller.
    memory::FocusPointSet generate_focus_points(const env::EnvironmentSpec& spec);

    // One ReAct episode. A transport failure marks the outcome aborted with
    // the reason; the partial trajectory is kept.
    TrialOutcome run_trial(env::Environment& environment, const memory::TaskSpec& task,
                           const memory::FocusPointSet& focus, const std::string& reflections,
                           int trial_index, trace::EpisodeTrace* trace = nullptr);

    // Reflection text for a failed trajectory, truncated to the char cap.
    std::string reflect_on_failure(const memory::Trajectory& traj);

    CollectResult collect(const std::vector<memory::TaskSpec>& tasks,
                          const env::EnvFactory& make_environment,
                          const env::EnvironmentSpec& spec,
                          const trace::TraceSink& sink = {}, int jobs = 1);

    const CollectorConfig& config() const { return config_; }

private:
    llm::Gateway& gateway_;
    CollectorConfig config_;
};

}  // namespace recall::collector

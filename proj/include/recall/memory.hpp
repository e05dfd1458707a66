#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace recall::memory {

// ============================================================================
// Domain types
// ============================================================================

struct TaskSpec {
    std::string id;           // unique within a pool
    std::string instruction;  // natural-language goal text
    std::string env_name;
    std::string split = "train";  // train|eval
    int fold = 0;

    bool operator==(const TaskSpec&) const = default;
};

struct Step {
    int index = 0;
    std::string thought;      // empty when the model produced no thought
    std::string action;
    std::string observation;
    std::string correction;   // injected reflection, empty unless the trigger fired

    bool operator==(const Step&) const = default;
};

struct Trajectory {
    std::string task_id;
    int trial_index = 0;
    std::string initial_observation;  // env.reset() text the trajectory starts from
    std::vector<Step> steps;
    bool succeeded = false;
    double reward = 0.0;
    std::string reflections_used;     // accumulated reflections at trial start

    bool operator==(const Trajectory&) const = default;

    // Plain-text rendering used in prompts and in ST context blocks.
    // tail_steps > 0 keeps only the final tail_steps steps.
    std::string to_text(int tail_steps = 0) const;
};

struct FocusPointSet {
    std::vector<std::string> items;
    std::string source_env;

    bool operator==(const FocusPointSet&) const = default;

    std::string to_text() const;  // numbered-list rendering for prompts
};

struct Tip {
    std::string text;
    std::string origin;  // compare|success|success_supplement|aligned

    bool operator==(const Tip&) const = default;
};

// Per-task ordered tip lists, in build order (train task order).
struct TipsDictionary {
    std::vector<std::pair<std::string, std::vector<Tip>>> entries;

    bool operator==(const TipsDictionary&) const = default;

    bool contains(const std::string& task_id) const;
    const std::vector<Tip>* find(const std::string& task_id) const;
    std::vector<Tip>& at(const std::string& task_id);
    void put(const std::string& task_id, std::vector<Tip> tips);
    size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

// All trials of all training tasks, indexed by task.
// Appends are serialized through a single writer; once collection finishes
// the pool is frozen and may be read concurrently.
class ExperiencePool {
public:
    ExperiencePool() = default;

    // Registers a task. Throws on duplicate id or empty instruction.
    void add_task(const TaskSpec& task);

    // Stores a trajectory. Throws on unknown task_id, non-contiguous
    // trial_index, or a trial appended after the task already succeeded.
    void append_trial(const Trajectory& traj);

    const std::vector<TaskSpec>& tasks() const { return tasks_; }
    const TaskSpec* find_task(const std::string& task_id) const;
    bool has_task(const std::string& task_id) const;

    // Trials for one task, in trial order. Empty list for a known task
    // with no trials yet; throws on unknown task.
    const std::vector<Trajectory>& trials_for(const std::string& task_id) const;

    size_t task_count() const { return tasks_.size(); }
    size_t trial_count() const;

    FocusPointSet focus_points;
    std::string embedder_id;  // recorded for reproducibility checks

    bool operator==(const ExperiencePool&) const;

private:
    std::vector<TaskSpec> tasks_;
    std::map<std::string, std::vector<Trajectory>> trials_;
};

// ============================================================================
// Views over the pool
// ============================================================================

struct CompareEntry {
    Trajectory success;
    std::vector<Trajectory> failures;  // in trial order
};

// Tasks having at least one success AND one failure. The success entry is
// the unique succeeded trial; failures keep trial order.
std::map<std::string, CompareEntry> compare_view(const ExperiencePool& pool);

// One entry per task with a succeeded trial (superset of compare_view's
// domain; tip extraction reads it for compare tasks too).
std::map<std::string, Trajectory> success_view(const ExperiencePool& pool);

}  // namespace recall::memory

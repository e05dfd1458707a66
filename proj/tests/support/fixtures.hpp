#pragma once

// Test fixtures shared by the unit suites and the acceptance binary:
// oracle-derived playback scripts and prompt-reactive backends.

#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "recall/error.hpp"
#include "recall/llm.hpp"
#include "recall/memory.hpp"
#include "recall/minihouse.hpp"

namespace recall::testing {

// Action sequence the oracle takes for a task, recorded against a fresh world.
inline std::vector<std::string> oracle_actions(const memory::TaskSpec& task,
                                               int step_budget = env::kHouseholdStepBudget) {
    env::MiniHouseEnv environment(step_budget);
    environment.reset(task);
    std::vector<std::string> actions;
    while (environment.episode_active()) {
        const std::string action = env::oracle_policy(environment);
        actions.push_back(action);
        if (environment.step(action).done) break;
    }
    return actions;
}

// How a scripted collection run should behave for one task.
struct TaskStrategy {
    int solve_on_trial = 0;  // -1: never succeeds
};

// Builds the ReAct/Reflect entries for a collection run by replaying the
// collection control flow: failed trials burn the whole step budget on an
// invalid action, reflections appear between trials, the solving trial
// follows the oracle.
inline std::vector<llm::ScriptEntry> collect_script(
    const std::vector<memory::TaskSpec>& tasks,
    const std::map<std::string, TaskStrategy>& strategies, int z_max,
    int step_budget = env::kHouseholdStepBudget, const std::string& focus_expect = "") {
    std::vector<llm::ScriptEntry> entries;
    entries.push_back({llm::RoleId::Focus, focus_expect,
                       "1. Identify the object type and the target spot from the task.\n"
                       "2. Check open surfaces before rummaging through drawers.\n"
                       "3. Keep your hands free until the object is located."});
    for (const auto& task : tasks) {
        const auto it = strategies.find(task.id);
        const TaskStrategy strategy = it == strategies.end() ? TaskStrategy{} : it->second;
        for (int z = 0; z <= z_max; ++z) {
            const bool solves = strategy.solve_on_trial == z;
            if (solves) {
                bool first = true;
                for (const auto& action : oracle_actions(task, step_budget)) {
                    std::string response = action;
                    if (first) {
                        response = "think: time to use what I learned.\n" + action;
                        first = false;
                    }
                    entries.push_back({llm::RoleId::ReAct, "", response});
                }
                break;
            }
            for (int i = 0; i < step_budget; ++i) {
                entries.push_back({llm::RoleId::ReAct, "", "poke the walls"});
            }
            if (z == z_max) break;
            entries.push_back({llm::RoleId::Reflect, "",
                               "Attempt " + std::to_string(z + 1) + " on '" + task.instruction +
                                   "' went nowhere; stop poking walls and follow the task."});
        }
    }
    return entries;
}

// Tips entries consumed by build_tips_dictionary over a pool built from the
// strategies above: compare tasks burn a compare + a supplement call,
// first-try tasks a single success call.
inline std::vector<llm::ScriptEntry> tips_script(
    const std::vector<memory::TaskSpec>& tasks,
    const std::map<std::string, TaskStrategy>& strategies) {
    std::vector<llm::ScriptEntry> entries;
    for (const auto& task : tasks) {
        const auto it = strategies.find(task.id);
        const TaskStrategy strategy = it == strategies.end() ? TaskStrategy{} : it->second;
        if (strategy.solve_on_trial < 0) continue;  // unsolved: no tips calls
        if (strategy.solve_on_trial > 0) {
            entries.push_back({llm::RoleId::Tips, "",
                               "1. Do not repeat an action that already replied with nothing.\n"
                               "2. Locate the object before touching appliances."});
            entries.push_back({llm::RoleId::Tips, "",
                               "1. Head straight for the target once the object is in hand."});
        } else {
            entries.push_back({llm::RoleId::Tips, "",
                               "1. The first attempt worked: scan spots in a fixed order.\n"
                               "2. Put the object down only at the requested target."});
        }
    }
    return entries;
}

// Policy entries for an eval run where every episode follows the oracle.
inline std::vector<llm::ScriptEntry> eval_script(const std::vector<memory::TaskSpec>& tasks,
                                                 int step_budget = env::kHouseholdStepBudget) {
    std::vector<llm::ScriptEntry> entries;
    for (const auto& task : tasks) {
        bool first = true;
        for (const auto& action : oracle_actions(task, step_budget)) {
            std::string response = action;
            if (first) {
                response = "think: the similar episodes show the way.\n" + action;
                first = false;
            }
            entries.push_back({llm::RoleId::Policy, "", response});
        }
    }
    return entries;
}

// Pick&place tasks with pairwise-distinct instructions (the reactive
// backends below key their plan tables by instruction text).
inline std::vector<memory::TaskSpec> distinct_pick_place_tasks(int count,
                                                               uint32_t seed_start) {
    std::vector<memory::TaskSpec> tasks;
    std::map<std::string, bool> seen;
    for (uint32_t seed = seed_start; static_cast<int>(tasks.size()) < count; ++seed) {
        auto task = env::MiniHouseEnv::make_task(env::TaskType::PickAndPlace, seed, "eval");
        if (!seen.emplace(task.instruction, true).second) continue;
        tasks.push_back(std::move(task));
    }
    return tasks;
}

// ============================================================================
// Prompt-reactive backends
// ============================================================================

inline std::string task_instruction_from_prompt(const std::string& prompt) {
    const auto marker = prompt.rfind("Your task is to: ");
    if (marker == std::string::npos) return "";
    const auto start = marker + std::string("Your task is to: ").size();
    const auto end = prompt.find('\n', start);
    return prompt.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

// Next plan action that is absent from the live-episode section of the
// prompt (few-shot and ST blocks also carry "> action" lines). Plans must
// not repeat an action; pick&place plans never do.
inline std::string next_pending_action(const std::vector<std::string>& plan,
                                       const std::string& prompt) {
    const auto marker = prompt.rfind("Current episode so far:");
    const std::string live = marker == std::string::npos ? prompt : prompt.substr(marker);
    for (const auto& action : plan) {
        if (live.find("> " + action + "\n") == std::string::npos) {
            return action;
        }
    }
    return "look";
}

// Deterministic stand-in for an instruction-following model: it answers
// Policy calls with the next pending action of the task's known plan
// (counting "> action" lines already in the prompt). Thread-safe because it
// only reads the prompt and a const plan table.
class PlanFollowingBackend : public llm::Backend {
public:
    explicit PlanFollowingBackend(std::map<std::string, std::vector<std::string>> plans)
        : plans_(std::move(plans)) {}

    std::string id() const override { return "test:plan-following"; }

    llm::CompletionResult complete(llm::RoleId role, const std::string& system_text,
                                   const std::string& user_text,
                                   const llm::RolePrompt& prompt) override {
        (void)system_text;
        (void)prompt;
        if (role != llm::RoleId::Policy && role != llm::RoleId::ReAct) {
            return {"1. unused", 1, 0.0};
        }
        const auto plan = plans_.find(task_instruction_from_prompt(user_text));
        if (plan == plans_.end()) {
            return {"look", 1, 0.0};
        }
        return {next_pending_action(plan->second, user_text), 1, 0.0};
    }

private:
    std::map<std::string, std::vector<std::string>> plans_;
};

// The planted-flaw policy: repeats a doomed command until a corrective
// "plan:" shows up in its prompt (via the injected correction), then follows
// the task's plan. KIE/KIR roles are expected to be served elsewhere. The
// default flawed action names an object type the generator never produces,
// so it can never collide with a plan step.
class FlawedPolicyBackend : public llm::Backend {
public:
    FlawedPolicyBackend(std::map<std::string, std::vector<std::string>> plans,
                        std::string flawed_action = "take key 1 from drawer 3")
        : plans_(std::move(plans)), flawed_action_(std::move(flawed_action)) {}

    std::string id() const override { return "test:flawed-policy"; }

    llm::CompletionResult complete(llm::RoleId role, const std::string& system_text,
                                   const std::string& user_text,
                                   const llm::RolePrompt& prompt) override {
        (void)system_text;
        (void)prompt;
        if (role != llm::RoleId::Policy) {
            throw recall::Error("flawed policy backend serves the Policy role only");
        }
        if (user_text.find("[correction] ") == std::string::npos) {
            return {"think: drawer 3 must hold it.\n" + flawed_action_, 1, 0.0};
        }
        const auto plan = plans_.find(task_instruction_from_prompt(user_text));
        if (plan == plans_.end()) {
            return {"look", 1, 0.0};
        }
        const std::string action = next_pending_action(plan->second, user_text);
        return {"think: following the corrective plan.\n" + action, 1, 0.0};
    }

private:
    std::map<std::string, std::vector<std::string>> plans_;
    std::string flawed_action_;
};

// Routes each role to its own backend (e.g. a reactive policy plus scripted
// KIE/KIR streams).
class RoleRouterBackend : public llm::Backend {
public:
    RoleRouterBackend(std::shared_ptr<llm::Backend> fallback) : fallback_(std::move(fallback)) {}

    void route(llm::RoleId role, std::shared_ptr<llm::Backend> backend) {
        routes_[role] = std::move(backend);
    }

    std::string id() const override { return "test:role-router"; }

    llm::CompletionResult complete(llm::RoleId role, const std::string& system_text,
                                   const std::string& user_text,
                                   const llm::RolePrompt& prompt) override {
        const auto it = routes_.find(role);
        llm::Backend& target = it == routes_.end() ? *fallback_ : *it->second;
        return target.complete(role, system_text, user_text, prompt);
    }

    bool requires_serial_execution() const override {
        for (const auto& [role, backend] : routes_) {
            if (backend->requires_serial_execution()) return true;
        }
        return fallback_->requires_serial_execution();
    }

private:
    std::shared_ptr<llm::Backend> fallback_;
    std::map<llm::RoleId, std::shared_ptr<llm::Backend>> routes_;
};

// KIE/KIR scripts for the planted-flaw fixture: one firing per task, the
// KIR plan carrying the oracle actions for that task.
inline std::vector<llm::ScriptEntry> correction_script(
    const std::vector<memory::TaskSpec>& tasks,
    const std::map<std::string, std::vector<std::string>>& plans) {
    std::vector<llm::ScriptEntry> entries;
    for (const auto& task : tasks) {
        entries.push_back({llm::RoleId::KIE, "",
                           "location: wandering, nothing in reach\n"
                           "inventory: empty-handed\n"
                           "completed: nothing yet\n"
                           "pending: the whole task\n"
                           "anomaly: the same command keeps replying 'Nothing happens.'"});
        std::ostringstream plan;
        plan << "Q: What has the agent been doing?\n"
             << "A: Repeating a command the room rejects.\n"
             << "Q: What would a successful episode do instead?\n"
             << "A: Walk the plan below.\n"
             << "plan: ";
        const auto& actions = plans.at(task.instruction);
        for (size_t i = 0; i < actions.size(); ++i) {
            if (i) plan << "; ";
            plan << actions[i];
        }
        entries.push_back({llm::RoleId::KIR, "", plan.str()});
    }
    return entries;
}

}  // namespace recall::testing

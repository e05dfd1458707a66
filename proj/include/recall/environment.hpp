#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "recall/memory.hpp"

namespace recall::env {

struct EnvironmentSpec {
    std::string env_name;
    std::string description;                 // shown to the Focus role
    std::vector<std::string> action_grammar; // command patterns
    int step_budget = 20;                    // H
    std::string few_shot;                    // 1-2 worked example episodes
};

// Step budget defaults per environment family.
inline constexpr int kHouseholdStepBudget = 20;
inline constexpr int kShoppingStepBudget = 15;
inline constexpr int kScienceStepBudget = 80;

class Environment {
public:
    struct StepResult {
        std::string observation;
        bool done = false;
        double reward = 0.0;
    };

    virtual ~Environment() = default;

    virtual const EnvironmentSpec& spec() const = 0;

    // Fresh deterministic state for the task. Returns the initial
    // observation. Throws on a task this environment cannot serve.
    virtual std::string reset(const memory::TaskSpec& task) = 0;

    // Advances one step. Throws when the episode is already finished
    // (done, or the step budget is exhausted).
    virtual StepResult step(const std::string& action) = 0;

    virtual int steps_taken() const = 0;
    virtual bool episode_active() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

// Trivial environment that echoes back what it receives: reset returns the
// task instruction, step returns the action text. Used as a wire-protocol
// peer and in transport tests.
class EchoEnvironment : public Environment {
public:
    EchoEnvironment();
    const EnvironmentSpec& spec() const override { return spec_; }
    std::string reset(const memory::TaskSpec& task) override;
    StepResult step(const std::string& action) override;
    int steps_taken() const override { return steps_; }
    bool episode_active() const override { return active_; }

private:
    EnvironmentSpec spec_;
    int steps_ = 0;
    bool active_ = false;
};

}  // namespace recall::env

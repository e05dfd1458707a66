#include "recall/environment.hpp"

#include "recall/error.hpp"

namespace recall::env {

EchoEnvironment::EchoEnvironment() {
    spec_.env_name = "echo";
    spec_.description = "Echoes the task instruction on reset and the action text on step.";
    spec_.action_grammar = {"{any text}"};
    spec_.step_budget = 1 << 20;
    spec_.few_shot = "Your task is to: say hello.\n> hello\nhello\n";
}

std::string EchoEnvironment::reset(const memory::TaskSpec& task) {
    steps_ = 0;
    active_ = true;
    return task.instruction;
}

Environment::StepResult EchoEnvironment::step(const std::string& action) {
    if (!active_) {
        throw Error("step on a finished echo episode");
    }
    ++steps_;
    if (steps_ >= spec_.step_budget) active_ = false;
    return StepResult{action, false, 0.0};
}

}  // namespace recall::env

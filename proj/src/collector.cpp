#include "recall/collector.hpp"

#include <mutex>

#include "recall/error.hpp"
#include "recall/parallel.hpp"

namespace recall::collector {

using memory::FocusPointSet;
using memory::Step;
using memory::TaskSpec;
using memory::Trajectory;

namespace {

std::string or_none(const std::string& text) { return text.empty() ? "(none)" : text; }

std::string truncate(const std::string& text, int cap) {
    if (cap <= 0 || text.size() <= static_cast<size_t>(cap)) return text;
    return text.substr(0, static_cast<size_t>(cap));
}

}  // namespace

Collector::Collector(llm::Gateway& gateway, CollectorConfig config)
    : gateway_(gateway), config_(config) {}

FocusPointSet Collector::generate_focus_points(const env::EnvironmentSpec& spec) {
    if (spec.description.empty()) {
        throw Error("generate_focus_points: environment description is empty");
    }
    if (spec.few_shot.empty()) {
        throw Error("generate_focus_points: few-shot examples are empty");
    }
    const llm::Bindings bindings = {
        {"env_description", spec.description},
        {"few_shot", spec.few_shot},
    };
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string response = gateway_.complete(llm::RoleId::Focus, bindings);
        try {
            FocusPointSet focus;
            focus.items = llm::parse_numbered_list(response, config_.focus_max_items);
            focus.source_env = spec.env_name;
            return focus;
        } catch (const ParseError& e) {
            last_error = e.what();
        }
    }
    throw ParseError("focus points unparseable after retry: " + last_error);
}

TrialOutcome Collector::run_trial(env::Environment& environment, const TaskSpec& task,
                                  const FocusPointSet& focus, const std::string& reflections,
                                  int trial_index, trace::EpisodeTrace* trace) {
    TrialOutcome outcome;
    Trajectory& traj = outcome.trajectory;
    traj.task_id = task.id;
    traj.trial_index = trial_index;
    traj.reflections_used = reflections;
    try {
        traj.initial_observation = environment.reset(task);
    } catch (const TimeoutError& e) {
        outcome.aborted = true;
        outcome.abort_reason = e.what();
        if (trace) trace->note("abort", outcome.abort_reason);
        return outcome;
    } catch (const ProtocolError& e) {
        outcome.aborted = true;
        outcome.abort_reason = e.what();
        if (trace) trace->note("abort", outcome.abort_reason);
        return outcome;
    }

    const env::EnvironmentSpec& spec = environment.spec();
    if (trace) {
        nlohmann::ordered_json j;
        j["event"] = "reset";
        j["task_id"] = task.id;
        j["trial_index"] = trial_index;
        j["observation"] = traj.initial_observation;
        trace->event(std::move(j));
    }

    while (environment.episode_active()) {
        const llm::Bindings bindings = {
            {"env_description", spec.description},
            {"few_shot", spec.few_shot},
            {"focus_points", or_none(focus.to_text())},
            {"reflections", or_none(reflections)},
            {"trajectory", traj.to_text()},
        };
        std::string response;
        try {
            response = gateway_.complete(llm::RoleId::ReAct, bindings);
        } catch (const std::exception& e) {
            outcome.aborted = true;
            outcome.abort_reason = e.what();
            break;
        }
        const auto parsed = llm::parse_thought_action(response);
        if (parsed.action.empty()) {
            outcome.aborted = true;
            outcome.abort_reason = "model response contains no action line";
            break;
        }
        env::Environment::StepResult result;
        try {
            result = environment.step(parsed.action);
        } catch (const TimeoutError& e) {
            outcome.aborted = true;
            outcome.abort_reason = e.what();
            break;
        } catch (const ProtocolError& e) {
            outcome.aborted = true;
            outcome.abort_reason = e.what();
            break;
        }
        Step step;
        step.index = static_cast<int>(traj.steps.size());
        step.thought = parsed.thought;
        step.action = parsed.action;
        step.observation = result.observation;
        traj.steps.push_back(step);
        if (trace) {
            nlohmann::ordered_json j;
            j["event"] = "step";
            j["index"] = step.index;
            j["thought"] = step.thought;
            j["action"] = step.action;
            j["observation"] = step.observation;
            j["done"] = result.done;
            trace->event(std::move(j));
        }
        if (result.done) {
            traj.succeeded = true;
            traj.reward = result.reward;
            break;
        }
    }
    if (outcome.aborted && trace) {
        trace->note("abort", outcome.abort_reason);
    }
    return outcome;
}

std::string Collector::reflect_on_failure(const Trajectory& traj) {
    if (traj.succeeded) {
        throw Error("reflect_on_failure called on a successful trajectory");
    }
    const std::string response =
        gateway_.complete(llm::RoleId::Reflect, {{"trajectory", traj.to_text()}});
    return truncate(response, config_.reflection_char_cap);
}

CollectResult Collector::collect(const std::vector<TaskSpec>& tasks,
                                 const env::EnvFactory& make_environment,
                                 const env::EnvironmentSpec& spec,
                                 const trace::TraceSink& sink, int jobs) {
    if (config_.max_reflection_retries < 0) {
        throw Error("collect: max_reflection_retries must be >= 0");
    }
    CollectResult result;
    result.pool.focus_points = generate_focus_points(spec);
    const int z_max = config_.max_reflection_retries;

    for (const auto& task : tasks) {
        result.pool.add_task(task);
    }

    // Tasks are independent episodes; the pool, reflection log, and sink are
    // serialized behind one mutex. Scripted playback forbids parallelism.
    std::mutex mutex;
    if (gateway_.scripted()) jobs = 1;

    parallel_for(static_cast<int>(tasks.size()), jobs, [&](int index) {
        const TaskSpec& task = tasks[static_cast<size_t>(index)];
        auto environment = make_environment();
        std::string reflections;
        for (int z = 0; z <= z_max; ++z) {
            trace::EpisodeTrace trial_trace;
            TrialOutcome outcome = run_trial(*environment, task, result.pool.focus_points,
                                             reflections, z, &trial_trace);
            {
                std::lock_guard<std::mutex> lock(mutex);
                result.pool.append_trial(outcome.trajectory);
                if (sink) {
                    sink("collect/" + task.id + "/trial" + std::to_string(z), trial_trace);
                }
                if (outcome.aborted) ++result.aborted_trials;
            }
            if (outcome.aborted) {
                return;  // consumed trial; move on to the next task
            }
            if (outcome.trajectory.succeeded || z == z_max) {
                return;  // no reflection after the final allowed trial
            }
            std::string reflection;
            try {
                reflection = reflect_on_failure(outcome.trajectory);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mutex);
                ++result.aborted_trials;
                trace::EpisodeTrace t;
                t.note("reflect-abort", e.what());
                if (sink) sink("collect/" + task.id + "/reflect" + std::to_string(z), t);
                return;
            }
            {
                std::lock_guard<std::mutex> lock(mutex);
                result.reflection_log[task.id].push_back(reflection);
            }
            reflections = reflections.empty() ? reflection : reflections + "\n" + reflection;
        }
    });
    return result;
}

}  // namespace recall::collector

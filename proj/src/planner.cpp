#include "recall/planner.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "recall/error.hpp"
#include "recall/tipper.hpp"

namespace recall::planner {

using memory::Step;
using memory::TaskSpec;
using memory::Trajectory;

namespace {

std::string or_none(const std::string& text) { return text.empty() ? "(none)" : text; }

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

bool starts_with_header(const std::string& line, const std::string& header,
                        std::string* rest) {
    if (line.size() < header.size()) return false;
    for (size_t i = 0; i < header.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(line[i])) != header[i]) return false;
    }
    *rest = trim(line.substr(header.size()));
    return true;
}

void append_section(std::string* section, const std::string& text) {
    if (text.empty()) return;
    if (!section->empty()) section->append(" ");
    section->append(text);
}

}  // namespace

// ============================================================================
// Trigger
// ============================================================================

void TriggerPolicy::validate() const {
    if (repeat_threshold < 1) throw Error("trigger.repeat_threshold must be >= 1");
    if (cooldown_steps < 1) throw Error("trigger.cooldown_steps must be >= 1");
    if (max_firings < 1) throw Error("trigger.max_firings must be >= 1");
}

bool check_trigger(const TriggerPolicy& policy, const std::vector<Step>& steps,
                   const TriggerState& state) {
    if (!policy.enabled || steps.empty()) return false;
    if (state.firings >= policy.max_firings) return false;
    const int current = static_cast<int>(steps.size()) - 1;
    if (current - state.last_fired_step < policy.cooldown_steps) return false;

    const Step& latest = steps.back();
    bool anomalous = false;
    for (const auto& pattern : policy.anomaly_patterns) {
        if (pattern.is_regex) {
            if (std::regex_search(latest.observation, std::regex(pattern.text))) {
                anomalous = true;
                break;
            }
        } else if (latest.observation == pattern.text) {
            anomalous = true;
            break;
        }
    }
    if (!anomalous && steps.size() >= static_cast<size_t>(policy.repeat_threshold)) {
        anomalous = true;
        for (size_t i = steps.size() - static_cast<size_t>(policy.repeat_threshold);
             i + 1 < steps.size(); ++i) {
            if (steps[i].action != latest.action ||
                steps[i].observation != latest.observation) {
                anomalous = false;
                break;
            }
        }
    }
    return anomalous;
}

// ============================================================================
// Parsing
// ============================================================================

bool KeyInformation::any_section() const {
    return !(state_summary.empty() && inventory.empty() && completed.empty() &&
             pending.empty() && anomaly.empty());
}

KeyInformation parse_key_information(const std::string& text) {
    KeyInformation ki;
    std::string* current = &ki.state_summary;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        const std::string line = trim(raw);
        if (line.empty()) continue;
        std::string rest;
        if (starts_with_header(line, "location:", &rest) ||
            starts_with_header(line, "state:", &rest)) {
            current = &ki.state_summary;
            append_section(current, rest);
        } else if (starts_with_header(line, "inventory:", &rest)) {
            current = &ki.inventory;
            append_section(current, rest);
        } else if (starts_with_header(line, "completed:", &rest)) {
            current = &ki.completed;
            append_section(current, rest);
        } else if (starts_with_header(line, "pending:", &rest)) {
            current = &ki.pending;
            append_section(current, rest);
        } else if (starts_with_header(line, "anomaly:", &rest)) {
            current = &ki.anomaly;
            append_section(current, rest);
        } else {
            append_section(current, line);  // continuation or header-free prose
        }
    }
    return ki;
}

ReflectionOutcome parse_reflection(const std::string& text) {
    ReflectionOutcome outcome;
    std::istringstream in(text);
    std::string raw;
    std::string pending_question;
    bool in_plan = false;
    while (std::getline(in, raw)) {
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (in_plan) {
            outcome.plan += "\n" + line;
            continue;
        }
        std::string rest;
        if (starts_with_header(line, "plan:", &rest)) {
            outcome.plan = rest;
            in_plan = true;
        } else if (starts_with_header(line, "q:", &rest)) {
            pending_question = rest;
        } else if (starts_with_header(line, "a:", &rest)) {
            if (!pending_question.empty()) {
                outcome.qa.emplace_back(pending_question, rest);
                pending_question.clear();
            }
        }
    }
    outcome.plan = trim(outcome.plan);
    return outcome;
}

// ============================================================================
// Planner
// ============================================================================

Planner::Planner(llm::Gateway& gateway, PlannerConfig config)
    : gateway_(gateway), config_(config) {}

EpisodeContext Planner::assemble_context(const TaskSpec& task,
                                         const retrieval::RetrievalIndex& index,
                                         const memory::TipsDictionary& tips,
                                         const memory::ExperiencePool& pool, int k,
                                         trace::EpisodeTrace* trace) {
    EpisodeContext ctx;
    ctx.retrieved = retrieval::query_topk(index, task.instruction, k);

    struct ContextEntry {
        std::string task_id;
        std::string instruction;
        const Trajectory* success = nullptr;
        const std::vector<memory::Tip>* tips = nullptr;
    };
    std::vector<ContextEntry> entries;
    for (const auto& [task_id, similarity] : ctx.retrieved) {
        const TaskSpec* retrieved_task = pool.find_task(task_id);
        ContextEntry entry;
        entry.task_id = task_id;
        entry.instruction = retrieved_task ? retrieved_task->instruction : task_id;
        for (const auto& traj : pool.trials_for(task_id)) {
            if (traj.succeeded) {
                entry.success = &traj;
                break;
            }
        }
        if (!entry.success) continue;  // index holds solved tasks only
        entry.tips = tips.find(task_id);
        if (!entry.tips && trace) {
            trace->note("context", "retrieved task '" + task_id + "' has no tips entry");
        }
        if (trace) {
            nlohmann::ordered_json j;
            j["event"] = "retrieved";
            j["task_id"] = task_id;
            j["similarity"] = similarity;
            trace->event(std::move(j));
        }
        entries.push_back(std::move(entry));
    }

    auto render = [&](int tail_steps) {
        std::ostringstream et;
        std::ostringstream st;
        for (const auto& entry : entries) {
            st << "Similar task: " << entry.instruction << "\n"
               << entry.success->to_text(tail_steps) << "\n";
            if (entry.tips) {
                et << "Tips for a similar task (" << entry.instruction << "):\n"
                   << tipper::tips_to_text(*entry.tips) << "\n";
            }
        }
        ctx.et = et.str();
        ctx.st = st.str();
    };

    int tail_steps = config_.st_tail_steps;
    render(tail_steps);
    if (config_.max_context_chars > 0) {
        const size_t budget = static_cast<size_t>(config_.max_context_chars);
        // shed the lowest-similarity experience first, then shorten ST tails
        while (ctx.et.size() + ctx.st.size() > budget && entries.size() > 1) {
            if (trace) trace->note("context", "over budget; dropping '" +
                                                  entries.back().task_id + "'");
            entries.pop_back();
            render(tail_steps);
        }
        while (ctx.et.size() + ctx.st.size() > budget && tail_steps > 5) {
            tail_steps /= 2;
            if (trace) {
                trace->note("context",
                            "over budget; ST tails cut to " + std::to_string(tail_steps));
            }
            render(tail_steps);
        }
    }
    return ctx;
}

llm::ThoughtAction Planner::plan_step(const EpisodeContext& ctx, const Trajectory& live,
                                      const env::EnvironmentSpec& spec) {
    const std::string response =
        gateway_.complete(llm::RoleId::Policy, {
                                                   {"env_description", spec.description},
                                                   {"few_shot", spec.few_shot},
                                                   {"tips", or_none(ctx.et)},
                                                   {"similar_trajectories", or_none(ctx.st)},
                                                   {"trajectory", live.to_text()},
                                               });
    return llm::parse_thought_action(response);
}

KeyInformation Planner::extract_key_information(const Trajectory& traj) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response;
        try {
            response = gateway_.complete(llm::RoleId::KIE, {{"trajectory", traj.to_text()}});
        } catch (const TransportError&) {
            throw;
        } catch (const Error&) {
            continue;  // empty output; retry once
        }
        const KeyInformation ki = parse_key_information(response);
        if (ki.any_section()) return ki;
    }
    return KeyInformation{};  // caller skips reflection for this firing
}

ReflectionOutcome Planner::reflect_key_information(const Trajectory& traj,
                                                   const KeyInformation& ki,
                                                   const std::string& st_text) {
    std::ostringstream ki_text;
    if (!ki.state_summary.empty()) ki_text << "location/state: " << ki.state_summary << "\n";
    if (!ki.inventory.empty()) ki_text << "inventory: " << ki.inventory << "\n";
    if (!ki.completed.empty()) ki_text << "completed: " << ki.completed << "\n";
    if (!ki.pending.empty()) ki_text << "pending: " << ki.pending << "\n";
    if (!ki.anomaly.empty()) ki_text << "anomaly: " << ki.anomaly << "\n";

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response;
        try {
            response = gateway_.complete(llm::RoleId::KIR,
                                         {{"trajectory", traj.to_text()},
                                          {"key_information", ki_text.str()},
                                          {"similar_trajectories", or_none(st_text)}});
        } catch (const TransportError&) {
            throw;
        } catch (const Error&) {
            continue;
        }
        const ReflectionOutcome outcome = parse_reflection(response);
        if (!outcome.plan.empty()) return outcome;
    }
    return ReflectionOutcome{};  // no usable plan; no injection
}

EpisodeOutcome Planner::run_episode(const TaskSpec& task, const EpisodeContext& ctx,
                                    env::Environment& environment,
                                    const TriggerPolicy& trigger,
                                    trace::EpisodeTrace* trace) {
    if (trigger.enabled) trigger.validate();
    EpisodeOutcome outcome;
    Trajectory& traj = outcome.trajectory;
    traj.task_id = task.id;
    traj.trial_index = 0;
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

    if (trace) {
        nlohmann::ordered_json j;
        j["event"] = "reset";
        j["task_id"] = task.id;
        j["observation"] = traj.initial_observation;
        trace->event(std::move(j));
    }

    TriggerState state;
    const env::EnvironmentSpec& spec = environment.spec();
    while (environment.episode_active()) {
        llm::ThoughtAction parsed;
        try {
            parsed = plan_step(ctx, traj, spec);
        } catch (const std::exception& e) {
            outcome.aborted = true;
            outcome.abort_reason = e.what();
            break;
        }
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

        if (!result.done && check_trigger(trigger, traj.steps, state)) {
            ++state.firings;
            state.last_fired_step = static_cast<int>(traj.steps.size()) - 1;
            ++outcome.trigger_firings;
            if (trace) {
                nlohmann::ordered_json j;
                j["event"] = "trigger";
                j["step"] = step.index;
                j["observation"] = step.observation;
                trace->event(std::move(j));
            }
            const KeyInformation ki = extract_key_information(traj);
            if (!ki.any_section()) {
                if (trace) trace->note("reflection-skip", "key information extraction failed");
            } else {
                if (trace) {
                    nlohmann::ordered_json j;
                    j["event"] = "key_information";
                    j["state_summary"] = ki.state_summary;
                    j["inventory"] = ki.inventory;
                    j["completed"] = ki.completed;
                    j["pending"] = ki.pending;
                    j["anomaly"] = ki.anomaly;
                    trace->event(std::move(j));
                }
                const ReflectionOutcome reflection =
                    reflect_key_information(traj, ki, ctx.st);
                if (reflection.plan.empty()) {
                    if (trace) trace->note("reflection-skip", "no plan block in KIR output");
                } else {
                    traj.steps.back().correction = reflection.plan;
                    ++outcome.corrections;
                    if (trace) {
                        nlohmann::ordered_json j;
                        j["event"] = "correction";
                        j["step"] = step.index;
                        j["qa"] = nlohmann::ordered_json::array();
                        for (const auto& [q, a] : reflection.qa) {
                            j["qa"].push_back({{"q", q}, {"a", a}});
                        }
                        j["plan"] = reflection.plan;
                        trace->event(std::move(j));
                    }
                }
            }
        }

        if (trace) {
            nlohmann::ordered_json j;
            j["event"] = "step";
            j["index"] = step.index;
            j["thought"] = step.thought;
            j["action"] = step.action;
            j["observation"] = step.observation;
            j["correction"] = traj.steps.back().correction;
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

EpisodeOutcome Planner::run_react_baseline(const TaskSpec& task,
                                           env::Environment& environment,
                                           trace::EpisodeTrace* trace) {
    TriggerPolicy disabled;
    disabled.enabled = false;
    return run_episode(task, EpisodeContext{}, environment, disabled, trace);
}

}  // namespace recall::planner

#include "recall/memory.hpp"

#include <algorithm>
#include <sstream>

#include "recall/error.hpp"

namespace recall::memory {

std::string Trajectory::to_text(int tail_steps) const {
    std::ostringstream out;
    out << initial_observation << "\n";
    size_t first = 0;
    if (tail_steps > 0 && steps.size() > static_cast<size_t>(tail_steps)) {
        first = steps.size() - static_cast<size_t>(tail_steps);
        out << "[... " << first << " earlier steps omitted ...]\n";
    }
    for (size_t i = first; i < steps.size(); ++i) {
        const Step& s = steps[i];
        if (!s.thought.empty()) {
            out << "> think: " << s.thought << "\n";
        }
        out << "> " << s.action << "\n";
        out << s.observation << "\n";
        if (!s.correction.empty()) {
            out << "[correction] " << s.correction << "\n";
        }
    }
    return out.str();
}

std::string FocusPointSet::to_text() const {
    std::ostringstream out;
    for (size_t i = 0; i < items.size(); ++i) {
        out << (i + 1) << ". " << items[i] << "\n";
    }
    return out.str();
}

bool TipsDictionary::contains(const std::string& task_id) const {
    return find(task_id) != nullptr;
}

const std::vector<Tip>* TipsDictionary::find(const std::string& task_id) const {
    for (const auto& [id, tips] : entries) {
        if (id == task_id) return &tips;
    }
    return nullptr;
}

std::vector<Tip>& TipsDictionary::at(const std::string& task_id) {
    for (auto& [id, tips] : entries) {
        if (id == task_id) return tips;
    }
    throw Error("tips dictionary has no entry for task '" + task_id + "'");
}

void TipsDictionary::put(const std::string& task_id, std::vector<Tip> tips) {
    for (auto& [id, existing] : entries) {
        if (id == task_id) {
            existing = std::move(tips);
            return;
        }
    }
    entries.emplace_back(task_id, std::move(tips));
}

void ExperiencePool::add_task(const TaskSpec& task) {
    if (task.id.empty()) {
        throw Error("task id must be non-empty");
    }
    if (task.instruction.empty()) {
        throw Error("task '" + task.id + "' has an empty instruction");
    }
    if (has_task(task.id)) {
        throw Error("duplicate task id '" + task.id + "'");
    }
    tasks_.push_back(task);
    trials_[task.id] = {};
}

void ExperiencePool::append_trial(const Trajectory& traj) {
    auto it = trials_.find(traj.task_id);
    if (it == trials_.end()) {
        throw Error("append_trial: unknown task_id '" + traj.task_id + "'");
    }
    auto& list = it->second;
    if (traj.trial_index != static_cast<int>(list.size())) {
        throw Error("append_trial: non-contiguous trial_index " +
                    std::to_string(traj.trial_index) + " for task '" + traj.task_id +
                    "' (expected " + std::to_string(list.size()) + ")");
    }
    // Collection stops on success, so a success is always the last trial.
    if (!list.empty() && list.back().succeeded) {
        throw Error("append_trial: task '" + traj.task_id + "' already has a succeeded trial");
    }
    list.push_back(traj);
}

const TaskSpec* ExperiencePool::find_task(const std::string& task_id) const {
    for (const auto& t : tasks_) {
        if (t.id == task_id) return &t;
    }
    return nullptr;
}

bool ExperiencePool::has_task(const std::string& task_id) const {
    return trials_.count(task_id) > 0;
}

const std::vector<Trajectory>& ExperiencePool::trials_for(const std::string& task_id) const {
    auto it = trials_.find(task_id);
    if (it == trials_.end()) {
        throw Error("unknown task_id '" + task_id + "'");
    }
    return it->second;
}

size_t ExperiencePool::trial_count() const {
    size_t n = 0;
    for (const auto& [id, list] : trials_) n += list.size();
    return n;
}

bool ExperiencePool::operator==(const ExperiencePool& other) const {
    return tasks_ == other.tasks_ && trials_ == other.trials_ &&
           focus_points == other.focus_points && embedder_id == other.embedder_id;
}

std::map<std::string, CompareEntry> compare_view(const ExperiencePool& pool) {
    std::map<std::string, CompareEntry> view;
    for (const auto& task : pool.tasks()) {
        const auto& trials = pool.trials_for(task.id);
        CompareEntry entry;
        bool has_success = false;
        for (const auto& traj : trials) {
            if (traj.succeeded) {
                entry.success = traj;
                has_success = true;
            } else {
                entry.failures.push_back(traj);
            }
        }
        if (has_success && !entry.failures.empty()) {
            view.emplace(task.id, std::move(entry));
        }
    }
    return view;
}

std::map<std::string, Trajectory> success_view(const ExperiencePool& pool) {
    std::map<std::string, Trajectory> view;
    for (const auto& task : pool.tasks()) {
        for (const auto& traj : pool.trials_for(task.id)) {
            if (traj.succeeded) {
                view.emplace(task.id, traj);
                break;
            }
        }
    }
    return view;
}

}  // namespace recall::memory

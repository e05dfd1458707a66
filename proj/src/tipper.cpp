#include "recall/tipper.hpp"

#include <algorithm>
#include <sstream>

#include "recall/error.hpp"

namespace recall::tipper {

using memory::Tip;
using memory::TipsDictionary;
using memory::Trajectory;

std::string tips_to_text(const std::vector<Tip>& tips) {
    std::ostringstream out;
    for (size_t i = 0; i < tips.size(); ++i) {
        out << (i + 1) << ". " << tips[i].text << "\n";
    }
    return out.str();
}

namespace {

// exact-string dedup, preserving first occurrence order
void append_deduped(std::vector<Tip>& into, const std::vector<Tip>& extra) {
    for (const auto& tip : extra) {
        const bool seen = std::any_of(into.begin(), into.end(),
                                      [&](const Tip& t) { return t.text == tip.text; });
        if (!seen) into.push_back(tip);
    }
}

std::vector<Tip> to_tips(const std::vector<std::string>& items, const std::string& origin) {
    std::vector<Tip> tips;
    tips.reserve(items.size());
    for (const auto& text : items) tips.push_back(Tip{text, origin});
    std::vector<Tip> deduped;
    append_deduped(deduped, tips);
    return deduped;
}

}  // namespace

Tipper::Tipper(llm::Gateway& gateway, TipperConfig config)
    : gateway_(gateway), config_(config) {}

std::vector<std::string> Tipper::complete_list(const llm::RolePrompt& prompt,
                                               const llm::Bindings& bindings, int max_items) {
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string response = gateway_.complete(prompt, bindings);
        try {
            return llm::parse_numbered_list(response, max_items);
        } catch (const ParseError& e) {
            last_error = e.what();
        }
    }
    throw ParseError("tips unparseable after retry: " + last_error);
}

std::vector<Tip> Tipper::extract_compare_tips(const Trajectory& success,
                                              const std::vector<Trajectory>& failures) {
    if (failures.empty()) {
        throw Error("extract_compare_tips: no failed trajectories to compare against");
    }
    std::ostringstream fails;
    for (size_t i = 0; i < failures.size(); ++i) {
        fails << "Failed attempt " << (i + 1) << ":\n"
              << failures[i].to_text(config_.trajectory_tail_steps) << "\n";
    }
    const auto items = complete_list(gateway_.library().tips_compare,
                                     {{"fail_trajectories", fails.str()},
                                      {"success_trajectory",
                                       success.to_text(config_.trajectory_tail_steps)}},
                                     config_.max_compare_tips);
    return to_tips(items, "compare");
}

std::vector<Tip> Tipper::extract_success_supplement(const Trajectory& success,
                                                    const std::vector<Tip>& existing) {
    if (existing.empty()) {
        throw Error("extract_success_supplement: no existing tips for the task");
    }
    const auto items = complete_list(gateway_.library().tips_supplement,
                                     {{"success_trajectory",
                                       success.to_text(config_.trajectory_tail_steps)},
                                      {"existing_tips", tips_to_text(existing)}},
                                     config_.max_success_tips);
    auto tips = to_tips(items, "success_supplement");
    // exact duplicates of already-recorded tips are dropped
    std::erase_if(tips, [&](const Tip& tip) {
        return std::any_of(existing.begin(), existing.end(),
                           [&](const Tip& t) { return t.text == tip.text; });
    });
    return tips;
}

std::vector<Tip> Tipper::extract_success_tips(const Trajectory& success) {
    const auto items = complete_list(gateway_.library().tips_success,
                                     {{"success_trajectory",
                                       success.to_text(config_.trajectory_tail_steps)}},
                                     config_.max_success_tips);
    return to_tips(items, "success");
}

TipsDictionary Tipper::build_tips_dictionary(const memory::ExperiencePool& pool,
                                             trace::EpisodeTrace* trace) {
    const auto compare = memory::compare_view(pool);
    const auto success = memory::success_view(pool);
    TipsDictionary dictionary;
    for (const auto& task : pool.tasks()) {
        const auto compare_it = compare.find(task.id);
        if (compare_it != compare.end()) {
            std::vector<Tip> tips;
            try {
                tips = extract_compare_tips(compare_it->second.success,
                                            compare_it->second.failures);
            } catch (const ParseError& e) {
                if (trace) trace->note("tips-skip", task.id + ": " + e.what());
                continue;
            }
            try {
                append_deduped(tips, extract_success_supplement(success.at(task.id), tips));
            } catch (const ParseError& e) {
                if (trace) trace->note("tips-supplement-skip", task.id + ": " + e.what());
            }
            dictionary.put(task.id, std::move(tips));
            continue;
        }
        const auto success_it = success.find(task.id);
        if (success_it != success.end()) {
            try {
                dictionary.put(task.id, extract_success_tips(success_it->second));
            } catch (const ParseError& e) {
                if (trace) trace->note("tips-skip", task.id + ": " + e.what());
            }
        }
        // unsolved tasks stay out of the dictionary
    }
    return dictionary;
}

TipsDictionary Tipper::align_tips(const TipsDictionary& tips,
                                  const std::string& target_env_description,
                                  trace::EpisodeTrace* trace) {
    if (tips.empty()) {
        throw Error("align_tips: tips dictionary is empty");
    }
    if (target_env_description.empty()) {
        throw Error("align_tips: target environment description is empty");
    }
    TipsDictionary aligned;
    for (const auto& [task_id, entry] : tips.entries) {
        std::vector<std::string> items;
        try {
            const std::string response =
                gateway_.complete(gateway_.library().tips_align,
                                  {{"existing_tips", tips_to_text(entry)},
                                   {"env_description", target_env_description}});
            items = llm::parse_numbered_list(response, static_cast<int>(entry.size()));
        } catch (const ParseError& e) {
            if (trace) trace->note("align-keep-original", task_id + ": " + e.what());
            aligned.put(task_id, entry);
            continue;
        }
        aligned.put(task_id, to_tips(items, "aligned"));
    }
    return aligned;
}

}  // namespace recall::tipper

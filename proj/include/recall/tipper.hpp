#pragma once

#include <string>
#include <vector>

#include "recall/llm.hpp"
#include "recall/memory.hpp"
#include "recall/trace.hpp"

namespace recall::tipper {

struct TipperConfig {
    int max_compare_tips = 5;
    int max_success_tips = 3;        // also caps the supplement list
    int trajectory_tail_steps = 40;  // long trajectories are tail-truncated
};

// Hybrid-grained tips extraction: compare-based tips for tasks with both
// outcomes, success supplements for the same tasks, success-only tips for
// first-try tasks, plus the transfer-alignment pass.
class Tipper {
public:
    Tipper(llm::Gateway& gateway, TipperConfig config = {});

    std::vector<memory::Tip> extract_compare_tips(const memory::Trajectory& success,
                                                  const std::vector<memory::Trajectory>& failures);

    std::vector<memory::Tip> extract_success_supplement(const memory::Trajectory& success,
                                                        const std::vector<memory::Tip>& existing);

    std::vector<memory::Tip> extract_success_tips(const memory::Trajectory& success);

    memory::TipsDictionary build_tips_dictionary(const memory::ExperiencePool& pool,
                                                 trace::EpisodeTrace* trace = nullptr);

    // Rewrites every entry for a new environment (origin becomes "aligned").
    // An unparseable rewrite keeps the original entry.
    memory::TipsDictionary align_tips(const memory::TipsDictionary& tips,
                                      const std::string& target_env_description,
                                      trace::EpisodeTrace* trace = nullptr);

    const TipperConfig& config() const { return config_; }

private:
    // one retry on unparseable output, then rethrows ParseError
    std::vector<std::string> complete_list(const llm::RolePrompt& prompt,
                                           const llm::Bindings& bindings, int max_items);

    llm::Gateway& gateway_;
    TipperConfig config_;
};

// Renders tips as a numbered list (the {existing_tips} / {tips} binding).
std::string tips_to_text(const std::vector<memory::Tip>& tips);

}  // namespace recall::tipper

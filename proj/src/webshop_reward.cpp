#include "recall/webshop_reward.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>
#include <vector>

namespace recall::env {

namespace {

size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return common.size();
}

std::set<std::string> lower_tokens(const std::string& text) {
    std::set<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.insert(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.insert(current);
    return tokens;
}

}  // namespace

double webshop_reward_type(double text_match) {
    if (text_match == 0.0) return 0.0;
    if (text_match < 0.1) return 0.1;
    if (text_match <= 0.2) return 0.5;
    return 1.0;
}

double webshop_reward(const ShoppingQuery& query, const PurchaseOutcome& outcome) {
    const double att = static_cast<double>(
        intersection_size(query.required_attributes, outcome.attributes));
    const double opt =
        static_cast<double>(intersection_size(query.required_options, outcome.options));
    const double price_ok = outcome.price <= query.price_cap ? 1.0 : 0.0;
    const double denom = static_cast<double>(query.required_attributes.size() +
                                             query.required_options.size() + 1);
    return (att + opt + price_ok) / denom * webshop_reward_type(outcome.text_match);
}

double token_overlap_text_match(const std::string& chosen_title,
                                const std::string& target_title) {
    const auto target = lower_tokens(target_title);
    if (target.empty()) return 0.0;
    const auto chosen = lower_tokens(chosen_title);
    return static_cast<double>(intersection_size(chosen, target)) /
           static_cast<double>(target.size());
}

}  // namespace recall::env

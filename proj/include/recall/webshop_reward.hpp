#pragma once

#include <set>
#include <string>

namespace recall::env {

struct ShoppingQuery {
    std::set<std::string> required_attributes;  // U_att
    std::set<std::string> required_options;     // U_opt
    double price_cap = 0.0;                     // u_price
};

struct PurchaseOutcome {
    std::set<std::string> attributes;  // Y_att
    std::set<std::string> options;     // Y_opt
    double price = 0.0;                // y_price
    double text_match = 0.0;           // title TextMatch score in [0,1]
};

// Graded shopping reward:
//   r = (|U_att ∩ Y_att| + |U_opt ∩ Y_opt| + 1[y_price <= u_price])
//       / (|U_att| + |U_opt| + 1) * r_type
// with r_type stepping through 0 / 0.1 / 0.5 / 1 on the TextMatch score.
double webshop_reward(const ShoppingQuery& query, const PurchaseOutcome& outcome);

// The TextMatch factor alone.
double webshop_reward_type(double text_match);

// Plain token-overlap stand-in for the title TextMatch score. The real
// metric matches pronouns/nouns/proper nouns, which needs a POS tagger;
// this fallback counts shared lowercase alphanumeric tokens over the
// target's token count.
double token_overlap_text_match(const std::string& chosen_title,
                                const std::string& target_title);

}  // namespace recall::env

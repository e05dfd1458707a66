#include "recall/minihouse.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "recall/error.hpp"

namespace recall::env {

namespace {

// Fixed room layout; the generator only varies object placement.
std::vector<Receptacle> base_receptacles() {
    return {
        {"cabinet 1", true, false, "in"},   {"cabinet 2", true, false, "in"},
        {"countertop 1", false, true, "on"}, {"desk 1", false, true, "on"},
        {"drawer 1", true, false, "in"},    {"drawer 2", true, false, "in"},
        {"drawer 3", true, false, "in"},    {"fridge 1", true, false, "in"},
        {"garbagecan 1", false, true, "in"}, {"microwave 1", true, false, "in"},
        {"shelf 1", false, true, "on"},     {"sidetable 1", false, true, "on"},
        {"sinkbasin 1", false, true, "in"},
    };
}

constexpr const char* kLampName = "desklamp 1";
constexpr const char* kLampHome = "sidetable 1";

// Candidate object spots for generation (closed storage plus open surfaces;
// fridge/microwave/sinkbasin/garbagecan stay clear so appliances start empty).
const std::vector<std::string>& placement_spots() {
    static const std::vector<std::string> spots = {
        "drawer 1", "drawer 2", "drawer 3", "cabinet 1", "cabinet 2",
        "desk 1",   "countertop 1", "shelf 1", "sidetable 1",
    };
    return spots;
}

const std::vector<std::string>& place_targets() {
    static const std::vector<std::string> targets = {
        "desk 1", "countertop 1", "shelf 1", "sidetable 1",
        "drawer 1", "cabinet 1", "garbagecan 1",
    };
    return targets;
}

const std::vector<std::string>& goal_types_for(TaskType type) {
    static const std::vector<std::string> pick = {
        "mug", "book", "pencil", "keychain", "watch", "creditcard",
        "cd", "statue", "vase", "bowl", "plate"};
    static const std::vector<std::string> clean = {
        "mug", "cup", "plate", "bowl", "knife", "spoon", "fork", "apple", "tomato"};
    static const std::vector<std::string> food = {
        "apple", "tomato", "potato", "bread", "egg", "mug", "cup"};
    static const std::vector<std::string> examine = {
        "book", "creditcard", "cd", "statue", "watch", "alarmclock", "pencil"};
    static const std::vector<std::string> pick_two = {
        "pencil", "pen", "book", "cd", "keychain", "soapbar"};
    switch (type) {
        case TaskType::PickAndPlace: return pick;
        case TaskType::CleanAndPlace: return clean;
        case TaskType::HeatAndPlace: return food;
        case TaskType::CoolAndPlace: return food;
        case TaskType::ExamineInLight: return examine;
        case TaskType::PickTwo: return pick_two;
    }
    return pick;
}

const std::vector<std::string>& distractor_types() {
    static const std::vector<std::string> all = {
        "mug", "cup", "plate", "bowl", "apple", "tomato", "potato", "bread",
        "egg", "knife", "spoon", "fork", "pencil", "pen", "book", "keychain",
        "creditcard", "watch", "soapbar", "statue", "cd", "vase", "alarmclock"};
    return all;
}

// mt19937 is fully specified by the standard, so draws (and therefore
// worlds) are identical across platforms.
uint32_t draw(std::mt19937& rng, size_t n) { return rng() % static_cast<uint32_t>(n); }

std::string article(const std::string& noun) { return "a " + noun; }

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string few_shot_text() {
    return
        "Your task is to: put a keychain on the shelf 1.\n"
        "> think: I should locate a keychain first. The sidetable is a likely spot.\n"
        "> go to sidetable 1\n"
        "You arrive at sidetable 1. On the sidetable 1, you see a desklamp 1 and a keychain 1.\n"
        "> take keychain 1 from sidetable 1\n"
        "You pick up the keychain 1 from the sidetable 1.\n"
        "> go to shelf 1\n"
        "You arrive at shelf 1. On the shelf 1, you see nothing.\n"
        "> put keychain 1 on shelf 1\n"
        "You put the keychain 1 on the shelf 1.\n"
        "\n"
        "Your task is to: put a hot apple on the countertop 1.\n"
        "> go to drawer 1\n"
        "You arrive at drawer 1. The drawer 1 is closed.\n"
        "> open drawer 1\n"
        "You open the drawer 1. The drawer 1 is open. In the drawer 1, you see a apple 1.\n"
        "> take apple 1 from drawer 1\n"
        "You pick up the apple 1 from the drawer 1.\n"
        "> go to microwave 1\n"
        "You arrive at microwave 1. The microwave 1 is closed.\n"
        "> heat apple 1 with microwave 1\n"
        "You heat the apple 1 using the microwave 1.\n"
        "> go to countertop 1\n"
        "You arrive at countertop 1. On the countertop 1, you see nothing.\n"
        "> put apple 1 on countertop 1\n"
        "You put the apple 1 on the countertop 1.\n";
}

EnvironmentSpec minihouse_spec(int step_budget) {
    EnvironmentSpec spec;
    spec.env_name = MiniHouseEnv::env_name();
    spec.description =
        "A single room with thirteen receptacles: drawers and cabinets that open and "
        "close, a fridge that cools, a microwave that heats, a sinkbasin for cleaning, "
        "and open spots (desk, shelf, countertop, sidetable, garbagecan). A desklamp "
        "stands on the sidetable. Tasks ask the agent to find objects and move, clean, "
        "heat, cool, or examine them under the lamp. The agent holds at most one object "
        "at a time. A command that cannot be carried out gets the reply "
        "\"Nothing happens.\"";
    spec.action_grammar = {
        "go to {receptacle}",
        "open {receptacle}",
        "close {receptacle}",
        "take {object} from {receptacle}",
        "put {object} in/on {receptacle}",
        "clean {object} with sinkbasin 1",
        "heat {object} with microwave 1",
        "cool {object} with fridge 1",
        "use {lamp}",
        "examine {object or receptacle}",
        "look",
        "inventory",
    };
    spec.step_budget = step_budget;
    spec.few_shot = few_shot_text();
    return spec;
}

}  // namespace

const char* task_type_name(TaskType type) {
    switch (type) {
        case TaskType::PickAndPlace: return "pick_and_place";
        case TaskType::CleanAndPlace: return "clean_and_place";
        case TaskType::HeatAndPlace: return "heat_and_place";
        case TaskType::CoolAndPlace: return "cool_and_place";
        case TaskType::ExamineInLight: return "examine_in_light";
        case TaskType::PickTwo: return "pick_two";
    }
    return "?";
}

std::optional<TaskType> task_type_from_name(const std::string& name) {
    for (TaskType t : kAllTaskTypes) {
        if (name == task_type_name(t)) return t;
    }
    return std::nullopt;
}

MiniHouseEnv::MiniHouseEnv(int step_budget) : spec_(minihouse_spec(step_budget)) {}

std::string MiniHouseEnv::task_id(TaskType type, uint32_t seed) {
    return std::string(env_name()) + "/" + task_type_name(type) + "/" + std::to_string(seed);
}

bool MiniHouseEnv::parse_task_id(const std::string& id, TaskType* type, uint32_t* seed) {
    const std::string prefix = std::string(env_name()) + "/";
    if (id.rfind(prefix, 0) != 0) return false;
    const auto rest = id.substr(prefix.size());
    const auto slash = rest.find('/');
    if (slash == std::string::npos) return false;
    const auto parsed = task_type_from_name(rest.substr(0, slash));
    if (!parsed) return false;
    const std::string seed_text = rest.substr(slash + 1);
    if (seed_text.empty() ||
        !std::all_of(seed_text.begin(), seed_text.end(),
                     [](unsigned char c) { return std::isdigit(c); })) {
        return false;
    }
    *type = *parsed;
    *seed = static_cast<uint32_t>(std::stoul(seed_text));
    return true;
}

memory::TaskSpec MiniHouseEnv::make_task(TaskType type, uint32_t seed,
                                         const std::string& split) {
    // Build the world once to recover the generated instruction text.
    MiniHouseEnv env;
    memory::TaskSpec task;
    task.id = task_id(type, seed);
    task.env_name = env_name();
    task.split = split;
    task.instruction = "pending";
    env.reset(task);
    task.instruction = env.instruction_;
    return task;
}

std::string MiniHouseEnv::reset(const memory::TaskSpec& task) {
    if (task.env_name != env_name()) {
        throw Error("minihouse cannot serve task '" + task.id + "' for env '" +
                    task.env_name + "'");
    }
    TaskType type;
    uint32_t seed = 0;
    if (!parse_task_id(task.id, &type, &seed)) {
        throw Error("unknown minihouse task id '" + task.id + "'");
    }

    world_ = WorldState{};
    world_.receptacles = base_receptacles();
    world_.goal.type = type;

    std::mt19937 rng(seed * 1000003u + static_cast<uint32_t>(type));

    const auto& types = goal_types_for(type);
    world_.goal.object_type = types[draw(rng, types.size())];

    const auto& targets = place_targets();
    world_.goal.target = type == TaskType::ExamineInLight
                             ? std::string()
                             : targets[draw(rng, targets.size())];

    // fixed lamp
    world_.objects.push_back(
        WorldObject{kLampName, "desklamp", kLampHome, /*takeable=*/false, /*is_lamp=*/true});

    std::map<std::string, int> type_counts;
    auto add_object = [&](const std::string& obj_type, const std::string& location) {
        const int n = ++type_counts[obj_type];
        WorldObject obj;
        obj.name = obj_type + " " + std::to_string(n);
        obj.type = obj_type;
        obj.location = location;
        world_.objects.push_back(obj);
        return obj.name;
    };

    auto spot_for_goal_object = [&]() {
        const auto& spots = placement_spots();
        while (true) {
            const auto& spot = spots[draw(rng, spots.size())];
            if (spot != world_.goal.target) return spot;
        }
    };

    const int goal_instances = type == TaskType::PickTwo ? 2 : 1;
    for (int i = 0; i < goal_instances; ++i) {
        add_object(world_.goal.object_type, spot_for_goal_object());
    }

    // Distractors never share the goal's object type, so a fresh world can
    // never start with the goal already satisfied.
    const int distractors = 3 + static_cast<int>(draw(rng, 3));
    const auto& dtypes = distractor_types();
    const auto& spots = placement_spots();
    for (int i = 0; i < distractors; ++i) {
        std::string dtype;
        do {
            dtype = dtypes[draw(rng, dtypes.size())];
        } while (dtype == world_.goal.object_type);
        add_object(dtype, spots[draw(rng, spots.size())]);
    }

    const std::string& t = world_.goal.object_type;
    std::ostringstream instr;
    const Receptacle* target = find_receptacle(world_.goal.target);
    switch (type) {
        case TaskType::PickAndPlace:
            instr << "put " << article(t) << " " << target->preposition << " the "
                  << target->name << ".";
            break;
        case TaskType::CleanAndPlace:
            instr << "put a clean " << t << " " << target->preposition << " the "
                  << target->name << ".";
            break;
        case TaskType::HeatAndPlace:
            instr << "put a hot " << t << " " << target->preposition << " the "
                  << target->name << ".";
            break;
        case TaskType::CoolAndPlace:
            instr << "put a cool " << t << " " << target->preposition << " the "
                  << target->name << ".";
            break;
        case TaskType::ExamineInLight:
            instr << "examine " << article(t) << " under the " << kLampName << ".";
            break;
        case TaskType::PickTwo:
            instr << "put two " << t << "s " << target->preposition << " the "
                  << target->name << ".";
            break;
    }
    instruction_ = instr.str();

    steps_ = 0;
    done_ = false;
    active_ = true;

    std::ostringstream obs;
    obs << "You are in the middle of a room. Looking quickly around you, you see";
    for (size_t i = 0; i < world_.receptacles.size(); ++i) {
        if (i == 0) {
            obs << " ";
        } else if (i + 1 == world_.receptacles.size()) {
            obs << ", and ";
        } else {
            obs << ", ";
        }
        obs << article(world_.receptacles[i].name);
    }
    obs << ".\n\nYour task is to: " << instruction_;
    return obs.str();
}

Environment::StepResult MiniHouseEnv::step(const std::string& action) {
    if (!active_) {
        throw Error("step on a finished minihouse episode");
    }
    std::string observation = apply_action(action);
    if (observation.empty()) {
        observation = "Nothing happens.";
    }
    ++steps_;
    StepResult result;
    result.observation = observation;
    if (goal_satisfied()) {
        done_ = true;
        result.done = true;
        result.reward = 1.0;
        active_ = false;
    } else if (steps_ >= spec_.step_budget) {
        active_ = false;
    }
    return result;
}

// Returns the observation, or "" when the action fails to parse or a
// precondition fails (the caller turns that into "Nothing happens.").
std::string MiniHouseEnv::apply_action(const std::string& action) {
    auto at = [&](const std::string& recep) { return world_.agent_location == recep; };

    if (action == "look") {
        if (world_.agent_location.empty()) {
            return "You are in the middle of a room.";
        }
        return "You are facing the " + world_.agent_location + ".";
    }
    if (action == "inventory") {
        if (world_.inventory.empty()) {
            return "You are not carrying anything.";
        }
        return "You are carrying: " + article(world_.inventory) + ".";
    }
    if (action.rfind("go to ", 0) == 0) {
        const std::string name = action.substr(6);
        const Receptacle* recep = find_receptacle(name);
        if (!recep) return "";
        world_.agent_location = name;
        if (recep->openable && !recep->open) {
            return "You arrive at " + name + ". The " + name + " is closed.";
        }
        return "You arrive at " + name + ". " + contents_sentence(*recep);
    }
    if (action.rfind("open ", 0) == 0) {
        const std::string name = action.substr(5);
        Receptacle* recep = find_receptacle(name);
        if (!recep || !at(name) || !recep->openable || recep->open) return "";
        recep->open = true;
        return "You open the " + name + ". The " + name + " is open. " +
               contents_sentence(*recep);
    }
    if (action.rfind("close ", 0) == 0) {
        const std::string name = action.substr(6);
        Receptacle* recep = find_receptacle(name);
        if (!recep || !at(name) || !recep->openable || !recep->open) return "";
        recep->open = false;
        return "You close the " + name + ".";
    }
    if (action.rfind("take ", 0) == 0) {
        const auto sep = action.find(" from ");
        if (sep == std::string::npos) return "";
        const std::string obj_name = action.substr(5, sep - 5);
        const std::string recep_name = action.substr(sep + 6);
        const Receptacle* recep = find_receptacle(recep_name);
        WorldObject* obj = find_object(obj_name);
        if (!recep || !obj || !at(recep_name)) return "";
        if (recep->openable && !recep->open) return "";
        if (obj->location != recep_name || !obj->takeable) return "";
        if (!world_.inventory.empty()) return "";
        obj->location = "inventory";
        world_.inventory = obj_name;
        return "You pick up the " + obj_name + " from the " + recep_name + ".";
    }
    if (action.rfind("put ", 0) == 0) {
        // accepts "put X in Y", "put X on Y", and the literal "put X in/on Y"
        size_t sep = action.find(" in/on ");
        size_t sep_len = 7;
        if (sep == std::string::npos) {
            sep = action.find(" in ");
            sep_len = 4;
        }
        if (sep == std::string::npos) {
            sep = action.find(" on ");
            sep_len = 4;
        }
        if (sep == std::string::npos) return "";
        const std::string obj_name = action.substr(4, sep - 4);
        const std::string recep_name = action.substr(sep + sep_len);
        Receptacle* recep = find_receptacle(recep_name);
        WorldObject* obj = find_object(obj_name);
        if (!recep || !obj || !at(recep_name)) return "";
        if (recep->openable && !recep->open) return "";
        if (world_.inventory != obj_name) return "";
        obj->location = recep_name;
        world_.inventory.clear();
        return "You put the " + obj_name + " " + recep->preposition + " the " + recep_name +
               ".";
    }
    auto appliance_action = [&](const std::string& verb, const std::string& station,
                                auto&& effect) -> std::optional<std::string> {
        if (action.rfind(verb + " ", 0) != 0) return std::nullopt;
        const auto sep = action.find(" with ");
        if (sep == std::string::npos) return std::string();
        const std::string obj_name = action.substr(verb.size() + 1, sep - verb.size() - 1);
        const std::string recep_name = action.substr(sep + 6);
        WorldObject* obj = find_object(obj_name);
        if (recep_name != station || !at(station) || !obj) return std::string();
        if (world_.inventory != obj_name) return std::string();
        effect(*obj);
        return "You " + verb + " the " + obj_name + " using the " + station + ".";
    };
    if (auto r = appliance_action("clean", "sinkbasin 1",
                                  [](WorldObject& o) { o.clean = true; })) {
        return *r;
    }
    if (auto r = appliance_action("heat", "microwave 1", [](WorldObject& o) {
            o.hot = true;
            o.cool = false;
        })) {
        return *r;
    }
    if (auto r = appliance_action("cool", "fridge 1", [](WorldObject& o) {
            o.cool = true;
            o.hot = false;
        })) {
        return *r;
    }
    if (action.rfind("use ", 0) == 0) {
        const std::string name = action.substr(4);
        WorldObject* obj = find_object(name);
        if (!obj || !obj->is_lamp || !at(obj->location)) return "";
        obj->lamp_on = true;
        return "You turn on the " + name + ".";
    }
    if (action.rfind("examine ", 0) == 0) {
        const std::string name = action.substr(8);
        if (const Receptacle* recep = find_receptacle(name)) {
            if (!at(name)) return "";
            if (recep->openable && !recep->open) {
                return "The " + name + " is closed.";
            }
            return contents_sentence(*recep);
        }
        const WorldObject* obj = find_object(name);
        if (!obj) return "";
        if (world_.inventory != name) {
            if (!at(obj->location)) return "";
            const Receptacle* holder = find_receptacle(obj->location);
            if (holder && holder->openable && !holder->open) return "";
        }
        return "You look closely at the " + name + ".";
    }
    return "";
}

std::string MiniHouseEnv::contents_sentence(const Receptacle& recep) const {
    std::vector<std::string> names;
    for (const auto& obj : world_.objects) {
        if (obj.location == recep.name) names.push_back(obj.name);
    }
    const std::string where =
        (recep.preposition == "on" ? "On the " : "In the ") + recep.name;
    if (names.empty()) {
        return where + ", you see nothing.";
    }
    std::ostringstream out;
    out << where << ", you see ";
    for (size_t i = 0; i < names.size(); ++i) {
        if (i > 0) {
            out << (i + 1 == names.size() ? " and " : ", ");
        }
        out << article(names[i]);
    }
    out << ".";
    return out.str();
}

const Receptacle* MiniHouseEnv::find_receptacle(const std::string& name) const {
    for (const auto& r : world_.receptacles) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

Receptacle* MiniHouseEnv::find_receptacle(const std::string& name) {
    return const_cast<Receptacle*>(std::as_const(*this).find_receptacle(name));
}

const WorldObject* MiniHouseEnv::find_object(const std::string& name) const {
    for (const auto& o : world_.objects) {
        if (o.name == name) return &o;
    }
    return nullptr;
}

WorldObject* MiniHouseEnv::find_object(const std::string& name) {
    return const_cast<WorldObject*>(std::as_const(*this).find_object(name));
}

bool MiniHouseEnv::goal_satisfied() const {
    const Goal& goal = world_.goal;
    auto matching_at_target = [&](auto&& pred) {
        for (const auto& obj : world_.objects) {
            if (obj.type == goal.object_type && obj.location == goal.target && pred(obj)) {
                return true;
            }
        }
        return false;
    };
    switch (goal.type) {
        case TaskType::PickAndPlace:
            return matching_at_target([](const WorldObject&) { return true; });
        case TaskType::CleanAndPlace:
            return matching_at_target([](const WorldObject& o) { return o.clean; });
        case TaskType::HeatAndPlace:
            return matching_at_target([](const WorldObject& o) { return o.hot; });
        case TaskType::CoolAndPlace:
            return matching_at_target([](const WorldObject& o) { return o.cool; });
        case TaskType::ExamineInLight: {
            const WorldObject* lamp = find_object(kLampName);
            if (!lamp || !lamp->lamp_on) return false;
            if (world_.agent_location != lamp->location) return false;
            const WorldObject* held =
                world_.inventory.empty() ? nullptr : find_object(world_.inventory);
            return held && held->type == goal.object_type;
        }
        case TaskType::PickTwo: {
            int count = 0;
            for (const auto& obj : world_.objects) {
                if (obj.type == goal.object_type && obj.location == goal.target) ++count;
            }
            return count >= 2;
        }
    }
    return false;
}

// Hashes world state only (not the step counter), so "Nothing happens."
// steps and the reflection path can be checked for having no side effects.
uint64_t MiniHouseEnv::state_hash() const {
    std::ostringstream out;
    out << world_.agent_location << "|" << world_.inventory << "|";
    for (const auto& r : world_.receptacles) out << r.name << "=" << r.open << ";";
    for (const auto& o : world_.objects) {
        out << o.name << "@" << o.location << ":" << o.clean << o.hot << o.cool << o.lamp_on
            << ";";
    }
    return fnv1a64(out.str());
}

// ============================================================================
// Oracle policy
// ============================================================================

std::string oracle_policy(const MiniHouseEnv& env) {
    const WorldState& world = env.world();
    const Goal& goal = world.goal;

    if (env.goal_satisfied()) {
        return "look";
    }

    auto receptacle = [&](const std::string& name) -> const Receptacle& {
        for (const auto& r : world.receptacles) {
            if (r.name == name) return r;
        }
        throw Error("oracle: unknown receptacle '" + name + "'");
    };

    // Approach a receptacle, opening it when necessary; returns the action
    // to issue, or nullopt when the agent is ready to interact with it.
    auto approach = [&](const std::string& name) -> std::optional<std::string> {
        if (world.agent_location != name) return "go to " + name;
        const Receptacle& recep = receptacle(name);
        if (recep.openable && !recep.open) return "open " + name;
        return std::nullopt;
    };

    auto put_held_at = [&](const std::string& target) -> std::string {
        if (auto a = approach(target)) return *a;
        return "put " + world.inventory + " " + receptacle(target).preposition + " " + target;
    };

    // Pick the first goal-type object (creation order) that still needs
    // handling: not yet at the target, or not yet processed.
    auto needs_handling = [&](const WorldObject& obj) {
        if (obj.type != goal.object_type) return false;
        switch (goal.type) {
            case TaskType::PickAndPlace:
            case TaskType::PickTwo:
                return obj.location != goal.target;
            case TaskType::CleanAndPlace:
                return !(obj.clean && obj.location == goal.target);
            case TaskType::HeatAndPlace:
                return !(obj.hot && obj.location == goal.target);
            case TaskType::CoolAndPlace:
                return !(obj.cool && obj.location == goal.target);
            case TaskType::ExamineInLight:
                return true;
        }
        return false;
    };

    const WorldObject* held =
        world.inventory.empty() ? nullptr : [&] {
            for (const auto& o : world.objects) {
                if (o.name == world.inventory) return &o;
            }
            return static_cast<const WorldObject*>(nullptr);
        }();

    const WorldObject* subject = nullptr;
    if (held && needs_handling(*held)) {
        subject = held;
    } else {
        for (const auto& obj : world.objects) {
            if (obj.location != "inventory" && needs_handling(obj)) {
                subject = &obj;
                break;
            }
        }
    }
    if (!subject) {
        return "look";
    }

    if (subject != held) {
        if (auto a = approach(subject->location)) return *a;
        return "take " + subject->name + " from " + subject->location;
    }

    // Holding the subject: process, then place (or light, for examine).
    switch (goal.type) {
        case TaskType::ExamineInLight: {
            const WorldObject* lamp = nullptr;
            for (const auto& o : world.objects) {
                if (o.is_lamp) {
                    lamp = &o;
                    break;
                }
            }
            if (!lamp) throw Error("oracle: world has no lamp");
            if (world.agent_location != lamp->location) return "go to " + lamp->location;
            return "use " + lamp->name;
        }
        case TaskType::CleanAndPlace:
            if (!subject->clean) {
                if (auto a = approach("sinkbasin 1")) return *a;
                return "clean " + subject->name + " with sinkbasin 1";
            }
            return put_held_at(goal.target);
        case TaskType::HeatAndPlace:
            if (!subject->hot) {
                if (world.agent_location != "microwave 1") return "go to microwave 1";
                return "heat " + subject->name + " with microwave 1";
            }
            return put_held_at(goal.target);
        case TaskType::CoolAndPlace:
            if (!subject->cool) {
                if (world.agent_location != "fridge 1") return "go to fridge 1";
                return "cool " + subject->name + " with fridge 1";
            }
            return put_held_at(goal.target);
        case TaskType::PickAndPlace:
        case TaskType::PickTwo:
            return put_held_at(goal.target);
    }
    return "look";
}

std::vector<memory::TaskSpec> generate_minihouse_tasks(int count, uint32_t seed_base,
                                                       const std::string& split) {
    std::vector<memory::TaskSpec> tasks;
    tasks.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        const TaskType type = kAllTaskTypes[static_cast<size_t>(i) % kAllTaskTypes.size()];
        tasks.push_back(MiniHouseEnv::make_task(type, seed_base + static_cast<uint32_t>(i),
                                                split));
    }
    return tasks;
}

}  // namespace recall::env

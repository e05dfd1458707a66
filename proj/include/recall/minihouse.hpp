#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recall/environment.hpp"
#include "recall/memory.hpp"

namespace recall::env {

// The six household task families.
enum class TaskType {
    PickAndPlace,
    CleanAndPlace,
    HeatAndPlace,
    CoolAndPlace,
    ExamineInLight,
    PickTwo,
};

inline constexpr std::array<TaskType, 6> kAllTaskTypes = {
    TaskType::PickAndPlace,  TaskType::CleanAndPlace, TaskType::HeatAndPlace,
    TaskType::CoolAndPlace,  TaskType::ExamineInLight, TaskType::PickTwo,
};

const char* task_type_name(TaskType type);
std::optional<TaskType> task_type_from_name(const std::string& name);

// ============================================================================
// World model
// ============================================================================

struct Receptacle {
    std::string name;         // "drawer 1"
    bool openable = false;
    bool open = true;
    std::string preposition;  // "in" or "on"
};

struct WorldObject {
    std::string name;  // "mug 1"
    std::string type;  // "mug"
    std::string location;
    bool takeable = true;
    bool is_lamp = false;
    bool lamp_on = false;
    bool clean = false;
    bool hot = false;
    bool cool = false;
};

struct Goal {
    TaskType type = TaskType::PickAndPlace;
    std::string object_type;
    std::string target;  // receptacle name, empty for examine-in-light
};

struct WorldState {
    std::vector<Receptacle> receptacles;
    std::vector<WorldObject> objects;
    std::string agent_location;  // receptacle name, empty at episode start
    std::string inventory;       // held object name, empty-handed when empty
    Goal goal;
};

// ============================================================================
// MiniHouse: a deterministic single-room text world. Every world is fully
// determined by (seed, task_type); every generated task is solvable within
// the step budget by the oracle policy below.
// ============================================================================

class MiniHouseEnv : public Environment {
public:
    explicit MiniHouseEnv(int step_budget = kHouseholdStepBudget);

    static const char* env_name() { return "minihouse"; }

    // Task ids look like "minihouse/pick_and_place/7".
    static std::string task_id(TaskType type, uint32_t seed);
    static bool parse_task_id(const std::string& id, TaskType* type, uint32_t* seed);
    static memory::TaskSpec make_task(TaskType type, uint32_t seed,
                                      const std::string& split = "train");

    const EnvironmentSpec& spec() const override { return spec_; }
    std::string reset(const memory::TaskSpec& task) override;
    StepResult step(const std::string& action) override;
    int steps_taken() const override { return steps_; }
    bool episode_active() const override { return active_; }

    // Read-only state access for the oracle policy and for tests.
    const WorldState& world() const { return world_; }
    bool goal_satisfied() const;
    uint64_t state_hash() const;

private:
    std::string apply_action(const std::string& action);  // "" means Nothing happens.
    std::string contents_sentence(const Receptacle& recep) const;
    const Receptacle* find_receptacle(const std::string& name) const;
    Receptacle* find_receptacle(const std::string& name);
    const WorldObject* find_object(const std::string& name) const;
    WorldObject* find_object(const std::string& name);

    EnvironmentSpec spec_;
    WorldState world_;
    std::string instruction_;
    int steps_ = 0;
    bool active_ = false;
    bool done_ = false;
};

// Next action that makes progress from the current state; following it from
// reset reaches the goal within the step budget. Test fixture quality of
// service: it reads the full world state.
std::string oracle_policy(const MiniHouseEnv& env);

// Round-robin task set over all six types, seeds seed_base, seed_base+1, ...
std::vector<memory::TaskSpec> generate_minihouse_tasks(int count, uint32_t seed_base,
                                                       const std::string& split = "train");

}  // namespace recall::env

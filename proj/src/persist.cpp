#include "recall/persist.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "recall/error.hpp"

namespace recall::persist {

using nlohmann::ordered_json;
using memory::ExperiencePool;
using memory::FocusPointSet;
using memory::Step;
using memory::TaskSpec;
using memory::Tip;
using memory::TipsDictionary;
using memory::Trajectory;

namespace {

ordered_json task_to_json(const TaskSpec& t) {
    ordered_json j;
    j["id"] = t.id;
    j["instruction"] = t.instruction;
    j["env_name"] = t.env_name;
    j["split"] = t.split;
    j["fold"] = t.fold;
    return j;
}

TaskSpec task_from_json(const ordered_json& j) {
    TaskSpec t;
    t.id = j.at("id").get<std::string>();
    t.instruction = j.at("instruction").get<std::string>();
    t.env_name = j.at("env_name").get<std::string>();
    t.split = j.at("split").get<std::string>();
    t.fold = j.at("fold").get<int>();
    return t;
}

ordered_json step_to_json(const Step& s) {
    ordered_json j;
    j["index"] = s.index;
    j["thought"] = s.thought;
    j["action"] = s.action;
    j["observation"] = s.observation;
    j["correction"] = s.correction;
    return j;
}

Step step_from_json(const ordered_json& j) {
    Step s;
    s.index = j.at("index").get<int>();
    s.thought = j.at("thought").get<std::string>();
    s.action = j.at("action").get<std::string>();
    s.observation = j.at("observation").get<std::string>();
    s.correction = j.at("correction").get<std::string>();
    return s;
}

ordered_json trajectory_to_json(const Trajectory& t) {
    ordered_json j;
    j["task_id"] = t.task_id;
    j["trial_index"] = t.trial_index;
    j["initial_observation"] = t.initial_observation;
    j["steps"] = ordered_json::array();
    for (const auto& s : t.steps) j["steps"].push_back(step_to_json(s));
    j["succeeded"] = t.succeeded;
    j["reward"] = t.reward;
    j["reflections_used"] = t.reflections_used;
    return j;
}

Trajectory trajectory_from_json(const ordered_json& j) {
    Trajectory t;
    t.task_id = j.at("task_id").get<std::string>();
    t.trial_index = j.at("trial_index").get<int>();
    t.initial_observation = j.at("initial_observation").get<std::string>();
    for (const auto& s : j.at("steps")) t.steps.push_back(step_from_json(s));
    t.succeeded = j.at("succeeded").get<bool>();
    t.reward = j.at("reward").get<double>();
    t.reflections_used = j.at("reflections_used").get<std::string>();
    return t;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw Error("write to '" + path.string() + "' failed");
    }
}

}  // namespace

std::string pool_to_jsonl(const ExperiencePool& pool) {
    std::ostringstream out;
    ordered_json header;
    header["schema"] = kPoolSchema;
    header["embedder_id"] = pool.embedder_id;
    header["focus_points"] = ordered_json::object();
    header["focus_points"]["items"] = pool.focus_points.items;
    header["focus_points"]["source_env"] = pool.focus_points.source_env;
    header["tasks"] = ordered_json::array();
    for (const auto& t : pool.tasks()) header["tasks"].push_back(task_to_json(t));
    out << header.dump() << "\n";
    for (const auto& t : pool.tasks()) {
        for (const auto& traj : pool.trials_for(t.id)) {
            out << trajectory_to_json(traj).dump() << "\n";
        }
    }
    return out.str();
}

ExperiencePool pool_from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    ExperiencePool pool;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("pool line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (!header_seen) {
                const auto schema = j.at("schema").get<std::string>();
                if (schema != kPoolSchema) {
                    throw Error("pool schema mismatch: got '" + schema + "', expected '" +
                                std::string(kPoolSchema) + "'");
                }
                pool.embedder_id = j.at("embedder_id").get<std::string>();
                pool.focus_points.items =
                    j.at("focus_points").at("items").get<std::vector<std::string>>();
                pool.focus_points.source_env =
                    j.at("focus_points").at("source_env").get<std::string>();
                for (const auto& t : j.at("tasks")) pool.add_task(task_from_json(t));
                header_seen = true;
            } else {
                pool.append_trial(trajectory_from_json(j));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("pool line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!header_seen) {
        throw ParseError("pool file has no header record");
    }
    return pool;
}

void save_pool(const ExperiencePool& pool, const std::filesystem::path& path) {
    write_file(path, pool_to_jsonl(pool));
}

ExperiencePool load_pool(const std::filesystem::path& path) {
    return pool_from_jsonl(read_file(path));
}

std::string tips_to_json(const TipsDictionary& tips, const std::string& env_name) {
    ordered_json j;
    j["schema"] = kTipsSchema;
    j["env_name"] = env_name;
    j["entries"] = ordered_json::array();
    for (const auto& [task_id, list] : tips.entries) {
        ordered_json entry;
        entry["task_id"] = task_id;
        entry["tips"] = ordered_json::array();
        for (const auto& tip : list) {
            ordered_json tj;
            tj["text"] = tip.text;
            tj["origin"] = tip.origin;
            entry["tips"].push_back(tj);
        }
        j["entries"].push_back(entry);
    }
    return j.dump(2) + "\n";
}

TipsDictionary tips_from_json(const std::string& text, std::string* env_name) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tips document: ") + e.what());
    }
    try {
        const auto schema = j.at("schema").get<std::string>();
        if (schema != kTipsSchema) {
            throw Error("tips schema mismatch: got '" + schema + "', expected '" +
                        std::string(kTipsSchema) + "'");
        }
        if (env_name) *env_name = j.at("env_name").get<std::string>();
        TipsDictionary tips;
        for (const auto& entry : j.at("entries")) {
            std::vector<Tip> list;
            for (const auto& tj : entry.at("tips")) {
                list.push_back(Tip{tj.at("text").get<std::string>(),
                                   tj.at("origin").get<std::string>()});
            }
            tips.put(entry.at("task_id").get<std::string>(), std::move(list));
        }
        return tips;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tips document: ") + e.what());
    }
}

void save_tips(const TipsDictionary& tips, const std::filesystem::path& path,
               const std::string& env_name) {
    write_file(path, tips_to_json(tips, env_name));
}

TipsDictionary load_tips(const std::filesystem::path& path, std::string* env_name) {
    return tips_from_json(read_file(path), env_name);
}

}  // namespace recall::persist

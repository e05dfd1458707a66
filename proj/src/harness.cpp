#include "recall/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "recall/error.hpp"
#include "recall/minihouse.hpp"
#include "recall/wire.hpp"

namespace recall::harness {

using nlohmann::ordered_json;
using memory::TaskSpec;

// ============================================================================
// Config parsing
// ============================================================================

namespace {

void require_object(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) {
        throw Error("config field '" + path + "' must be an object");
    }
}

void reject_unknown_keys(const ordered_json& j, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw Error("unknown config field '" + (path.empty() ? key : path + "." + key) +
                        "'");
        }
    }
}

template <typename T>
T read_field(const ordered_json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error("config field '" + (path.empty() ? key : path + "." + key) +
                    "' has the wrong type");
    }
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    require_object(j, "");
    reject_unknown_keys(j, "", {"env", "backend", "collection", "tips", "trigger", "planner",
                                "retrieval", "folds", "tasks", "seed", "jobs", "output_dir",
                                "external"});
    RunConfig config;

    if (j.contains("env")) {
        const auto& e = j.at("env");
        require_object(e, "env");
        reject_unknown_keys(e, "env", {"name", "step_budget", "description", "few_shot"});
        config.env_name = read_field<std::string>(e, "name", "env", config.env_name);
        config.step_budget = read_field<int>(e, "step_budget", "env", config.step_budget);
        config.env_description = read_field<std::string>(e, "description", "env", "");
        config.env_few_shot = read_field<std::string>(e, "few_shot", "env", "");
    }

    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        require_object(b, "backend");
        reject_unknown_keys(b, "backend",
                            {"kind", "base_url", "model_by_role", "default_model",
                             "api_key_env_var", "timeout_s", "max_retries", "script_path"});
        config.backend.kind = read_field<std::string>(b, "kind", "backend", config.backend.kind);
        config.backend.base_url =
            read_field<std::string>(b, "base_url", "backend", config.backend.base_url);
        config.backend.default_model = read_field<std::string>(b, "default_model", "backend",
                                                               config.backend.default_model);
        config.backend.api_key_env_var = read_field<std::string>(
            b, "api_key_env_var", "backend", config.backend.api_key_env_var);
        config.backend.timeout_s =
            read_field<double>(b, "timeout_s", "backend", config.backend.timeout_s);
        config.backend.max_retries =
            read_field<int>(b, "max_retries", "backend", config.backend.max_retries);
        config.backend.script_path =
            read_field<std::string>(b, "script_path", "backend", config.backend.script_path);
        if (b.contains("model_by_role")) {
            const auto& m = b.at("model_by_role");
            require_object(m, "backend.model_by_role");
            for (const auto& [role, model] : m.items()) {
                if (!llm::role_from_name(role)) {
                    throw Error("config field 'backend.model_by_role." + role +
                                "' names an unknown role");
                }
                if (!model.is_string()) {
                    throw Error("config field 'backend.model_by_role." + role +
                                "' must be a string");
                }
                config.backend.model_by_role[role] = model.get<std::string>();
            }
        }
    }

    if (j.contains("collection")) {
        const auto& c = j.at("collection");
        require_object(c, "collection");
        reject_unknown_keys(c, "collection",
                            {"max_reflection_retries", "reflection_char_cap", "focus_max_items"});
        config.collection.max_reflection_retries = read_field<int>(
            c, "max_reflection_retries", "collection", config.collection.max_reflection_retries);
        config.collection.reflection_char_cap = read_field<int>(
            c, "reflection_char_cap", "collection", config.collection.reflection_char_cap);
        config.collection.focus_max_items =
            read_field<int>(c, "focus_max_items", "collection", config.collection.focus_max_items);
    }

    if (j.contains("tips")) {
        const auto& t = j.at("tips");
        require_object(t, "tips");
        reject_unknown_keys(t, "tips", {"max_compare", "max_success", "trajectory_tail_steps"});
        config.tips.max_compare_tips =
            read_field<int>(t, "max_compare", "tips", config.tips.max_compare_tips);
        config.tips.max_success_tips =
            read_field<int>(t, "max_success", "tips", config.tips.max_success_tips);
        config.tips.trajectory_tail_steps = read_field<int>(t, "trajectory_tail_steps", "tips",
                                                            config.tips.trajectory_tail_steps);
    }

    if (j.contains("trigger")) {
        const auto& t = j.at("trigger");
        require_object(t, "trigger");
        reject_unknown_keys(t, "trigger", {"enabled", "patterns", "repeat_threshold",
                                           "cooldown_steps", "max_firings"});
        config.trigger.enabled =
            read_field<bool>(t, "enabled", "trigger", config.trigger.enabled);
        config.trigger.repeat_threshold =
            read_field<int>(t, "repeat_threshold", "trigger", config.trigger.repeat_threshold);
        config.trigger.cooldown_steps =
            read_field<int>(t, "cooldown_steps", "trigger", config.trigger.cooldown_steps);
        config.trigger.max_firings =
            read_field<int>(t, "max_firings", "trigger", config.trigger.max_firings);
        if (t.contains("patterns")) {
            if (!t.at("patterns").is_array()) {
                throw Error("config field 'trigger.patterns' must be an array");
            }
            config.trigger.anomaly_patterns.clear();
            size_t idx = 0;
            for (const auto& p : t.at("patterns")) {
                const std::string path = "trigger.patterns[" + std::to_string(idx++) + "]";
                require_object(p, path);
                reject_unknown_keys(p, path, {"kind", "text"});
                planner::TriggerPolicy::Pattern pattern;
                const auto kind = read_field<std::string>(p, "kind", path, std::string("exact"));
                if (kind == "regex") {
                    pattern.is_regex = true;
                } else if (kind != "exact") {
                    throw Error("config field '" + path + ".kind' must be 'exact' or 'regex'");
                }
                pattern.text = read_field<std::string>(p, "text", path, std::string());
                if (pattern.text.empty()) {
                    throw Error("config field '" + path + ".text' must be non-empty");
                }
                config.trigger.anomaly_patterns.push_back(std::move(pattern));
            }
        }
    }

    if (j.contains("planner")) {
        const auto& p = j.at("planner");
        require_object(p, "planner");
        reject_unknown_keys(p, "planner", {"st_tail_steps", "max_context_chars"});
        config.planner.st_tail_steps =
            read_field<int>(p, "st_tail_steps", "planner", config.planner.st_tail_steps);
        config.planner.max_context_chars = read_field<int>(
            p, "max_context_chars", "planner", config.planner.max_context_chars);
    }

    if (j.contains("retrieval")) {
        const auto& r = j.at("retrieval");
        require_object(r, "retrieval");
        reject_unknown_keys(r, "retrieval", {"k", "dimension"});
        config.k = read_field<int>(r, "k", "retrieval", config.k);
        config.retrieval_dimension =
            read_field<int>(r, "dimension", "retrieval", config.retrieval_dimension);
    }

    if (j.contains("folds")) {
        const auto& f = j.at("folds");
        require_object(f, "folds");
        reject_unknown_keys(f, "folds", {"count", "direction"});
        config.n_folds = read_field<int>(f, "count", "folds", config.n_folds);
        config.direction = read_field<std::string>(f, "direction", "folds", config.direction);
    }

    if (j.contains("tasks")) {
        const auto& t = j.at("tasks");
        require_object(t, "tasks");
        reject_unknown_keys(t, "tasks", {"generate_count", "file"});
        config.task_count = read_field<int>(t, "generate_count", "tasks", config.task_count);
        config.tasks_file = read_field<std::string>(t, "file", "tasks", config.tasks_file);
    }

    if (j.contains("external")) {
        const auto& e = j.at("external");
        require_object(e, "external");
        reject_unknown_keys(e, "external", {"host", "port", "command", "timeout_ms"});
        config.external_host =
            read_field<std::string>(e, "host", "external", config.external_host);
        config.external_port = read_field<int>(e, "port", "external", config.external_port);
        config.wire_timeout_ms =
            read_field<int>(e, "timeout_ms", "external", config.wire_timeout_ms);
        if (e.contains("command")) {
            config.external_command =
                read_field<std::vector<std::string>>(e, "command", "external", {});
        }
    }

    config.seed = read_field<uint64_t>(j, "seed", "", config.seed);
    config.jobs = read_field<int>(j, "jobs", "", config.jobs);
    config.output_dir = read_field<std::string>(j, "output_dir", "", config.output_dir.string());
    return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open config '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig config = from_json_text(buf.str());
    config.validate();
    return config;
}

void RunConfig::validate() const {
    if (env_name != "minihouse" && env_name != "echo" && env_name != "external") {
        throw Error("config field 'env.name' must be minihouse, echo, or external; got '" +
                    env_name + "'");
    }
    if (step_budget < 0) throw Error("config field 'env.step_budget' must be >= 0");
    backend.validate();
    if (collection.max_reflection_retries < 0) {
        throw Error("config field 'collection.max_reflection_retries' must be >= 0");
    }
    if (collection.focus_max_items < 1) {
        throw Error("config field 'collection.focus_max_items' must be >= 1");
    }
    if (tips.max_compare_tips < 1 || tips.max_success_tips < 1) {
        throw Error("config fields 'tips.max_compare'/'tips.max_success' must be >= 1");
    }
    if (trigger.enabled) {
        trigger.validate();  // messages already carry the trigger.* field path
    }
    if (k < 0) throw Error("config field 'retrieval.k' must be >= 0");
    if (retrieval_dimension < 1) throw Error("config field 'retrieval.dimension' must be >= 1");
    if (n_folds < 2) throw Error("config field 'folds.count' must be >= 2");
    if (direction != "a" && direction != "b") {
        throw Error("config field 'folds.direction' must be 'a' or 'b'");
    }
    if (jobs < 1) throw Error("config field 'jobs' must be >= 1");
    if (tasks_file.empty() && task_count < n_folds) {
        throw Error("config field 'tasks.generate_count' must be >= folds.count");
    }
    if (env_name == "external" && external_command.empty() &&
        (external_host.empty() || external_port <= 0)) {
        throw Error("config field 'external' needs a command or host+port");
    }
    if (env_name != "minihouse" && tasks_file.empty()) {
        throw Error("config field 'tasks.file' is required for non-minihouse environments");
    }
}

// ============================================================================
// Folds
// ============================================================================

std::vector<TaskSpec> split_folds(std::vector<TaskSpec> tasks, int n_folds, uint64_t seed) {
    if (n_folds < 2) {
        throw Error("split_folds: n_folds must be >= 2");
    }
    if (tasks.size() < static_cast<size_t>(n_folds)) {
        throw Error("split_folds: " + std::to_string(tasks.size()) + " task(s) into " +
                    std::to_string(n_folds) + " folds");
    }
    // Fisher-Yates with explicit draws; std::shuffle leaves the permutation
    // unspecified across standard libraries.
    std::mt19937_64 rng(seed);
    for (size_t i = tasks.size() - 1; i > 0; --i) {
        const size_t pick = static_cast<size_t>(rng() % (i + 1));
        std::swap(tasks[i], tasks[pick]);
    }
    for (size_t i = 0; i < tasks.size(); ++i) {
        tasks[i].fold = static_cast<int>(i % static_cast<size_t>(n_folds));
    }
    return tasks;
}

bool fold_is_train(int fold, int n_folds, const std::string& direction) {
    const bool first_half = fold < n_folds / 2;
    return direction == "b" ? !first_half : first_half;
}

// ============================================================================
// Metrics
// ============================================================================

MetricsReport compute_metrics(const std::vector<EpisodeResult>& results) {
    if (results.empty()) {
        throw Error("compute_metrics: no episodes");
    }
    MetricsReport report;
    report.episodes = static_cast<int>(results.size());
    double reward_sum = 0.0;
    std::map<int, std::vector<const EpisodeResult*>> by_fold;
    for (const auto& r : results) {
        if (r.succeeded) ++report.succeeded;
        reward_sum += r.reward;
        report.trigger_firings += r.trigger_firings;
        report.corrections += r.corrections;
        if (r.aborted) ++report.aborted;
        by_fold[r.fold].push_back(&r);
    }
    report.success_rate = static_cast<double>(report.succeeded) / report.episodes;
    report.mean_reward = reward_sum / report.episodes;
    report.per_task = results;

    std::vector<double> fold_srs;
    for (const auto& [fold, episodes] : by_fold) {
        FoldStats stats;
        stats.fold = fold;
        stats.episodes = static_cast<int>(episodes.size());
        double fold_rewards = 0.0;
        int fold_successes = 0;
        for (const auto* e : episodes) {
            if (e->succeeded) ++fold_successes;
            fold_rewards += e->reward;
        }
        stats.success_rate = static_cast<double>(fold_successes) / stats.episodes;
        stats.mean_reward = fold_rewards / stats.episodes;
        report.folds.push_back(stats);
        fold_srs.push_back(stats.success_rate);
    }
    if (fold_srs.size() >= 2) {
        double mean = 0.0;
        for (double v : fold_srs) mean += v;
        mean /= static_cast<double>(fold_srs.size());
        double variance = 0.0;
        for (double v : fold_srs) variance += (v - mean) * (v - mean);
        variance /= static_cast<double>(fold_srs.size() - 1);
        report.success_rate_stderr =
            std::sqrt(variance) / std::sqrt(static_cast<double>(fold_srs.size()));
    }
    return report;
}

MetricsReport compute_metrics(const std::vector<memory::Trajectory>& trajectories) {
    std::vector<EpisodeResult> results;
    results.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        EpisodeResult r;
        r.task_id = t.task_id;
        r.succeeded = t.succeeded;
        r.reward = t.reward;
        r.steps = static_cast<int>(t.steps.size());
        results.push_back(std::move(r));
    }
    return compute_metrics(results);
}

std::string MetricsReport::to_json_text() const {
    ordered_json j;
    j["schema"] = "recall.metrics/1";
    j["episodes"] = episodes;
    j["succeeded"] = succeeded;
    j["success_rate"] = success_rate;
    j["mean_reward"] = mean_reward;
    j["success_rate_stderr"] = success_rate_stderr;
    j["folds"] = ordered_json::array();
    for (const auto& f : folds) {
        j["folds"].push_back({{"fold", f.fold},
                              {"episodes", f.episodes},
                              {"success_rate", f.success_rate},
                              {"mean_reward", f.mean_reward}});
    }
    j["trigger_firings"] = trigger_firings;
    j["corrections"] = corrections;
    j["aborted"] = aborted;
    j["per_task"] = ordered_json::array();
    for (const auto& r : per_task) {
        j["per_task"].push_back({{"task_id", r.task_id},
                                 {"fold", r.fold},
                                 {"succeeded", r.succeeded},
                                 {"reward", r.reward},
                                 {"steps", r.steps},
                                 {"trigger_firings", r.trigger_firings},
                                 {"corrections", r.corrections},
                                 {"aborted", r.aborted},
                                 {"abort_reason", r.abort_reason}});
    }
    return j.dump(2) + "\n";
}

std::string MetricsReport::to_text() const {
    std::ostringstream out;
    out << "episodes:        " << episodes << "\n";
    out << "succeeded:       " << succeeded << "\n";
    out << "success rate:    " << success_rate << "\n";
    out << "mean reward:     " << mean_reward << "\n";
    out << "SR stderr:       " << success_rate_stderr << " (across " << folds.size()
        << " folds)\n";
    out << "trigger firings: " << trigger_firings << "\n";
    out << "corrections:     " << corrections << "\n";
    out << "aborted:         " << aborted << "\n";
    return out.str();
}

// ============================================================================
// Task sources and environments
// ============================================================================

std::vector<TaskSpec> load_tasks_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open tasks file '" + path.string() + "'");
    }
    std::vector<TaskSpec> tasks;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = ordered_json::parse(line);
            TaskSpec t;
            t.id = j.at("id").get<std::string>();
            t.instruction = j.at("instruction").get<std::string>();
            t.env_name = j.at("env_name").get<std::string>();
            t.split = j.value("split", std::string("train"));
            t.fold = j.value("fold", 0);
            tasks.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("tasks line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return tasks;
}

void save_tasks_jsonl(const std::vector<TaskSpec>& tasks, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open tasks file '" + path.string() + "' for writing");
    }
    for (const auto& t : tasks) {
        ordered_json j;
        j["id"] = t.id;
        j["instruction"] = t.instruction;
        j["env_name"] = t.env_name;
        j["split"] = t.split;
        j["fold"] = t.fold;
        out << j.dump() << "\n";
    }
}

std::vector<TaskSpec> resolve_tasks(const RunConfig& config) {
    std::vector<TaskSpec> tasks;
    if (!config.tasks_file.empty()) {
        tasks = load_tasks_jsonl(config.tasks_file);
    } else {
        tasks = env::generate_minihouse_tasks(config.task_count,
                                              static_cast<uint32_t>(config.seed));
    }
    return split_folds(std::move(tasks), config.n_folds, config.seed);
}

env::EnvFactory make_env_factory(const RunConfig& config) {
    if (config.env_name == "minihouse") {
        const int budget = config.step_budget > 0 ? config.step_budget
                                                  : env::kHouseholdStepBudget;
        return [budget] { return std::make_unique<env::MiniHouseEnv>(budget); };
    }
    if (config.env_name == "echo") {
        return [] { return std::make_unique<env::EchoEnvironment>(); };
    }
    const auto command = config.external_command;
    const auto host = config.external_host;
    const int port = config.external_port;
    const int timeout = config.wire_timeout_ms;
    return [command, host, port, timeout]() -> std::unique_ptr<env::Environment> {
        auto transport = command.empty() ? env::connect_tcp(host, port, timeout)
                                         : env::spawn_stdio_peer(command);
        return std::make_unique<env::ExternalEnvironment>(std::move(transport), timeout);
    };
}

env::EnvironmentSpec resolve_env_spec(const RunConfig& config) {
    env::EnvironmentSpec spec;
    if (config.env_name == "minihouse") {
        const int budget = config.step_budget > 0 ? config.step_budget
                                                  : env::kHouseholdStepBudget;
        spec = env::MiniHouseEnv(budget).spec();
    } else if (config.env_name == "echo") {
        spec = env::EchoEnvironment().spec();
    } else {
        spec = make_env_factory(config)()->spec();
        if (config.step_budget > 0) spec.step_budget = config.step_budget;
    }
    if (!config.env_description.empty()) spec.description = config.env_description;
    if (!config.env_few_shot.empty()) spec.few_shot = config.env_few_shot;
    return spec;
}

}  // namespace recall::harness

#include <cctype>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "recall/error.hpp"
#include "recall/harness.hpp"
#include "recall/minihouse.hpp"
#include "recall/parallel.hpp"
#include "recall/persist.hpp"
#include "recall/retrieval.hpp"

namespace recall::harness {

using nlohmann::ordered_json;
using memory::TaskSpec;

namespace {

std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return out;
}

// "phase/rest..." -> base/phase/<sanitized rest>.jsonl
trace::TraceSink file_sink(const std::filesystem::path& base) {
    return [base](const std::string& name, const trace::EpisodeTrace& trace) {
        const auto slash = name.find('/');
        std::filesystem::path rel =
            slash == std::string::npos
                ? std::filesystem::path(sanitize(name))
                : std::filesystem::path(name.substr(0, slash)) /
                      sanitize(name.substr(slash + 1));
        trace.write(base / rel.concat(".jsonl"));
    };
}

int effective_jobs(const RunConfig& config, const llm::Gateway& gateway) {
    return gateway.scripted() ? 1 : std::max(1, config.jobs);
}

std::vector<TaskSpec> filter_split(const std::vector<TaskSpec>& tasks, const RunConfig& config,
                                   bool train) {
    std::vector<TaskSpec> out;
    for (auto task : tasks) {
        if (fold_is_train(task.fold, config.n_folds, config.direction) == train) {
            task.split = train ? "train" : "eval";
            out.push_back(std::move(task));
        }
    }
    return out;
}

}  // namespace

// ============================================================================
// collect
// ============================================================================

CommandResult cmd_collect(const RunConfig& config) {
    config.validate();
    auto backend = llm::make_backend(config.backend);
    llm::Gateway gateway(llm::PromptLibrary::defaults(), backend);

    const auto tasks = resolve_tasks(config);
    const auto train = filter_split(tasks, config, /*train=*/true);
    if (train.empty()) {
        throw Error("no training tasks in direction '" + config.direction + "'");
    }
    const auto spec = resolve_env_spec(config);
    const auto factory = make_env_factory(config);

    collector::Collector collector(gateway, config.collection);
    const auto sink = file_sink(config.output_dir / "traces");
    auto result = collector.collect(train, factory, spec, sink,
                                    effective_jobs(config, gateway));
    result.pool.embedder_id = retrieval::HashingEmbedder(config.retrieval_dimension).id();

    persist::save_pool(result.pool, config.output_dir / "pool.jsonl");
    save_tasks_jsonl(tasks, config.output_dir / "tasks.jsonl");
    gateway.write_trace_jsonl(config.output_dir / "generations_collect.jsonl");

    const auto solved = memory::success_view(result.pool).size();
    std::ostringstream summary;
    summary << "collect: " << train.size() << " tasks, " << result.pool.trial_count()
            << " trajectories, " << solved << " solved, " << result.aborted_trials
            << " aborted -> " << (config.output_dir / "pool.jsonl").string();
    return {result.aborted_trials > 0 ? kExitTaskFailures : kExitOk, summary.str()};
}

// ============================================================================
// tips
// ============================================================================

CommandResult cmd_tips(const RunConfig& config, const std::filesystem::path& pool_path) {
    config.validate();
    auto backend = llm::make_backend(config.backend);
    llm::Gateway gateway(llm::PromptLibrary::defaults(), backend);

    const auto pool = persist::load_pool(pool_path);
    tipper::Tipper tipper(gateway, config.tips);
    trace::EpisodeTrace trace;
    const auto dictionary = tipper.build_tips_dictionary(pool, &trace);

    persist::save_tips(dictionary, config.output_dir / "tips.json", config.env_name);
    if (!trace.empty()) {
        trace.write(config.output_dir / "traces" / "tips.jsonl");
    }
    gateway.write_trace_jsonl(config.output_dir / "generations_tips.jsonl");

    std::ostringstream summary;
    summary << "tips: " << dictionary.size() << " task entries from " << pool.task_count()
            << " pool tasks -> " << (config.output_dir / "tips.json").string();
    return {kExitOk, summary.str()};
}

// ============================================================================
// eval
// ============================================================================

CommandResult cmd_eval(const RunConfig& config, const std::filesystem::path& pool_path,
                       const std::optional<std::filesystem::path>& tips_path,
                       bool react_baseline) {
    config.validate();
    auto backend = llm::make_backend(config.backend);
    llm::Gateway gateway(llm::PromptLibrary::defaults(), backend);

    const auto pool = persist::load_pool(pool_path);
    memory::TipsDictionary tips;
    if (tips_path) {
        tips = persist::load_tips(*tips_path);
    }
    const retrieval::HashingEmbedder embedder(config.retrieval_dimension);
    if (!pool.embedder_id.empty() && pool.embedder_id != embedder.id()) {
        std::cerr << "warning: pool was embedded with '" << pool.embedder_id
                  << "', evaluating with '" << embedder.id() << "'\n";
    }
    const auto index = retrieval::build_index(pool, embedder);

    const auto tasks = resolve_tasks(config);
    const auto eval_tasks = filter_split(tasks, config, /*train=*/false);
    if (eval_tasks.empty()) {
        throw Error("no evaluation tasks in direction '" + config.direction + "'");
    }
    const auto factory = make_env_factory(config);
    const auto sink = file_sink(config.output_dir / "traces");

    planner::Planner planner(gateway, config.planner);
    const int jobs = effective_jobs(config, gateway);
    std::vector<EpisodeResult> results(eval_tasks.size());
    std::mutex sink_mutex;

    parallel_for(static_cast<int>(eval_tasks.size()), jobs, [&](int i) {
        const TaskSpec& task = eval_tasks[static_cast<size_t>(i)];
        trace::EpisodeTrace trace;
        auto environment = factory();
        planner::EpisodeOutcome outcome;
        if (react_baseline) {
            outcome = planner.run_react_baseline(task, *environment, &trace);
        } else {
            const auto ctx =
                planner.assemble_context(task, index, tips, pool, config.k, &trace);
            outcome = planner.run_episode(task, ctx, *environment, config.trigger, &trace);
        }
        EpisodeResult& r = results[static_cast<size_t>(i)];
        r.task_id = task.id;
        r.fold = task.fold;
        r.succeeded = outcome.trajectory.succeeded;
        r.reward = outcome.trajectory.reward;
        r.steps = static_cast<int>(outcome.trajectory.steps.size());
        r.trigger_firings = outcome.trigger_firings;
        r.corrections = outcome.corrections;
        r.aborted = outcome.aborted;
        r.abort_reason = outcome.abort_reason;
        std::lock_guard<std::mutex> lock(sink_mutex);
        sink("eval/" + task.id, trace);
    });

    const auto metrics = compute_metrics(results);
    {
        std::filesystem::create_directories(config.output_dir);
        std::ofstream mj(config.output_dir / "metrics.json", std::ios::binary | std::ios::trunc);
        mj << metrics.to_json_text();
        std::ofstream mt(config.output_dir / "metrics.txt", std::ios::binary | std::ios::trunc);
        mt << metrics.to_text();
    }
    gateway.write_trace_jsonl(config.output_dir / "generations_eval.jsonl");

    std::ostringstream summary;
    summary << "eval: SR " << metrics.success_rate << ", mean reward " << metrics.mean_reward
            << " over " << metrics.episodes << " episodes (" << metrics.aborted
            << " aborted) -> " << (config.output_dir / "metrics.json").string();
    return {metrics.aborted > 0 ? kExitTaskFailures : kExitOk, summary.str()};
}

// ============================================================================
// report
// ============================================================================

CommandResult cmd_report(const std::vector<std::filesystem::path>& metrics_files,
                         const std::filesystem::path& out_path) {
    if (metrics_files.empty()) {
        throw Error("report: no metrics files found");
    }
    double sr_sum = 0.0;
    double reward_sum = 0.0;
    int episodes = 0;
    int aborted = 0;
    ordered_json runs = ordered_json::array();
    for (const auto& path : metrics_files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw Error("cannot open metrics file '" + path.string() + "'");
        }
        ordered_json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("metrics file '" + path.string() + "': " + e.what());
        }
        const double sr = j.at("success_rate").get<double>();
        const double reward = j.at("mean_reward").get<double>();
        sr_sum += sr;
        reward_sum += reward;
        episodes += j.at("episodes").get<int>();
        aborted += j.value("aborted", 0);
        runs.push_back({{"file", path.string()},
                        {"episodes", j.at("episodes").get<int>()},
                        {"success_rate", sr},
                        {"mean_reward", reward}});
    }
    const double n = static_cast<double>(metrics_files.size());
    ordered_json report;
    report["schema"] = "recall.report/1";
    report["runs"] = runs;
    report["mean_success_rate"] = sr_sum / n;
    report["mean_reward"] = reward_sum / n;
    report["total_episodes"] = episodes;
    report["total_aborted"] = aborted;
    if (out_path.has_parent_path()) {
        std::filesystem::create_directories(out_path.parent_path());
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    out << report.dump(2) << "\n";

    std::ostringstream summary;
    summary << "report: mean SR " << (sr_sum / n) << ", mean reward " << (reward_sum / n)
            << " over " << metrics_files.size() << " run(s) -> " << out_path.string();
    return {kExitOk, summary.str()};
}

// ============================================================================
// align-tips
// ============================================================================

CommandResult cmd_align_tips(const RunConfig& config, const std::filesystem::path& tips_path,
                             const std::string& target_env_name,
                             const std::string& target_description,
                             const std::filesystem::path& out_path) {
    auto backend = llm::make_backend(config.backend);
    llm::Gateway gateway(llm::PromptLibrary::defaults(), backend);

    const auto tips = persist::load_tips(tips_path);
    std::string description = target_description;
    if (description.empty() && target_env_name == "minihouse") {
        description = env::MiniHouseEnv().spec().description;
    }
    tipper::Tipper tipper(gateway, config.tips);
    trace::EpisodeTrace trace;
    const auto aligned = tipper.align_tips(tips, description, &trace);
    persist::save_tips(aligned, out_path, target_env_name);
    if (!trace.empty()) {
        trace.write(config.output_dir / "traces" / "align.jsonl");
    }

    std::ostringstream summary;
    summary << "align-tips: " << aligned.size() << " entries aligned to '" << target_env_name
            << "' -> " << out_path.string();
    return {kExitOk, summary.str()};
}

}  // namespace recall::harness

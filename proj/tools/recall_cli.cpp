// Command-line front end: collect -> tips -> eval -> report, plus the
// tips-alignment pass. Exit codes: 0 ok, 1 task failures present, 2 fatal.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recall/error.hpp"
#include "recall/harness.hpp"

namespace fs = std::filesystem;
using recall::harness::CommandResult;
using recall::harness::RunConfig;

namespace {

RunConfig load_config(const std::string& path, const std::string& output_dir,
                      const std::string& direction, int jobs) {
    RunConfig config = RunConfig::load(path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (!direction.empty()) config.direction = direction;
    if (jobs > 0) config.jobs = jobs;
    config.validate();
    return config;
}

std::vector<fs::path> find_metrics_files(const fs::path& runs_dir) {
    std::vector<fs::path> files;
    if (!fs::exists(runs_dir)) return files;
    for (const auto& entry : fs::recursive_directory_iterator(runs_dir)) {
        if (entry.is_regular_file() && entry.path().filename() == "metrics.json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memory-augmented agent pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string direction;
    int jobs = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* opt = cmd->add_option("--config", config_path, "run configuration (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--output-dir", output_dir, "override the configured output directory");
        cmd->add_option("--direction", direction, "fold direction: a or b");
        cmd->add_option("--jobs", jobs, "concurrent episodes (scripted backends force 1)");
    };

    auto* collect = app.add_subcommand("collect", "run experience collection over train tasks");
    add_common(collect);

    auto* tips = app.add_subcommand("tips", "distill the tips dictionary from a pool");
    add_common(tips);
    std::string pool_path;
    tips->add_option("--pool", pool_path, "experience pool (JSONL)")->required();

    auto* eval = app.add_subcommand("eval", "run adaptive planning over eval tasks");
    add_common(eval);
    std::string eval_pool;
    std::string eval_tips;
    bool react_baseline = false;
    int k_override = -1;
    bool trigger_off = false;
    eval->add_option("--pool", eval_pool, "experience pool (JSONL)")->required();
    eval->add_option("--tips", eval_tips, "tips dictionary (JSON); omit for the ET ablation");
    eval->add_flag("--react-baseline", react_baseline, "plain ReAct loop (no memory, no trigger)");
    eval->add_option("--k", k_override, "override retrieval scope");
    eval->add_flag("--no-trigger", trigger_off, "disable the reflection trigger");

    auto* report = app.add_subcommand("report", "aggregate metrics across runs");
    std::string runs_dir;
    std::string report_out = "report.json";
    report->add_option("--runs", runs_dir, "directory searched for metrics.json files")
        ->required();
    report->add_option("--out", report_out, "report output path");

    auto* align = app.add_subcommand("align-tips", "rewrite tips for another environment");
    add_common(align);
    std::string align_tips_path;
    std::string target_env;
    std::string description_file;
    std::string align_out;
    align->add_option("--tips", align_tips_path, "tips dictionary (JSON)")->required();
    align->add_option("--target-env", target_env, "target environment name")->required();
    align->add_option("--description-file", description_file,
                      "file with the target environment description");
    align->add_option("--out", align_out, "aligned tips output path");

    CLI11_PARSE(app, argc, argv);

    try {
        CommandResult result;
        if (collect->parsed()) {
            result = recall::harness::cmd_collect(
                load_config(config_path, output_dir, direction, jobs));
        } else if (tips->parsed()) {
            result = recall::harness::cmd_tips(
                load_config(config_path, output_dir, direction, jobs), pool_path);
        } else if (eval->parsed()) {
            RunConfig config = load_config(config_path, output_dir, direction, jobs);
            if (k_override >= 0) config.k = k_override;
            if (trigger_off) config.trigger.enabled = false;
            std::optional<fs::path> tips_file;
            if (!eval_tips.empty()) tips_file = eval_tips;
            result = recall::harness::cmd_eval(config, eval_pool, tips_file, react_baseline);
        } else if (report->parsed()) {
            const auto files = find_metrics_files(runs_dir);
            result = recall::harness::cmd_report(files, report_out);
        } else if (align->parsed()) {
            RunConfig config = load_config(config_path, output_dir, direction, jobs);
            std::string description;
            if (!description_file.empty()) {
                std::ifstream in(description_file, std::ios::binary);
                if (!in) {
                    throw recall::Error("cannot open description file '" + description_file +
                                        "'");
                }
                std::ostringstream buf;
                buf << in.rdbuf();
                description = buf.str();
            }
            const fs::path out = align_out.empty()
                                     ? config.output_dir / "tips_aligned.json"
                                     : fs::path(align_out);
            result = recall::harness::cmd_align_tips(config, align_tips_path, target_env,
                                                     description, out);
        }
        std::cout << result.summary << "\n";
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return recall::harness::kExitFatal;
    }
}
